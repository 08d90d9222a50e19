#include "seqtag/iobes.hpp"

#include <algorithm>

#include "seqtag/utf8.hpp"

namespace seqtag::corpus {

std::string to_string(const IobesLabel& label) {
  switch (label.prefix) {
    case IobesPrefix::O: return "O";
    case IobesPrefix::B: return "B-" + to_string(*label.etype);
    case IobesPrefix::I: return "I-" + to_string(*label.etype);
    case IobesPrefix::E: return "E-" + to_string(*label.etype);
    case IobesPrefix::S: return "S-" + to_string(*label.etype);
  }
  throw Error("unreachable IOBES prefix");
}

IobesLabel iobes_label_from_string(const std::string& s) {
  if (s == "O") return IobesLabel::outside();
  if (s.size() < 3 || s[1] != '-') throw Error("malformed IOBES label: '" + s + "'");
  IobesPrefix prefix;
  switch (s[0]) {
    case 'B': prefix = IobesPrefix::B; break;
    case 'I': prefix = IobesPrefix::I; break;
    case 'E': prefix = IobesPrefix::E; break;
    case 'S': prefix = IobesPrefix::S; break;
    default: throw Error("malformed IOBES label: '" + s + "'");
  }
  return IobesLabel::of(prefix, entity_type_from_string(s.substr(2)));
}

std::vector<EntitySpan> resolve_overlaps(std::vector<EntitySpan> annotations, Diag* diag) {
  // Longest first, then leftmost; survivors re-sorted by position.
  std::stable_sort(annotations.begin(), annotations.end(),
                   [](const EntitySpan& a, const EntitySpan& b) {
                     const auto len_a = a.end - a.start, len_b = b.end - b.start;
                     if (len_a != len_b) return len_a > len_b;
                     return a.start < b.start;
                   });
  std::vector<EntitySpan> kept;
  for (const EntitySpan& span : annotations) {
    const bool clashes = std::any_of(kept.begin(), kept.end(), [&](const EntitySpan& k) {
      return k.etype == span.etype && span.start < k.end && k.start < span.end;
    });
    if (clashes) {
      emit_warning(diag, "dropping overlapping " + to_string(span.etype) + " annotation [" +
                             std::to_string(span.start) + "," + std::to_string(span.end) +
                             ") '" + span.surface + "'");
    } else {
      kept.push_back(span);
    }
  }
  std::sort(kept.begin(), kept.end(), [](const EntitySpan& a, const EntitySpan& b) {
    return std::tie(a.start, a.end) < std::tie(b.start, b.end);
  });
  return kept;
}

std::optional<std::pair<std::size_t, std::size_t>> covering_token_range(
    const std::vector<Token>& tokens, const EntitySpan& span, bool strict, Diag* diag) {
  std::optional<std::size_t> first, last;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if (t.start < span.end && span.start < t.end) {
      if (!first) first = i;
      last = i;
    }
  }
  if (!first) {
    emit_warning(diag, "annotation [" + std::to_string(span.start) + "," +
                           std::to_string(span.end) + ") '" + span.surface +
                           "' overlaps no token; skipped");
    return std::nullopt;
  }
  const bool aligned =
      tokens[*first].start == span.start && tokens[*last].end == span.end;
  if (!aligned) {
    if (strict) {
      emit_warning(diag, "annotation [" + std::to_string(span.start) + "," +
                             std::to_string(span.end) + ") '" + span.surface +
                             "' not token-aligned; dropped (strict mode)");
      return std::nullopt;
    }
    emit_warning(diag, "annotation [" + std::to_string(span.start) + "," +
                           std::to_string(span.end) + ") '" + span.surface +
                           "' snapped outward to token boundaries");
  }
  return std::make_pair(*first, *last);
}

std::vector<IobesLabel> encode_iobes(const std::vector<Token>& tokens,
                                     const std::vector<EntitySpan>& annotations,
                                     EntityType etype, Diag* diag, bool strict) {
  std::vector<IobesLabel> labels(tokens.size(), IobesLabel::outside());
  for (const EntitySpan& span : annotations) {
    if (span.etype != etype) continue;
    const auto range = covering_token_range(tokens, span, strict, diag);
    if (!range) continue;
    const auto [first, last] = *range;
    if (first == last) {
      labels[first] = IobesLabel::of(IobesPrefix::S, etype);
    } else {
      labels[first] = IobesLabel::of(IobesPrefix::B, etype);
      for (std::size_t i = first + 1; i < last; ++i)
        labels[i] = IobesLabel::of(IobesPrefix::I, etype);
      labels[last] = IobesLabel::of(IobesPrefix::E, etype);
    }
  }
  return labels;
}

std::vector<EntitySpan> decode_iobes(const std::vector<IobesLabel>& labels,
                                     const std::vector<Token>& tokens,
                                     const std::u32string& text) {
  if (labels.size() != tokens.size())
    throw Error("decode_iobes: label count does not match token count");

  std::vector<EntitySpan> spans;
  std::optional<EntityType> open_type;
  std::size_t open_first = 0;

  auto close = [&](std::size_t last_idx) {
    if (!open_type) return;
    const std::size_t start = tokens[open_first].start;
    const std::size_t end = tokens[last_idx].end;
    spans.push_back({start, end, *open_type, utf8::encode(utf8::slice(text, start, end))});
    open_type.reset();
  };

  for (std::size_t i = 0; i < labels.size(); ++i) {
    const IobesLabel& label = labels[i];
    switch (label.prefix) {
      case IobesPrefix::O:
        close(i == 0 ? 0 : i - 1);
        break;
      case IobesPrefix::S:
        close(i == 0 ? 0 : i - 1);
        open_type = label.etype;
        open_first = i;
        close(i);
        break;
      case IobesPrefix::B:
        close(i == 0 ? 0 : i - 1);
        open_type = label.etype;
        open_first = i;
        break;
      case IobesPrefix::I:
        if (open_type && *open_type == *label.etype) break;
        close(i == 0 ? 0 : i - 1);
        open_type = label.etype;
        open_first = i;
        break;
      case IobesPrefix::E:
        if (open_type && *open_type == *label.etype) {
          close(i);
        } else {
          close(i == 0 ? 0 : i - 1);
          open_type = label.etype;
          open_first = i;
          close(i);
        }
        break;
    }
  }
  if (open_type) close(labels.size() - 1);
  return spans;
}

}  // namespace seqtag::corpus
