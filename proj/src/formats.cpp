#include "seqtag/formats.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "seqtag/iobes.hpp"
#include "seqtag/utf8.hpp"

namespace seqtag::corpus {

namespace {

std::vector<std::string> split_on(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(sep, pos);
    if (next == std::string::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
  return fields;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

[[noreturn]] void fail_line(int line_no, const std::string& msg) {
  throw Error("line " + std::to_string(line_no) + ": " + msg);
}

std::size_t parse_offset(const std::string& s, int line_no) {
  try {
    std::size_t consumed = 0;
    const long long v = std::stoll(s, &consumed);
    if (consumed != s.size() || v < 0) fail_line(line_no, "bad offset '" + s + "'");
    return static_cast<std::size_t>(v);
  } catch (const std::logic_error&) {
    fail_line(line_no, "bad offset '" + s + "'");
  }
}

}  // namespace

TypeAliasTable load_alias_table(std::istream& in) {
  TypeAliasTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto ltrim = line.find_first_not_of(" \t");
    if (ltrim == std::string::npos) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail_line(line_no, "alias table entry without '='");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) fail_line(line_no, "empty alias key or value");
    table[key] = value;
  }
  return table;
}

TypeAliasTable load_alias_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open alias table: " + path);
  return load_alias_table(in);
}

std::optional<EntityType> map_entity_type(const std::string& raw,
                                          const TypeAliasTable& aliases) {
  if (auto direct = try_entity_type_from_string(raw)) return direct;
  const auto it = aliases.find(raw);
  if (it == aliases.end()) return std::nullopt;
  return try_entity_type_from_string(it->second);
}

// ---------------------------------------------------------------------------
// PubTator

namespace {

struct PubtatorRecord {
  std::string pmid;
  std::string title;
  bool has_title = false;
  std::string abstract_text;
  bool has_abstract = false;
  struct RawAnnotation {
    std::size_t start, end;
    std::string mention, type;
    int line_no;
  };
  std::vector<RawAnnotation> annotations;

  bool empty() const { return !has_title && !has_abstract && annotations.empty(); }
};

void finalize_record(PubtatorRecord& rec, const TypeAliasTable& aliases,
                     std::vector<Document>& out, Diag* diag) {
  if (rec.empty()) return;
  Document doc;
  doc.id = rec.pmid;
  doc.text = rec.title + "\n" + rec.abstract_text;
  const std::u32string text = utf8::decode(doc.text);
  for (const auto& ann : rec.annotations) {
    const auto etype = map_entity_type(ann.type, aliases);
    if (!etype) {
      emit_warning(diag, "line " + std::to_string(ann.line_no) + ": unknown entity type '" +
                             ann.type + "'; annotation skipped");
      continue;
    }
    if (ann.end <= ann.start || ann.end > text.size() ||
        utf8::encode(utf8::slice(text, ann.start, ann.end)) != ann.mention) {
      emit_warning(diag, "line " + std::to_string(ann.line_no) + ": mention '" + ann.mention +
                             "' does not match text at [" + std::to_string(ann.start) + "," +
                             std::to_string(ann.end) + "); annotation skipped");
      continue;
    }
    EntitySpan span{ann.start, ann.end, *etype, ann.mention};
    const bool duplicate =
        std::any_of(doc.annotations.begin(), doc.annotations.end(), [&](const EntitySpan& s) {
          return s.start == span.start && s.end == span.end && s.etype == span.etype;
        });
    if (duplicate) {
      emit_warning(diag, "line " + std::to_string(ann.line_no) +
                             ": duplicate annotation skipped");
      continue;
    }
    doc.annotations.push_back(std::move(span));
  }
  std::sort(doc.annotations.begin(), doc.annotations.end(),
            [](const EntitySpan& a, const EntitySpan& b) {
              return std::tie(a.start, a.end) < std::tie(b.start, b.end);
            });
  out.push_back(std::move(doc));
  rec = PubtatorRecord{};
}

}  // namespace

std::vector<Document> parse_pubtator(std::istream& in, const TypeAliasTable& aliases,
                                     Diag* diag) {
  std::vector<Document> docs;
  PubtatorRecord rec;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) {
      finalize_record(rec, aliases, docs, diag);
      continue;
    }
    // Text lines: PMID|t|... or PMID|a|...
    const std::size_t p1 = line.find('|');
    const std::size_t p2 = p1 == std::string::npos ? std::string::npos : line.find('|', p1 + 1);
    if (p2 != std::string::npos && p2 == p1 + 2 &&
        (line[p1 + 1] == 't' || line[p1 + 1] == 'a')) {
      const std::string pmid = line.substr(0, p1);
      const char kind = line[p1 + 1];
      const std::string body = line.substr(p2 + 1);
      if (pmid.empty()) fail_line(line_no, "empty PMID");
      if (!rec.empty() && rec.pmid != pmid) finalize_record(rec, aliases, docs, diag);
      if (kind == 't' && rec.has_title) finalize_record(rec, aliases, docs, diag);
      rec.pmid = pmid;
      if (kind == 't') {
        rec.title = body;
        rec.has_title = true;
      } else {
        if (rec.has_abstract) fail_line(line_no, "duplicate abstract for PMID " + pmid);
        rec.abstract_text = body;
        rec.has_abstract = true;
      }
      continue;
    }
    // Annotation lines: PMID\tstart\tend\tmention\ttype[\t...]
    const std::vector<std::string> fields = split_on(line, '\t');
    if (fields.size() < 5)
      fail_line(line_no, "malformed PubTator line (expected text or 5+ tab fields)");
    if (rec.empty() || fields[0] != rec.pmid)
      fail_line(line_no, "annotation PMID '" + fields[0] + "' does not match open record");
    PubtatorRecord::RawAnnotation ann;
    ann.start = parse_offset(fields[1], line_no);
    ann.end = parse_offset(fields[2], line_no);
    ann.mention = fields[3];
    ann.type = fields[4];
    ann.line_no = line_no;
    rec.annotations.push_back(std::move(ann));
  }
  finalize_record(rec, aliases, docs, diag);
  return docs;
}

// ---------------------------------------------------------------------------
// CoNLL

namespace {

struct ConllDocBuilder {
  std::vector<std::vector<std::pair<std::string, std::string>>> sentences;  // (token, label)
  std::vector<std::pair<std::string, std::string>> current;

  void end_sentence() {
    if (!current.empty()) sentences.push_back(std::move(current));
    current.clear();
  }
  bool empty() const { return sentences.empty() && current.empty(); }
};

// IOB2 runs to spans over token indices.
std::vector<std::tuple<std::size_t, std::size_t, EntityType>> iob2_to_ranges(
    const std::vector<IobesLabel>& labels) {
  std::vector<std::tuple<std::size_t, std::size_t, EntityType>> ranges;
  std::optional<EntityType> open;
  std::size_t first = 0;
  auto close = [&](std::size_t last) {
    if (open) ranges.emplace_back(first, last, *open);
    open.reset();
  };
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const IobesLabel& l = labels[i];
    if (l.prefix == IobesPrefix::O) {
      close(i == 0 ? 0 : i - 1);
    } else if (l.prefix == IobesPrefix::B) {
      close(i == 0 ? 0 : i - 1);
      open = l.etype;
      first = i;
    } else {  // I continues the open run, or opens one (lenient)
      if (!open || *open != *l.etype) {
        close(i == 0 ? 0 : i - 1);
        open = l.etype;
        first = i;
      }
    }
  }
  if (open) close(labels.size() - 1);
  return ranges;
}

Document build_conll_document(ConllDocBuilder& builder, ConllScheme scheme, int doc_index,
                              const TypeAliasTable& aliases, int line_no) {
  Document doc;
  doc.id = "doc" + std::to_string(doc_index);
  std::u32string text;
  std::vector<IobesLabel> labels;
  for (std::size_t si = 0; si < builder.sentences.size(); ++si) {
    const auto& sent = builder.sentences[si];
    const std::size_t sent_start = text.size();
    for (std::size_t ti = 0; ti < sent.size(); ++ti) {
      const auto& [tok, raw_label] = sent[ti];
      if (ti > 0 || si > 0) text += U' ';
      const std::size_t start = text.size();
      const std::u32string tok32 = utf8::decode(tok);
      text += tok32;
      doc.tokens.push_back({tok, start, text.size(), static_cast<int>(si)});

      IobesLabel label = IobesLabel::outside();
      if (raw_label != "O") {
        if (raw_label.size() < 3 || raw_label[1] != '-')
          fail_line(line_no, "malformed label '" + raw_label + "'");
        const auto etype = map_entity_type(raw_label.substr(2), aliases);
        if (!etype) fail_line(line_no, "unknown label '" + raw_label + "'");
        IobesPrefix prefix;
        switch (raw_label[0]) {
          case 'B': prefix = IobesPrefix::B; break;
          case 'I': prefix = IobesPrefix::I; break;
          case 'E': prefix = IobesPrefix::E; break;
          case 'S': prefix = IobesPrefix::S; break;
          default: fail_line(line_no, "unknown label '" + raw_label + "'");
        }
        if (scheme == ConllScheme::IOB2 && prefix != IobesPrefix::B && prefix != IobesPrefix::I)
          fail_line(line_no, "label '" + raw_label + "' is not IOB2");
        label = IobesLabel::of(prefix, *etype);
      }
      labels.push_back(label);
    }
    doc.sentences.push_back({si == 0 ? sent_start : sent_start + 1, text.size()});
  }
  doc.text = utf8::encode(text);
  doc.tokenized = true;

  if (scheme == ConllScheme::IOBES) {
    doc.annotations = decode_iobes(labels, doc.tokens, text);
  } else {
    for (const auto& [first, last, etype] : iob2_to_ranges(labels)) {
      const std::size_t start = doc.tokens[first].start;
      const std::size_t end = doc.tokens[last].end;
      doc.annotations.push_back(
          {start, end, etype, utf8::encode(utf8::slice(text, start, end))});
    }
  }
  return doc;
}

}  // namespace

std::vector<Document> parse_conll(std::istream& in, ConllScheme scheme,
                                  const TypeAliasTable& aliases, Diag* diag) {
  (void)diag;
  std::vector<Document> docs;
  ConllDocBuilder builder;
  std::string line;
  int line_no = 0;
  int last_content_line = 0;

  auto flush_document = [&]() {
    builder.end_sentence();
    if (!builder.empty()) {
      docs.push_back(build_conll_document(builder, scheme, static_cast<int>(docs.size()),
                                          aliases, last_content_line));
      builder = ConllDocBuilder{};
    }
  };

  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) {
      builder.end_sentence();
      continue;
    }
    if (line.rfind("-DOCSTART-", 0) == 0) {
      flush_document();
      continue;
    }
    std::vector<std::string> fields = split_on(line, '\t');
    if (fields.size() < 2) {
      // Space-separated fallback.
      std::istringstream ss(line);
      fields.clear();
      std::string f;
      while (ss >> f) fields.push_back(f);
    }
    if (fields.size() < 2) fail_line(line_no, "expected 'token<TAB>label'");
    if (fields.front().empty()) fail_line(line_no, "empty token");
    last_content_line = line_no;
    builder.current.emplace_back(fields.front(), fields.back());
  }
  flush_document();
  return docs;
}

namespace {

void write_conll_document(const Document& doc, EntityType etype, std::ostream& out,
                          Diag* diag) {
  if (!doc.tokenized) throw Error("write_conll: document '" + doc.id + "' is not tokenized");
  std::vector<EntitySpan> filtered;
  for (const EntitySpan& s : doc.annotations)
    if (s.etype == etype) filtered.push_back(s);
  const std::vector<IobesLabel> labels =
      encode_iobes(doc.tokens, resolve_overlaps(std::move(filtered), diag), etype, diag);
  int last_sentence = doc.tokens.empty() ? 0 : doc.tokens.front().sentence_idx;
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    if (doc.tokens[i].sentence_idx != last_sentence) {
      out << "\n";
      last_sentence = doc.tokens[i].sentence_idx;
    }
    out << doc.tokens[i].text << "\t" << to_string(labels[i]) << "\n";
  }
  if (!out) throw Error("write_conll: stream write failed");
}

}  // namespace

void write_conll(const Document& doc, EntityType etype, std::ostream& out, Diag* diag) {
  write_conll_document(doc, etype, out, diag);
}

void write_conll_corpus(const std::vector<Document>& docs, EntityType etype,
                        std::ostream& out, Diag* diag) {
  for (std::size_t i = 0; i < docs.size(); ++i) {
    out << "-DOCSTART-\tO\n\n";
    write_conll_document(docs[i], etype, out, diag);
    if (i + 1 < docs.size()) out << "\n";
  }
}

// ---------------------------------------------------------------------------
// Harmonized JSONL

std::string harmonized_line(const Document& doc) {
  if (doc.split == Split::Unassigned)
    throw Error("document '" + doc.id + "' has no split assignment");
  nlohmann::ordered_json obj;
  obj["id"] = doc.id;
  obj["text"] = doc.text;
  obj["split"] = to_string(doc.split);
  obj["annotations"] = nlohmann::ordered_json::array();
  for (const EntitySpan& span : doc.annotations) {
    nlohmann::ordered_json ann;
    ann["start"] = span.start;
    ann["end"] = span.end;
    ann["type"] = to_string(span.etype);
    ann["text"] = span.surface;
    obj["annotations"].push_back(std::move(ann));
  }
  return obj.dump();
}

void write_harmonized(const std::vector<Document>& docs, std::ostream& out) {
  for (const Document& doc : docs) out << harmonized_line(doc) << "\n";
  if (!out) throw Error("write_harmonized: stream write failed");
}

std::vector<Document> read_harmonized(std::istream& in) {
  std::vector<Document> docs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail_line(line_no, std::string("invalid JSON: ") + e.what());
    }
    try {
      Document doc;
      doc.id = obj.at("id").get<std::string>();
      doc.text = obj.at("text").get<std::string>();
      doc.split = split_from_string(obj.at("split").get<std::string>());
      for (const auto& ann : obj.at("annotations")) {
        EntitySpan span;
        span.start = ann.at("start").get<std::size_t>();
        span.end = ann.at("end").get<std::size_t>();
        span.etype = entity_type_from_string(ann.at("type").get<std::string>());
        span.surface = ann.at("text").get<std::string>();
        doc.annotations.push_back(std::move(span));
      }
      std::sort(doc.annotations.begin(), doc.annotations.end(),
                [](const EntitySpan& a, const EntitySpan& b) {
                  return std::tie(a.start, a.end) < std::tie(b.start, b.end);
                });
      validate_document(doc);
      docs.push_back(std::move(doc));
    } catch (const nlohmann::json::exception& e) {
      fail_line(line_no, std::string("bad harmonized record: ") + e.what());
    } catch (const Error& e) {
      fail_line(line_no, e.what());
    }
  }
  return docs;
}

std::vector<Document> read_harmonized_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open harmonized corpus: " + path);
  return read_harmonized(in);
}

void write_harmonized_file(const std::vector<Document>& docs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write harmonized corpus: " + path);
  write_harmonized(docs, out);
}

}  // namespace seqtag::corpus
