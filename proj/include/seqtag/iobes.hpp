#pragma once

#include <optional>
#include <string>
#include <vector>

#include "seqtag/document.hpp"

namespace seqtag::corpus {

enum class IobesPrefix { O, B, I, E, S };

struct IobesLabel {
  IobesPrefix prefix = IobesPrefix::O;
  std::optional<EntityType> etype;  // present iff prefix != O

  bool operator==(const IobesLabel&) const = default;

  static IobesLabel outside() { return {IobesPrefix::O, std::nullopt}; }
  static IobesLabel of(IobesPrefix p, EntityType t) { return {p, t}; }
};

std::string to_string(const IobesLabel& label);
// Parses "O", "B-Gene", "S-Disease", ... IOB2 "B-"/"I-" strings parse too.
IobesLabel iobes_label_from_string(const std::string& s);

// Overlapping annotations of one entity type cannot be expressed in
// IOBES; keeps the longest, then leftmost, drops the rest with a warning.
std::vector<EntitySpan> resolve_overlaps(std::vector<EntitySpan> annotations, Diag* diag);

// Snaps an annotation outward to the smallest covering token sequence.
// Returns token index range [first, last], or nullopt when no token
// overlaps the span. With strict=true, misaligned annotations are dropped
// instead of snapped.
std::optional<std::pair<std::size_t, std::size_t>> covering_token_range(
    const std::vector<Token>& tokens, const EntitySpan& span, bool strict, Diag* diag);

// Annotations must already be filtered to etype and overlap-resolved.
// Annotations overlapping no token are skipped with a warning.
std::vector<IobesLabel> encode_iobes(const std::vector<Token>& tokens,
                                     const std::vector<EntitySpan>& annotations,
                                     EntityType etype, Diag* diag = nullptr,
                                     bool strict = false);

// Lenient inverse: malformed sequences are repaired (a bare I-run becomes
// a span, an orphan E closes a single-token span). Round-trips with
// encode_iobes on well-formed input. Surfaces are taken from `text`.
std::vector<EntitySpan> decode_iobes(const std::vector<IobesLabel>& labels,
                                     const std::vector<Token>& tokens,
                                     const std::u32string& text);

}  // namespace seqtag::corpus
