#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "seqtag/common.hpp"

namespace seqtag::corpus {

enum class EntityType { CellLine, Chemical, Disease, Gene, Species };

inline constexpr std::array<EntityType, 5> kAllEntityTypes = {
    EntityType::CellLine, EntityType::Chemical, EntityType::Disease, EntityType::Gene,
    EntityType::Species};

std::string to_string(EntityType t);
EntityType entity_type_from_string(const std::string& s);
std::optional<EntityType> try_entity_type_from_string(const std::string& s);

enum class Split { Train, Dev, Test, Unassigned };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

// Character offsets throughout are Unicode scalar-value indices, 0-based,
// end-exclusive.
struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  EntityType etype = EntityType::Gene;
  std::string surface;  // UTF-8, must equal text[start..end)

  bool operator==(const EntitySpan&) const = default;
};

struct Token {
  std::string text;  // UTF-8
  std::size_t start = 0;
  std::size_t end = 0;
  int sentence_idx = 0;

  bool operator==(const Token&) const = default;
};

struct SentenceSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const SentenceSpan&) const = default;
};

struct Document {
  std::string id;
  std::string text;  // UTF-8
  std::vector<EntitySpan> annotations;
  Split split = Split::Unassigned;

  // Derived structure, filled by ensure_tokenized() or a format parser.
  std::vector<SentenceSpan> sentences;
  std::vector<Token> tokens;
  bool tokenized = false;

  // Corpus of origin, set when documents travel through split unions.
  std::string origin;
};

struct Corpus {
  std::string name;
  std::vector<Document> documents;
  std::vector<EntityType> entity_types_annotated;
};

// Sorts annotations by (start, end) and checks the Document invariants:
// offsets within bounds, surface equals the text slice, no duplicate
// spans of the same type. Throws on violation.
void validate_document(const Document& doc);

// Splits and tokenizes doc.text unless structure is already present.
void ensure_tokenized(Document& doc);

// Entity types that actually occur in the corpus annotations.
std::vector<EntityType> collect_entity_types(const Corpus& corpus);

}  // namespace seqtag::corpus
