#include "seqtag/document.hpp"

#include <algorithm>
#include <set>

#include "seqtag/text.hpp"
#include "seqtag/utf8.hpp"

namespace seqtag::corpus {

std::string to_string(EntityType t) {
  switch (t) {
    case EntityType::CellLine: return "CellLine";
    case EntityType::Chemical: return "Chemical";
    case EntityType::Disease: return "Disease";
    case EntityType::Gene: return "Gene";
    case EntityType::Species: return "Species";
  }
  throw Error("unreachable entity type");
}

std::optional<EntityType> try_entity_type_from_string(const std::string& s) {
  for (EntityType t : kAllEntityTypes)
    if (to_string(t) == s) return t;
  return std::nullopt;
}

EntityType entity_type_from_string(const std::string& s) {
  if (auto t = try_entity_type_from_string(s)) return *t;
  throw Error("unknown entity type: '" + s + "'");
}

std::string to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
    case Split::Unassigned: return "unassigned";
  }
  throw Error("unreachable split");
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "dev") return Split::Dev;
  if (s == "test") return Split::Test;
  if (s == "unassigned") return Split::Unassigned;
  throw Error("unknown split: '" + s + "'");
}

void validate_document(const Document& doc) {
  const std::u32string text = utf8::decode(doc.text);
  std::set<std::tuple<std::size_t, std::size_t, EntityType>> seen;
  for (const EntitySpan& span : doc.annotations) {
    if (span.start >= span.end || span.end > text.size())
      throw Error("document '" + doc.id + "': annotation offsets [" +
                  std::to_string(span.start) + "," + std::to_string(span.end) +
                  ") out of range");
    if (utf8::encode(utf8::slice(text, span.start, span.end)) != span.surface)
      throw Error("document '" + doc.id + "': annotation surface '" + span.surface +
                  "' does not match text slice");
    if (!seen.insert({span.start, span.end, span.etype}).second)
      throw Error("document '" + doc.id + "': duplicate annotation of one type at [" +
                  std::to_string(span.start) + "," + std::to_string(span.end) + ")");
  }
}

void ensure_tokenized(Document& doc) {
  if (doc.tokenized) return;
  const std::u32string text = utf8::decode(doc.text);
  doc.sentences = split_sentences(text);
  doc.tokens = tokenize(text, doc.sentences);
  doc.tokenized = true;
}

std::vector<EntityType> collect_entity_types(const Corpus& corpus) {
  std::set<EntityType> types;
  for (const Document& doc : corpus.documents)
    for (const EntitySpan& span : doc.annotations) types.insert(span.etype);
  return {types.begin(), types.end()};
}

}  // namespace seqtag::corpus
