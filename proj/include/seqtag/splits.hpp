#pragma once

#include <map>
#include <string>
#include <vector>

#include "seqtag/document.hpp"

namespace seqtag::corpus {

struct SplitSets {
  std::vector<Document> train;
  std::vector<Document> dev;
};

// HUNER split policy: the training set is the union of documents assigned
// train or test, the dev set the union of documents assigned dev. Every
// document must have an assignment; duplicate ids within one corpus are an
// error. Documents keep their corpus of origin in Document::origin.
SplitSets build_splits(const std::vector<Corpus>& corpora,
                       const std::map<std::string, Split>& assignments);

// Same policy, but assignments are taken from each document's split field.
SplitSets build_splits_from_fields(const std::vector<Corpus>& corpora);

struct CorpusStats {
  std::size_t documents = 0;
  std::size_t sentences = 0;
  std::size_t tokens = 0;
  std::map<EntityType, std::size_t> annotations;

  std::size_t total_annotations() const;
};

// Exact counts over a tokenized corpus.
CorpusStats corpus_stats(const Corpus& corpus);

std::string render_stats_table(const std::vector<std::pair<std::string, CorpusStats>>& rows);

}  // namespace seqtag::corpus
