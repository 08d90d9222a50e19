#include "seqtag/splits.hpp"

#include <functional>
#include <iomanip>
#include <set>
#include <sstream>

namespace seqtag::corpus {

namespace {

SplitSets build_from(const std::vector<Corpus>& corpora,
                     const std::function<Split(const Corpus&, const Document&)>& assign) {
  SplitSets sets;
  for (const Corpus& corpus : corpora) {
    std::set<std::string> seen;
    for (const Document& doc : corpus.documents) {
      if (!seen.insert(doc.id).second)
        throw Error("corpus '" + corpus.name + "': duplicate document id '" + doc.id + "'");
      const Split split = assign(corpus, doc);
      Document copy = doc;
      copy.origin = corpus.name;
      switch (split) {
        case Split::Train:
        case Split::Test:
          copy.split = Split::Train;
          sets.train.push_back(std::move(copy));
          break;
        case Split::Dev:
          copy.split = Split::Dev;
          sets.dev.push_back(std::move(copy));
          break;
        case Split::Unassigned:
          throw Error("document '" + doc.id + "' in corpus '" + corpus.name +
                      "' has no split assignment");
      }
    }
  }
  return sets;
}

}  // namespace

SplitSets build_splits(const std::vector<Corpus>& corpora,
                       const std::map<std::string, Split>& assignments) {
  return build_from(corpora, [&](const Corpus& corpus, const Document& doc) {
    const auto it = assignments.find(doc.id);
    if (it == assignments.end())
      throw Error("document '" + doc.id + "' in corpus '" + corpus.name +
                  "' has no split assignment");
    return it->second;
  });
}

SplitSets build_splits_from_fields(const std::vector<Corpus>& corpora) {
  return build_from(corpora,
                    [](const Corpus&, const Document& doc) { return doc.split; });
}

std::size_t CorpusStats::total_annotations() const {
  std::size_t total = 0;
  for (const auto& [type, count] : annotations) total += count;
  return total;
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats stats;
  for (const Document& doc : corpus.documents) {
    if (!doc.tokenized)
      throw Error("corpus_stats: document '" + doc.id + "' is not tokenized");
    ++stats.documents;
    stats.sentences += doc.sentences.size();
    stats.tokens += doc.tokens.size();
    for (const EntitySpan& span : doc.annotations) ++stats.annotations[span.etype];
  }
  return stats;
}

std::string render_stats_table(const std::vector<std::pair<std::string, CorpusStats>>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(20) << "corpus" << std::right << std::setw(10) << "docs"
     << std::setw(11) << "sentences" << std::setw(10) << "tokens";
  for (EntityType t : kAllEntityTypes) os << std::setw(10) << to_string(t);
  os << "\n";
  for (const auto& [name, stats] : rows) {
    os << std::left << std::setw(20) << name << std::right << std::setw(10) << stats.documents
       << std::setw(11) << stats.sentences << std::setw(10) << stats.tokens;
    for (EntityType t : kAllEntityTypes) {
      const auto it = stats.annotations.find(t);
      os << std::setw(10) << (it == stats.annotations.end() ? 0 : it->second);
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace seqtag::corpus
