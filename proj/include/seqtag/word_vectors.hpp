#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "seqtag/numerics.hpp"

namespace seqtag::emb {

// Pretrained word vectors in word2vec text format: a "count dim" header,
// then one "word v1 ... v_dim" line per word. Unknown words look up as a
// zero vector (logged through the diag).
class WordVectorTable {
 public:
  WordVectorTable() = default;

  int dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  num::Vector lookup(const std::string& word, Diag* diag = nullptr) const;
  bool contains(const std::string& word) const { return vectors_.count(word) > 0; }

  static WordVectorTable load_word2vec_text(std::istream& in, Diag* diag = nullptr);
  static WordVectorTable load_file(const std::string& path, Diag* diag = nullptr);

 private:
  int dim_ = 0;
  std::map<std::string, num::Vector> vectors_;
};

}  // namespace seqtag::emb
