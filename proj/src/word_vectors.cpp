#include "seqtag/word_vectors.hpp"

#include <fstream>
#include <sstream>

namespace seqtag::emb {

num::Vector WordVectorTable::lookup(const std::string& word, Diag* diag) const {
  const auto it = vectors_.find(word);
  if (it != vectors_.end()) return it->second;
  emit_warning(diag, "word '" + word + "' not in pretrained vectors; using zeros");
  return num::Vector::Zero(dim_);
}

WordVectorTable WordVectorTable::load_word2vec_text(std::istream& in, Diag* diag) {
  WordVectorTable table;
  std::string line;
  if (!std::getline(in, line)) throw Error("word2vec file is empty");
  std::istringstream header(line);
  long long declared_count = 0;
  int dim = 0;
  if (!(header >> declared_count >> dim) || declared_count < 0 || dim <= 0)
    throw Error("line 1: malformed word2vec header (expected 'count dim')");
  table.dim_ = dim;

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    num::Vector v(dim);
    for (int i = 0; i < dim; ++i) {
      if (!(ss >> v[i]))
        throw Error("line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                    " vector components");
    }
    double extra;
    if (ss >> extra)
      throw Error("line " + std::to_string(line_no) + ": more than " + std::to_string(dim) +
                  " vector components");
    table.vectors_[word] = std::move(v);
  }
  if (static_cast<long long>(table.vectors_.size()) != declared_count)
    emit_warning(diag, "word2vec header declared " + std::to_string(declared_count) +
                           " words but file contains " + std::to_string(table.vectors_.size()) +
                           "; proceeding with the actual count");
  return table;
}

WordVectorTable WordVectorTable::load_file(const std::string& path, Diag* diag) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open word vectors: " + path);
  return load_word2vec_text(in, diag);
}

}  // namespace seqtag::emb
