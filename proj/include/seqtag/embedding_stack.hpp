#pragma once

#include <memory>
#include <string>
#include <vector>

#include "seqtag/char_lm.hpp"
#include "seqtag/skipgram.hpp"
#include "seqtag/word_vectors.hpp"

namespace seqtag::emb {

// One source of per-token vectors. Token offsets are relative to the
// sentence text handed in.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual int dim() const = 0;
  virtual std::string kind() const = 0;
  virtual std::vector<Vector> embed(const std::u32string& sentence_text,
                                    const std::vector<corpus::Token>& tokens) const = 0;
};

class CharLmEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit CharLmEmbeddingProvider(CharLmModel model);
  int dim() const override { return model_.hidden_dim(); }
  std::string kind() const override;
  std::vector<Vector> embed(const std::u32string& sentence_text,
                            const std::vector<corpus::Token>& tokens) const override;
  const CharLmModel& model() const { return model_; }

 private:
  CharLmModel model_;
};

class SkipgramEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit SkipgramEmbeddingProvider(SkipgramModel model) : model_(std::move(model)) {}
  int dim() const override { return model_.dim(); }
  std::string kind() const override { return "skipgram"; }
  std::vector<Vector> embed(const std::u32string& sentence_text,
                            const std::vector<corpus::Token>& tokens) const override;

 private:
  SkipgramModel model_;
};

class WordVectorEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit WordVectorEmbeddingProvider(WordVectorTable table) : table_(std::move(table)) {}
  int dim() const override { return table_.dim(); }
  std::string kind() const override { return "word-vectors"; }
  std::vector<Vector> embed(const std::u32string& sentence_text,
                            const std::vector<corpus::Token>& tokens) const override;

 private:
  WordVectorTable table_;
};

// Per-token concatenation of all providers, in declared order.
std::vector<Vector> stack_embeddings(
    const std::vector<std::shared_ptr<const EmbeddingProvider>>& providers,
    const std::u32string& sentence_text, const std::vector<corpus::Token>& tokens);

// Named provider source, so tagger checkpoints can re-open their stack.
struct EmbeddingSource {
  std::string kind;  // "char-lm" | "skipgram" | "word-vectors"
  std::string path;
};

class EmbeddingStack {
 public:
  EmbeddingStack() = default;

  static EmbeddingStack from_sources(const std::vector<EmbeddingSource>& sources);

  void add(std::shared_ptr<const EmbeddingProvider> provider, EmbeddingSource source);

  int total_dim() const;
  bool empty() const { return providers_.empty(); }
  const std::vector<EmbeddingSource>& sources() const { return sources_; }
  const std::vector<std::shared_ptr<const EmbeddingProvider>>& providers() const {
    return providers_;
  }

  std::vector<Vector> embed(const std::u32string& sentence_text,
                            const std::vector<corpus::Token>& tokens) const;

 private:
  std::vector<std::shared_ptr<const EmbeddingProvider>> providers_;
  std::vector<EmbeddingSource> sources_;
};

}  // namespace seqtag::emb
