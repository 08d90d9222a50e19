#include "seqtag/embedding_stack.hpp"

#include <algorithm>

#include "seqtag/model_io.hpp"
#include "seqtag/utf8.hpp"

namespace seqtag::emb {

CharLmEmbeddingProvider::CharLmEmbeddingProvider(CharLmModel model)
    : model_(std::move(model)) {}

std::string CharLmEmbeddingProvider::kind() const {
  return model_.direction == LmDirection::Forward ? "char-lm-forward" : "char-lm-backward";
}

std::vector<Vector> CharLmEmbeddingProvider::embed(
    const std::u32string& sentence_text, const std::vector<corpus::Token>& tokens) const {
  const std::size_t n = sentence_text.size();
  for (const corpus::Token& t : tokens)
    if (t.start >= t.end || t.end > n)
      throw Error("char-lm embedding: token offsets outside sentence");

  std::vector<Vector> out;
  out.reserve(tokens.size());
  if (model_.direction == LmDirection::Forward) {
    const Matrix states = char_lm_hidden_states(model_, sentence_text);
    for (const corpus::Token& t : tokens)
      out.push_back(states.row(static_cast<Eigen::Index>(t.end)).transpose());
  } else {
    std::u32string reversed(sentence_text);
    std::reverse(reversed.begin(), reversed.end());
    const Matrix states = char_lm_hidden_states(model_, reversed);
    for (const corpus::Token& t : tokens)
      out.push_back(states.row(static_cast<Eigen::Index>(n - t.start)).transpose());
  }
  return out;
}

std::vector<Vector> SkipgramEmbeddingProvider::embed(
    const std::u32string&, const std::vector<corpus::Token>& tokens) const {
  std::vector<Vector> out;
  out.reserve(tokens.size());
  for (const corpus::Token& t : tokens) out.push_back(model_.word_vector(t.text));
  return out;
}

std::vector<Vector> WordVectorEmbeddingProvider::embed(
    const std::u32string&, const std::vector<corpus::Token>& tokens) const {
  std::vector<Vector> out;
  out.reserve(tokens.size());
  for (const corpus::Token& t : tokens) out.push_back(table_.lookup(t.text));
  return out;
}

std::vector<Vector> stack_embeddings(
    const std::vector<std::shared_ptr<const EmbeddingProvider>>& providers,
    const std::u32string& sentence_text, const std::vector<corpus::Token>& tokens) {
  if (providers.empty()) throw Error("stack_embeddings: no providers");
  int total = 0;
  for (const auto& p : providers) total += p->dim();

  std::vector<Vector> stacked(tokens.size(), Vector(total));
  int offset = 0;
  for (const auto& provider : providers) {
    const std::vector<Vector> part = provider->embed(sentence_text, tokens);
    if (part.size() != tokens.size())
      throw Error("provider '" + provider->kind() + "' returned a wrong token count");
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      if (part[t].size() != provider->dim())
        throw Error("provider '" + provider->kind() + "' dimension inconsistency");
      stacked[t].segment(offset, provider->dim()) = part[t];
    }
    offset += provider->dim();
  }
  return stacked;
}

EmbeddingStack EmbeddingStack::from_sources(const std::vector<EmbeddingSource>& sources) {
  EmbeddingStack stack;
  for (const EmbeddingSource& src : sources) {
    if (src.kind == "char-lm") {
      stack.add(std::make_shared<CharLmEmbeddingProvider>(CharLmModel::load_file(src.path)),
                src);
    } else if (src.kind == "skipgram") {
      stack.add(std::make_shared<SkipgramEmbeddingProvider>(SkipgramModel::load_file(src.path)),
                src);
    } else if (src.kind == "word-vectors") {
      stack.add(
          std::make_shared<WordVectorEmbeddingProvider>(WordVectorTable::load_file(src.path)),
          src);
    } else {
      throw Error("unknown embedding source kind '" + src.kind + "'");
    }
  }
  if (stack.empty()) throw Error("embedding stack has no providers");
  return stack;
}

void EmbeddingStack::add(std::shared_ptr<const EmbeddingProvider> provider,
                         EmbeddingSource source) {
  providers_.push_back(std::move(provider));
  sources_.push_back(std::move(source));
}

int EmbeddingStack::total_dim() const {
  int total = 0;
  for (const auto& p : providers_) total += p->dim();
  return total;
}

std::vector<Vector> EmbeddingStack::embed(const std::u32string& sentence_text,
                                          const std::vector<corpus::Token>& tokens) const {
  return stack_embeddings(providers_, sentence_text, tokens);
}

}  // namespace seqtag::emb
