#pragma once

#include <map>
#include <string>
#include <vector>

#include "seqtag/numerics.hpp"

namespace seqtag::emb {

using num::Matrix;
using num::Vector;

struct SkipgramConfig {
  int dim = 200;
  int window = 5;
  int negatives = 10;
  int epochs = 5;
  double lr = 0.05;
  std::size_t min_count = 1;
  int ngram_min = 3;
  int ngram_max = 6;
  int buckets = 1 << 18;
  double subsample = 0.0;  // word2vec-style threshold; 0 disables
};

// Subword skip-gram with negative sampling. A word's input vector is the
// mean of its own vector and its hashed character n-gram vectors, so
// out-of-vocabulary words still embed through their n-grams.
class SkipgramModel {
 public:
  SkipgramModel() = default;
  SkipgramModel(std::vector<std::string> vocab_words, std::vector<std::size_t> counts,
                const SkipgramConfig& config, num::Rng& rng);

  int dim() const { return config_.dim; }
  const SkipgramConfig& config() const { return config_; }
  const std::vector<std::string>& vocab() const { return words_; }
  const std::vector<std::size_t>& counts() const { return counts_; }

  int word_index(const std::string& word) const;  // -1 when absent

  // Hashed n-gram rows (offset past the word table) for "<word>".
  std::vector<int> subword_rows(const std::string& word) const;
  // Word row (if in vocabulary) plus n-gram rows.
  std::vector<int> input_rows(const std::string& word) const;

  // Mean of the word's input rows; defined for any non-empty word.
  Vector word_vector(const std::string& word) const;

  Matrix& input_vectors() { return input_; }
  const Matrix& input_vectors() const { return input_; }
  Matrix& output_vectors() { return output_; }
  const Matrix& output_vectors() const { return output_; }

  void save_file(const std::string& path) const;
  static SkipgramModel load_file(const std::string& path);

 private:
  SkipgramConfig config_;
  std::vector<std::string> words_;
  std::vector<std::size_t> counts_;
  std::map<std::string, int> index_;
  Matrix input_;   // (|vocab| + buckets) x dim
  Matrix output_;  // |vocab| x dim

  friend SkipgramModel train_skipgram(const std::vector<std::vector<std::string>>&,
                                      const SkipgramConfig&, num::Rng&);
};

// Negative-sampling loss for one (center, context) pair: the center's
// composed vector against the context's output vector and k sampled
// negatives. With all-zero parameters this is (1 + negatives) * ln 2.
double skipgram_pair_loss(const SkipgramModel& model, const std::string& center,
                          int context_row, const std::vector<int>& negative_rows);

// Loss plus gradients, as (row -> gradient) sparse updates for the input
// and output tables.
double skipgram_pair_loss_and_grads(const SkipgramModel& model, const std::string& center,
                                    int context_row, const std::vector<int>& negative_rows,
                                    std::vector<std::pair<int, Vector>>& input_grads,
                                    std::vector<std::pair<int, Vector>>& output_grads);

// Trains on tokenized sentences. Deterministic given the rng.
SkipgramModel train_skipgram(const std::vector<std::vector<std::string>>& sentences,
                             const SkipgramConfig& config, num::Rng& rng);

double cosine_similarity(const Vector& a, const Vector& b);

}  // namespace seqtag::emb
