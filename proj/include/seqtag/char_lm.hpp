#pragma once

#include <map>
#include <string>
#include <vector>

#include "seqtag/document.hpp"
#include "seqtag/lstm.hpp"

namespace seqtag::emb {

using num::Matrix;
using num::Vector;

// Character inventory with reserved UNK/BOS/EOS entries at indices 0-2,
// then all characters meeting the frequency floor, ordered by codepoint.
class CharVocab {
 public:
  static constexpr int kUnk = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kNumReserved = 3;

  CharVocab() = default;
  static CharVocab build(const std::u32string& text, std::size_t min_freq = 5);
  static CharVocab from_chars(const std::vector<char32_t>& chars);

  int size() const { return static_cast<int>(chars_.size()) + kNumReserved; }
  int encode(char32_t c) const;
  char32_t decode(int index) const;
  const std::vector<char32_t>& chars() const { return chars_; }

 private:
  std::vector<char32_t> chars_;            // sorted by codepoint
  std::map<char32_t, int> index_;
};

enum class LmDirection { Forward, Backward };

std::string to_string(LmDirection d);
LmDirection lm_direction_from_string(const std::string& s);

struct CharLmConfig {
  int hidden = 64;
  int embed_dim = 16;
  int seq_len = 50;
  int batch_size = 8;
  int n_splits = 6;      // last split is held out for validation
  int passes = 1;        // passes over the training splits
  double lr = 1.0;
  double anneal_factor = 0.5;
  int patience = 100;    // split-wise, counted in validation reports
  double min_lr = 1e-4;
  double clip_norm = 5.0;
  std::size_t min_char_freq = 5;
};

// Paper-scale preset (hidden 2048, sequence length 300, batch 256,
// split-wise patience 100 over 1500 splits). Not a test target.
CharLmConfig char_lm_paper_preset();

struct CharLmModel {
  LmDirection direction = LmDirection::Forward;
  CharVocab vocab;
  Matrix embedding;  // V x E
  num::LstmCellParams cell;
  Matrix projection;  // V x H, no bias: zero weights give a uniform LM

  int hidden_dim() const { return cell.hidden_dim(); }

  // Per-character log-probabilities for the next character (length V,
  // sums to one in probability space).
  Vector next_char_log_probs(const Vector& hidden) const;

  void save_file(const std::string& path) const;
  static CharLmModel load_file(const std::string& path);
};

struct CharLmTrainReport {
  std::vector<double> validation_losses;  // nats/char after each training split
  double best_validation_loss = 0.0;
};

// Trains a next-character LM with truncated backpropagation windows of
// seq_len; hidden state carries across windows within a split. The
// backward direction trains on reversed text. Returns per-split
// validation losses alongside the model.
CharLmModel train_char_lm(const std::string& corpus_text, LmDirection direction,
                          const CharLmConfig& config, num::Rng& rng,
                          CharLmTrainReport* report = nullptr);

// Mean next-character cross-entropy (nats/char) of the model on `text`,
// evaluated in the model's direction.
double char_lm_loss(const CharLmModel& model, const std::u32string& text);

// Hidden states after consuming BOS then each character: row i is the
// state after char i (row 0 is the post-BOS state offset by one, so the
// returned matrix has text.size()+1 rows with row 0 = state after BOS).
Matrix char_lm_hidden_states(const CharLmModel& model, const std::u32string& chars);

// Contextual string embeddings: per token, the forward model's hidden
// state after the token's last character concatenated with the backward
// model's hidden state after consuming (in reversed order) the token's
// first character. Token offsets are relative to sentence_text.
std::vector<Vector> extract_flair_embeddings(const CharLmModel& fwd, const CharLmModel& bwd,
                                             const std::u32string& sentence_text,
                                             const std::vector<corpus::Token>& tokens);

}  // namespace seqtag::emb
