#include "seqtag/char_lm.hpp"

#include <algorithm>
#include <map>

#include "seqtag/model_io.hpp"
#include "seqtag/numerics.hpp"
#include "seqtag/utf8.hpp"

namespace seqtag::emb {

CharVocab CharVocab::build(const std::u32string& text, std::size_t min_freq) {
  std::map<char32_t, std::size_t> counts;
  for (char32_t c : text) ++counts[c];
  CharVocab vocab;
  for (const auto& [c, n] : counts)
    if (n >= min_freq) vocab.chars_.push_back(c);
  std::sort(vocab.chars_.begin(), vocab.chars_.end());
  for (std::size_t i = 0; i < vocab.chars_.size(); ++i)
    vocab.index_[vocab.chars_[i]] = static_cast<int>(i) + kNumReserved;
  return vocab;
}

CharVocab CharVocab::from_chars(const std::vector<char32_t>& chars) {
  CharVocab vocab;
  vocab.chars_ = chars;
  std::sort(vocab.chars_.begin(), vocab.chars_.end());
  vocab.chars_.erase(std::unique(vocab.chars_.begin(), vocab.chars_.end()),
                     vocab.chars_.end());
  for (std::size_t i = 0; i < vocab.chars_.size(); ++i)
    vocab.index_[vocab.chars_[i]] = static_cast<int>(i) + kNumReserved;
  return vocab;
}

int CharVocab::encode(char32_t c) const {
  const auto it = index_.find(c);
  return it == index_.end() ? kUnk : it->second;
}

char32_t CharVocab::decode(int index) const {
  if (index < kNumReserved || index >= size())
    throw Error("char index out of vocabulary: " + std::to_string(index));
  return chars_[static_cast<std::size_t>(index - kNumReserved)];
}

std::string to_string(LmDirection d) {
  return d == LmDirection::Forward ? "forward" : "backward";
}

LmDirection lm_direction_from_string(const std::string& s) {
  if (s == "forward") return LmDirection::Forward;
  if (s == "backward") return LmDirection::Backward;
  throw Error("unknown LM direction: '" + s + "'");
}

CharLmConfig char_lm_paper_preset() {
  CharLmConfig config;
  config.hidden = 2048;
  config.embed_dim = 100;
  config.seq_len = 300;
  config.batch_size = 256;
  config.n_splits = 1500;
  config.patience = 100;
  return config;
}

Vector CharLmModel::next_char_log_probs(const Vector& hidden) const {
  Vector logits = projection * hidden;
  return logits.array() - num::logsumexp(logits);
}

namespace {

struct LmGrads {
  Matrix embedding;
  num::LstmGrads cell;
  Matrix projection;

  static LmGrads zeros_like(const CharLmModel& m) {
    LmGrads g;
    g.embedding = Matrix::Zero(m.embedding.rows(), m.embedding.cols());
    g.cell = num::LstmGrads::zeros_like(m.cell);
    g.projection = Matrix::Zero(m.projection.rows(), m.projection.cols());
    return g;
  }

  double squared_norm() const {
    return embedding.squaredNorm() + cell.W.squaredNorm() + cell.U.squaredNorm() +
           cell.b.squaredNorm() + projection.squaredNorm();
  }

  void scale(double s) {
    embedding *= s;
    cell.scale(s);
    projection *= s;
  }
};

void apply_sgd(CharLmModel& model, const LmGrads& grads, double lr) {
  model.embedding -= lr * grads.embedding;
  model.cell.W -= lr * grads.cell.W;
  model.cell.U -= lr * grads.cell.U;
  model.cell.b -= lr * grads.cell.b;
  model.projection -= lr * grads.projection;
}

// One stream of encoded characters: inputs start with BOS so the first
// real character is predicted too.
struct Stream {
  std::vector<int> inputs;
  std::vector<int> targets;
  Vector h, c;
};

// Forward/backward over one TBPTT window; returns summed cross-entropy
// over the window's positions and accumulates gradients (each position
// weighted by `weight`).
double train_window(CharLmModel& model, Stream& stream, std::size_t begin, std::size_t end,
                    double weight, LmGrads& grads) {
  const std::size_t count = end - begin;
  std::vector<num::LstmStepCache> caches(count);
  std::vector<Vector> hidden(count);
  std::vector<Vector> dlogits(count);

  double loss_sum = 0.0;
  Vector h = stream.h, c = stream.c;
  for (std::size_t k = 0; k < count; ++k) {
    const int input = stream.inputs[begin + k];
    const int target = stream.targets[begin + k];
    const Vector x = model.embedding.row(input).transpose();
    auto out = num::lstm_cell_step(model.cell, x, h, c, &caches[k]);
    h = out.h;
    c = out.c;
    hidden[k] = h;
    Vector logits = model.projection * h;
    const double lse = num::logsumexp(logits);
    loss_sum += lse - logits[target];
    Vector probs = (logits.array() - lse).exp();
    probs[target] -= 1.0;
    dlogits[k] = probs * weight;
  }
  stream.h = h;  // carried, detached
  stream.c = c;

  Vector dh = Vector::Zero(model.hidden_dim());
  Vector dc = Vector::Zero(model.hidden_dim());
  for (std::size_t k = count; k-- > 0;) {
    grads.projection.noalias() += dlogits[k] * hidden[k].transpose();
    dh += model.projection.transpose() * dlogits[k];
    auto back = num::lstm_cell_backward(model.cell, caches[k], dh, dc, grads.cell);
    grads.embedding.row(stream.inputs[begin + k]) += back.grad_x.transpose();
    dh = back.grad_h_prev;
    dc = back.grad_c_prev;
  }
  return loss_sum;
}

}  // namespace

double char_lm_loss(const CharLmModel& model, const std::u32string& text) {
  if (text.empty()) throw Error("char_lm_loss: empty text");
  std::u32string chars(text);
  if (model.direction == LmDirection::Backward)
    std::reverse(chars.begin(), chars.end());

  Vector h = Vector::Zero(model.hidden_dim());
  Vector c = Vector::Zero(model.hidden_dim());
  double loss = 0.0;
  int prev = CharVocab::kBos;
  for (char32_t ch : chars) {
    const Vector x = model.embedding.row(prev).transpose();
    auto out = num::lstm_cell_step(model.cell, x, h, c);
    h = out.h;
    c = out.c;
    Vector logits = model.projection * h;
    const int target = model.vocab.encode(ch);
    loss += num::logsumexp(logits) - logits[target];
    prev = target;
  }
  return loss / static_cast<double>(chars.size());
}

CharLmModel train_char_lm(const std::string& corpus_text, LmDirection direction,
                          const CharLmConfig& config, num::Rng& rng,
                          CharLmTrainReport* report) {
  std::u32string chars = utf8::decode(corpus_text);
  if (chars.empty()) throw Error("train_char_lm: empty corpus");
  if (direction == LmDirection::Backward) std::reverse(chars.begin(), chars.end());

  CharLmModel model;
  model.direction = direction;
  model.vocab = CharVocab::build(chars, config.min_char_freq);
  if (model.vocab.size() <= CharVocab::kNumReserved + 1)
    throw Error("train_char_lm: degenerate character vocabulary");

  const int V = model.vocab.size();
  num::Rng init_rng = rng.child("char-lm-init");
  const double emb_bound = std::sqrt(6.0 / (V + config.embed_dim));
  model.embedding = Matrix::Zero(V, config.embed_dim);
  for (int r = 0; r < V; ++r)
    for (int cc = 0; cc < config.embed_dim; ++cc)
      model.embedding(r, cc) = init_rng.uniform(-emb_bound, emb_bound);
  model.cell = num::LstmCellParams::glorot(config.embed_dim, config.hidden, init_rng);
  const double proj_bound = std::sqrt(6.0 / (V + config.hidden));
  model.projection = Matrix::Zero(V, config.hidden);
  for (int r = 0; r < V; ++r)
    for (int cc = 0; cc < config.hidden; ++cc)
      model.projection(r, cc) = init_rng.uniform(-proj_bound, proj_bound);

  if (config.n_splits < 2)
    throw Error("train_char_lm: need at least 2 splits (one is held out)");
  const std::size_t split_len = chars.size() / static_cast<std::size_t>(config.n_splits);
  if (split_len < 4) throw Error("train_char_lm: corpus too small for the split count");
  const int n_train_splits = config.n_splits - 1;
  const std::u32string validation_text =
      chars.substr(static_cast<std::size_t>(n_train_splits) * split_len);

  num::PlateauScheduler scheduler(
      {config.lr, config.anneal_factor, config.patience, config.min_lr});
  double lr = config.lr;
  CharLmTrainReport local_report;

  for (int pass = 0; pass < config.passes; ++pass) {
    for (int split = 0; split < n_train_splits; ++split) {
      const std::u32string split_text = chars.substr(
          static_cast<std::size_t>(split) * split_len, split_len);

      // Carve the split into batch_size parallel streams.
      const std::size_t per_stream =
          std::max<std::size_t>(2, split_text.size() / config.batch_size);
      std::vector<Stream> streams;
      for (std::size_t pos = 0; pos + 2 <= split_text.size(); pos += per_stream) {
        const std::size_t len = std::min(per_stream, split_text.size() - pos);
        if (len < 2) break;
        Stream s;
        s.inputs.push_back(CharVocab::kBos);
        for (std::size_t i = 0; i + 1 < len; ++i)
          s.inputs.push_back(model.vocab.encode(split_text[pos + i]));
        for (std::size_t i = 0; i < len; ++i)
          s.targets.push_back(model.vocab.encode(split_text[pos + i]));
        s.h = Vector::Zero(config.hidden);
        s.c = Vector::Zero(config.hidden);
        streams.push_back(std::move(s));
      }

      const std::size_t stream_len = streams.front().targets.size();
      for (std::size_t window = 0; window < stream_len;
           window += static_cast<std::size_t>(config.seq_len)) {
        LmGrads grads = LmGrads::zeros_like(model);
        std::size_t total_positions = 0;
        for (Stream& s : streams)
          total_positions +=
              std::min<std::size_t>(config.seq_len, s.targets.size() - std::min(window, s.targets.size()));
        if (total_positions == 0) continue;
        const double weight = 1.0 / static_cast<double>(total_positions);
        for (Stream& s : streams) {
          if (window >= s.targets.size()) continue;
          const std::size_t end =
              std::min(s.targets.size(), window + static_cast<std::size_t>(config.seq_len));
          train_window(model, s, window, end, weight, grads);
        }
        grads.scale(weight);
        if (config.clip_norm > 0.0) {
          const double norm = std::sqrt(grads.squared_norm());
          if (norm > config.clip_norm) grads.scale(config.clip_norm / norm);
        }
        apply_sgd(model, grads, lr);
      }

      const double val_loss = char_lm_loss(model, validation_text);
      lr = scheduler.report(val_loss, /*higher_is_better=*/false);
      local_report.validation_losses.push_back(val_loss);
    }
  }

  local_report.best_validation_loss =
      local_report.validation_losses.empty()
          ? 0.0
          : *std::min_element(local_report.validation_losses.begin(),
                              local_report.validation_losses.end());
  if (report) *report = local_report;
  return model;
}

Matrix char_lm_hidden_states(const CharLmModel& model, const std::u32string& chars) {
  const int H = model.hidden_dim();
  Matrix states(static_cast<Eigen::Index>(chars.size()) + 1, H);
  Vector h = Vector::Zero(H), c = Vector::Zero(H);
  int input = CharVocab::kBos;
  for (std::size_t i = 0; i <= chars.size(); ++i) {
    const Vector x = model.embedding.row(input).transpose();
    auto out = num::lstm_cell_step(model.cell, x, h, c);
    h = out.h;
    c = out.c;
    states.row(static_cast<Eigen::Index>(i)) = h.transpose();
    if (i < chars.size()) input = model.vocab.encode(chars[i]);
  }
  return states;
}

std::vector<Vector> extract_flair_embeddings(const CharLmModel& fwd, const CharLmModel& bwd,
                                             const std::u32string& sentence_text,
                                             const std::vector<corpus::Token>& tokens) {
  if (fwd.direction != LmDirection::Forward || bwd.direction != LmDirection::Backward)
    throw Error("extract_flair_embeddings: models passed in the wrong direction order");
  const std::size_t n = sentence_text.size();
  for (const corpus::Token& t : tokens)
    if (t.start >= t.end || t.end > n)
      throw Error("extract_flair_embeddings: token offsets outside sentence");

  const Matrix fwd_states = char_lm_hidden_states(fwd, sentence_text);
  std::u32string reversed(sentence_text);
  std::reverse(reversed.begin(), reversed.end());
  const Matrix bwd_states = char_lm_hidden_states(bwd, reversed);

  std::vector<Vector> out;
  out.reserve(tokens.size());
  for (const corpus::Token& t : tokens) {
    Vector v(fwd.hidden_dim() + bwd.hidden_dim());
    // Forward state after the token's last character; backward state
    // after the token's first character, consumed in reversed order.
    v << fwd_states.row(static_cast<Eigen::Index>(t.end)).transpose(),
        bwd_states.row(static_cast<Eigen::Index>(n - t.start)).transpose();
    out.push_back(std::move(v));
  }
  return out;
}

void CharLmModel::save_file(const std::string& path) const {
  io::ModelWriter writer("char-lm");
  writer.meta()["direction"] = to_string(direction);
  writer.meta()["hidden"] = hidden_dim();
  writer.meta()["embed_dim"] = embedding.cols();
  nlohmann::ordered_json vocab_chars = nlohmann::ordered_json::array();
  for (char32_t c : vocab.chars()) vocab_chars.push_back(static_cast<std::uint32_t>(c));
  writer.meta()["vocab"] = std::move(vocab_chars);
  writer.add_block("embedding", embedding);
  writer.add_block("lstm_w", cell.W);
  writer.add_block("lstm_u", cell.U);
  writer.add_block("lstm_b", cell.b);
  writer.add_block("projection", projection);
  writer.save_file(path);
}

CharLmModel CharLmModel::load_file(const std::string& path) {
  std::string buffer;
  io::ModelReader reader = io::ModelReader::open(path, &buffer);
  if (reader.model_type() != "char-lm")
    throw Error(path + " is not a char-lm model (type '" + reader.model_type() + "')");
  CharLmModel model;
  model.direction = lm_direction_from_string(reader.meta().at("direction").get<std::string>());
  std::vector<char32_t> chars;
  for (const auto& c : reader.meta().at("vocab"))
    chars.push_back(static_cast<char32_t>(c.get<std::uint32_t>()));
  model.vocab = CharVocab::from_chars(chars);
  model.embedding = reader.matrix("embedding");
  model.cell.W = reader.matrix("lstm_w");
  model.cell.U = reader.matrix("lstm_u");
  model.cell.b = reader.vector("lstm_b");
  model.projection = reader.matrix("projection");
  return model;
}

}  // namespace seqtag::emb
