#include "seqtag/skipgram.hpp"

#include <algorithm>

#include "seqtag/model_io.hpp"
#include "seqtag/utf8.hpp"

namespace seqtag::emb {

SkipgramModel::SkipgramModel(std::vector<std::string> vocab_words,
                             std::vector<std::size_t> counts, const SkipgramConfig& config,
                             num::Rng& rng)
    : config_(config), words_(std::move(vocab_words)), counts_(std::move(counts)) {
  if (words_.size() != counts_.size())
    throw Error("skipgram: vocabulary and counts disagree");
  for (std::size_t i = 0; i < words_.size(); ++i) index_[words_[i]] = static_cast<int>(i);
  const Eigen::Index rows = static_cast<Eigen::Index>(words_.size()) + config_.buckets;
  // fastText-style init: small uniform input vectors, zero outputs.
  num::Rng init = rng.child("skipgram-init");
  const double bound = 1.0 / config_.dim;
  input_ = Matrix::Zero(rows, config_.dim);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (int c = 0; c < config_.dim; ++c) input_(r, c) = init.uniform(-bound, bound);
  output_ = Matrix::Zero(static_cast<Eigen::Index>(words_.size()), config_.dim);
}

int SkipgramModel::word_index(const std::string& word) const {
  const auto it = index_.find(word);
  return it == index_.end() ? -1 : it->second;
}

std::vector<int> SkipgramModel::subword_rows(const std::string& word) const {
  const std::u32string padded = U"<" + utf8::decode(word) + U">";
  std::vector<int> rows;
  const int n_chars = static_cast<int>(padded.size());
  for (int n = config_.ngram_min; n <= config_.ngram_max; ++n) {
    for (int start = 0; start + n <= n_chars; ++start) {
      const std::string gram = utf8::encode(padded.substr(start, n));
      const auto bucket =
          num::fnv1a(gram) % static_cast<std::uint64_t>(config_.buckets);
      rows.push_back(static_cast<int>(words_.size() + bucket));
    }
  }
  return rows;
}

std::vector<int> SkipgramModel::input_rows(const std::string& word) const {
  std::vector<int> rows;
  const int idx = word_index(word);
  if (idx >= 0) rows.push_back(idx);
  const std::vector<int> grams = subword_rows(word);
  rows.insert(rows.end(), grams.begin(), grams.end());
  if (rows.empty())
    throw Error("skipgram: word '" + word + "' has no vector components");
  return rows;
}

Vector SkipgramModel::word_vector(const std::string& word) const {
  if (word.empty()) throw Error("skipgram: empty word");
  const std::vector<int> rows = input_rows(word);
  Vector v = Vector::Zero(config_.dim);
  for (int r : rows) v += input_.row(r).transpose();
  return v / static_cast<double>(rows.size());
}

namespace {

double log_sigmoid(double x) {
  // log(sigmoid(x)) = -log(1 + exp(-x)), stable in both tails.
  if (x > 0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

}  // namespace

double skipgram_pair_loss(const SkipgramModel& model, const std::string& center,
                          int context_row, const std::vector<int>& negative_rows) {
  const Vector v = model.word_vector(center);
  double loss = -log_sigmoid(model.output_vectors().row(context_row).dot(v));
  for (int neg : negative_rows)
    loss -= log_sigmoid(-model.output_vectors().row(neg).dot(v));
  return loss;
}

double skipgram_pair_loss_and_grads(const SkipgramModel& model, const std::string& center,
                                    int context_row, const std::vector<int>& negative_rows,
                                    std::vector<std::pair<int, Vector>>& input_grads,
                                    std::vector<std::pair<int, Vector>>& output_grads) {
  const std::vector<int> rows = model.input_rows(center);
  Vector v = Vector::Zero(model.dim());
  for (int r : rows) v += model.input_vectors().row(r).transpose();
  v /= static_cast<double>(rows.size());

  double loss = 0.0;
  Vector dv = Vector::Zero(model.dim());
  auto accumulate = [&](int row, double sign) {
    const Vector u = model.output_vectors().row(row).transpose();
    const double score = sign * u.dot(v);
    loss -= log_sigmoid(score);
    // d/dscore of -log sigmoid(score) = sigmoid(score) - 1
    const double d_score = (num::sigmoid(score) - 1.0) * sign;
    dv += d_score * u;
    output_grads.emplace_back(row, d_score * v);
  };
  accumulate(context_row, +1.0);
  for (int neg : negative_rows) accumulate(neg, -1.0);

  const Vector per_row = dv / static_cast<double>(rows.size());
  for (int r : rows) input_grads.emplace_back(r, per_row);
  return loss;
}

SkipgramModel train_skipgram(const std::vector<std::vector<std::string>>& sentences,
                             const SkipgramConfig& config, num::Rng& rng) {
  // Vocabulary: words at or above min_count, ordered by count then word.
  std::map<std::string, std::size_t> freq;
  std::size_t total_tokens = 0;
  for (const auto& sent : sentences)
    for (const auto& w : sent) {
      ++freq[w];
      ++total_tokens;
    }
  if (total_tokens < 2) throw Error("train_skipgram: corpus smaller than one window");
  std::vector<std::pair<std::string, std::size_t>> entries;
  for (const auto& [w, n] : freq)
    if (n >= config.min_count) entries.emplace_back(w, n);
  if (entries.empty()) throw Error("train_skipgram: vocabulary is empty at this min_count");
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> words;
  std::vector<std::size_t> counts;
  for (auto& [w, n] : entries) {
    words.push_back(w);
    counts.push_back(n);
  }

  SkipgramModel model(std::move(words), std::move(counts), config, rng);

  // Unigram^(3/4) negative-sampling distribution as a cumulative table.
  std::vector<double> cumulative(model.vocab().size());
  double acc = 0.0;
  for (std::size_t i = 0; i < model.vocab().size(); ++i) {
    acc += std::pow(static_cast<double>(model.counts()[i]), 0.75);
    cumulative[i] = acc;
  }
  num::Rng train_rng = rng.child("skipgram-train");
  auto sample_negative = [&]() {
    const double r = train_rng.uniform() * acc;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    return static_cast<int>(std::min<std::size_t>(it - cumulative.begin(),
                                                  cumulative.size() - 1));
  };

  std::vector<std::pair<int, Vector>> input_grads, output_grads;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& sent : sentences) {
      for (std::size_t center = 0; center < sent.size(); ++center) {
        if (config.subsample > 0.0) {
          const auto fit = freq.find(sent[center]);
          const double f = static_cast<double>(fit->second) / total_tokens;
          const double keep = std::sqrt(config.subsample / f) + config.subsample / f;
          if (train_rng.uniform() > keep) continue;
        }
        // word2vec-style random window shrink.
        const std::size_t w =
            1 + train_rng.uniform_index(static_cast<std::uint64_t>(config.window));
        const std::size_t lo = center >= w ? center - w : 0;
        const std::size_t hi = std::min(sent.size() - 1, center + w);
        for (std::size_t ctx = lo; ctx <= hi; ++ctx) {
          if (ctx == center) continue;
          const int context_row = model.word_index(sent[ctx]);
          if (context_row < 0) continue;
          std::vector<int> negatives;
          for (int k = 0; k < config.negatives; ++k) {
            const int neg = sample_negative();
            if (neg == context_row) continue;  // word2vec skips clashing draws
            negatives.push_back(neg);
          }
          input_grads.clear();
          output_grads.clear();
          skipgram_pair_loss_and_grads(model, sent[center], context_row, negatives,
                                       input_grads, output_grads);
          for (const auto& [row, g] : input_grads)
            model.input_vectors().row(row) -= config.lr * g.transpose();
          for (const auto& [row, g] : output_grads)
            model.output_vectors().row(row) -= config.lr * g.transpose();
        }
      }
    }
  }
  return model;
}

double cosine_similarity(const Vector& a, const Vector& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

void SkipgramModel::save_file(const std::string& path) const {
  io::ModelWriter writer("skipgram");
  writer.meta()["dim"] = config_.dim;
  writer.meta()["ngram_min"] = config_.ngram_min;
  writer.meta()["ngram_max"] = config_.ngram_max;
  writer.meta()["buckets"] = config_.buckets;
  writer.meta()["negatives"] = config_.negatives;
  nlohmann::ordered_json vocab = nlohmann::ordered_json::array();
  nlohmann::ordered_json counts = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < words_.size(); ++i) {
    vocab.push_back(words_[i]);
    counts.push_back(counts_[i]);
  }
  writer.meta()["vocab"] = std::move(vocab);
  writer.meta()["counts"] = std::move(counts);
  writer.add_block("input", input_);
  writer.add_block("output", output_);
  writer.save_file(path);
}

SkipgramModel SkipgramModel::load_file(const std::string& path) {
  std::string buffer;
  io::ModelReader reader = io::ModelReader::open(path, &buffer);
  if (reader.model_type() != "skipgram")
    throw Error(path + " is not a skipgram model (type '" + reader.model_type() + "')");
  SkipgramModel model;
  model.config_.dim = reader.meta().at("dim").get<int>();
  model.config_.ngram_min = reader.meta().at("ngram_min").get<int>();
  model.config_.ngram_max = reader.meta().at("ngram_max").get<int>();
  model.config_.buckets = reader.meta().at("buckets").get<int>();
  model.config_.negatives = reader.meta().at("negatives").get<int>();
  for (const auto& w : reader.meta().at("vocab"))
    model.words_.push_back(w.get<std::string>());
  for (const auto& c : reader.meta().at("counts"))
    model.counts_.push_back(c.get<std::size_t>());
  for (std::size_t i = 0; i < model.words_.size(); ++i)
    model.index_[model.words_[i]] = static_cast<int>(i);
  model.input_ = reader.matrix("input");
  model.output_ = reader.matrix("output");
  return model;
}

}  // namespace seqtag::emb
