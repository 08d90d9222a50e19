#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "seqtag/common.hpp"

namespace seqtag::num {

// All learning code runs in f64; dense storage is Eigen's.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Debug-mode finiteness check, fatal on NaN/Inf.
void check_finite(const Eigen::Ref<const Matrix>& m, const char* what);

// FNV-1a 64-bit, used for rng child derivation and n-gram bucketing.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

// Deterministic 64-bit generator wrapping the standard mt19937_64, whose
// output the C++ standard pins bit-exactly. Uniform draws are derived
// from raw 64-bit output, not library distributions, so streams are
// reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next_u64() { return state_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), n > 0.
  std::uint64_t uniform_index(std::uint64_t n);

  // Child generator for a named component, seeded from this generator's
  // seed and the tag so components cannot perturb each other's streams.
  Rng child(std::string_view tag) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 state_;
};

// log(sum(exp(v))), max-shifted. Errors on empty input.
double logsumexp(const Eigen::Ref<const Vector>& v);

// w <- w - lr * g
void sgd_update(Eigen::Ref<Matrix> params, const Eigen::Ref<const Matrix>& grads, double lr);

// Inverted dropout: zero with probability p, scale survivors by 1/(1-p).
// Identity outside training. Requires 0 <= p < 1.
Vector dropout_apply(const Eigen::Ref<const Vector>& v, double p, Rng& rng, bool training);

// Dropout mask with the 1/(1-p) survivor scale baked in, so forward and
// backward passes can share it.
Vector dropout_mask(int size, double p, Rng& rng);

struct SgdConfig {
  double learning_rate = 0.1;
  double anneal_factor = 0.5;
  int patience = 3;
  double min_lr = 1e-4;
};

// Plateau-based learning-rate annealing: after `patience` consecutive
// reports without improvement the rate is multiplied by anneal_factor and
// the counter resets; the rate never drops below min_lr.
class PlateauScheduler {
 public:
  explicit PlateauScheduler(const SgdConfig& config);

  // Reports a metric; returns the (possibly annealed) learning rate.
  double report(double metric, bool higher_is_better);

  double lr() const { return lr_; }
  bool last_improved() const { return last_improved_; }

 private:
  SgdConfig config_;
  double lr_;
  bool has_best_ = false;
  double best_ = 0.0;
  int bad_count_ = 0;
  bool last_improved_ = false;
};

}  // namespace seqtag::num
