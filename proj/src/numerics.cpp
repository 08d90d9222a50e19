#include "seqtag/numerics.hpp"

#include <iostream>

namespace seqtag {

void emit_warning(Diag* diag, std::string msg) {
  if (diag) {
    diag->warn(std::move(msg));
  } else {
    std::cerr << "warning: " << msg << "\n";
  }
}

}  // namespace seqtag

namespace seqtag::num {

void check_finite(const Eigen::Ref<const Matrix>& m, const char* what) {
#ifndef NDEBUG
  if (!m.allFinite()) throw Error(std::string("non-finite values in ") + what);
#else
  (void)m;
  (void)what;
#endif
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  if (n == 0) throw Error("uniform_index: n must be positive");
  // Rejection sampling to avoid modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return x % n;
}

Rng Rng::child(std::string_view tag) const {
  std::uint64_t h = fnv1a(tag);
  h ^= seed_ + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return Rng(h);
}

double logsumexp(const Eigen::Ref<const Vector>& v) {
  if (v.size() == 0) throw Error("logsumexp: empty vector");
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;  // all -inf (or a +inf) dominates
  return m + std::log((v.array() - m).exp().sum());
}

void sgd_update(Eigen::Ref<Matrix> params, const Eigen::Ref<const Matrix>& grads, double lr) {
  if (params.rows() != grads.rows() || params.cols() != grads.cols())
    throw Error("sgd_update: shape mismatch");
  params -= lr * grads;
}

Vector dropout_mask(int size, double p, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw Error("dropout: p must be in [0, 1)");
  Vector mask(size);
  if (p == 0.0) {
    mask.setOnes();
    return mask;
  }
  const double scale = 1.0 / (1.0 - p);
  for (int i = 0; i < size; ++i) mask[i] = rng.uniform() < p ? 0.0 : scale;
  return mask;
}

Vector dropout_apply(const Eigen::Ref<const Vector>& v, double p, Rng& rng, bool training) {
  if (p < 0.0 || p >= 1.0) throw Error("dropout: p must be in [0, 1)");
  if (!training || p == 0.0) return v;
  return v.cwiseProduct(dropout_mask(static_cast<int>(v.size()), p, rng));
}

PlateauScheduler::PlateauScheduler(const SgdConfig& config)
    : config_(config), lr_(config.learning_rate) {
  if (config.learning_rate <= 0.0) throw Error("scheduler: learning_rate must be positive");
  if (config.anneal_factor <= 0.0 || config.anneal_factor >= 1.0)
    throw Error("scheduler: anneal_factor must be in (0, 1)");
  if (config.patience < 0) throw Error("scheduler: patience must be non-negative");
  if (config.min_lr <= 0.0) throw Error("scheduler: min_lr must be positive");
}

double PlateauScheduler::report(double metric, bool higher_is_better) {
  const bool improved =
      !has_best_ || (higher_is_better ? metric > best_ : metric < best_);
  last_improved_ = improved;
  if (improved) {
    best_ = metric;
    has_best_ = true;
    bad_count_ = 0;
    return lr_;
  }
  ++bad_count_;
  if (bad_count_ >= config_.patience) {
    lr_ = std::max(lr_ * config_.anneal_factor, config_.min_lr);
    bad_count_ = 0;
  }
  return lr_;
}

}  // namespace seqtag::num
