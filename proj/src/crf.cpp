#include "seqtag/crf.hpp"

#include <limits>

namespace seqtag::tagger {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

int LabelScheme::index_of(const corpus::IobesLabel& label) const {
  using corpus::IobesPrefix;
  switch (label.prefix) {
    case IobesPrefix::O: return kOutside;
    case IobesPrefix::B: return kBegin;
    case IobesPrefix::I: return kInside;
    case IobesPrefix::E: return kEnd;
    case IobesPrefix::S: return kSingle;
  }
  throw Error("unreachable IOBES prefix");
}

corpus::IobesLabel LabelScheme::label_of(int index) const {
  using corpus::IobesLabel;
  using corpus::IobesPrefix;
  switch (index) {
    case kOutside: return IobesLabel::outside();
    case kBegin: return IobesLabel::of(IobesPrefix::B, etype);
    case kInside: return IobesLabel::of(IobesPrefix::I, etype);
    case kEnd: return IobesLabel::of(IobesPrefix::E, etype);
    case kSingle: return IobesLabel::of(IobesPrefix::S, etype);
    default: throw Error("label index out of range: " + std::to_string(index));
  }
}

std::vector<std::string> LabelScheme::label_strings() const {
  std::vector<std::string> out;
  for (int i = 0; i < kNumLabels; ++i) out.push_back(corpus::to_string(label_of(i)));
  return out;
}

CrfParams CrfParams::zeros(int num_labels, int feature_dim) {
  CrfParams p;
  p.transitions = Matrix::Zero(num_labels + 2, num_labels + 2);
  p.emission_w = Matrix::Zero(num_labels, feature_dim);
  p.emission_b = Vector::Zero(num_labels);
  const int start = num_labels, stop = num_labels + 1;
  p.transitions.col(start).setConstant(kNegInf);
  p.transitions.row(stop).setConstant(kNegInf);
  return p;
}

CrfParams CrfParams::glorot(int num_labels, int feature_dim, num::Rng& rng) {
  CrfParams p = zeros(num_labels, feature_dim);
  const double bound = std::sqrt(6.0 / (num_labels + feature_dim));
  for (int r = 0; r < p.emission_w.rows(); ++r)
    for (int c = 0; c < p.emission_w.cols(); ++c)
      p.emission_w(r, c) = rng.uniform(-bound, bound);
  return p;
}

void CrfParams::apply_iobes_mask() {
  const int L = num_labels();
  if (L != LabelScheme::kNumLabels)
    throw Error("IOBES mask requires the 5-label scheme");
  const int start = LabelScheme::kStart, stop = LabelScheme::kStop;
  auto allowed = [&](int from, int to) {
    // Valid starts: O, B, S. Valid ends: O, E, S.
    if (from == start)
      return to == LabelScheme::kOutside || to == LabelScheme::kBegin ||
             to == LabelScheme::kSingle;
    if (to == stop)
      return from == LabelScheme::kOutside || from == LabelScheme::kEnd ||
             from == LabelScheme::kSingle;
    switch (from) {
      case LabelScheme::kOutside:
      case LabelScheme::kEnd:
      case LabelScheme::kSingle:
        return to == LabelScheme::kOutside || to == LabelScheme::kBegin ||
               to == LabelScheme::kSingle;
      case LabelScheme::kBegin:
      case LabelScheme::kInside:
        return to == LabelScheme::kInside || to == LabelScheme::kEnd;
      default:
        return false;
    }
  };
  std::vector<int> froms, tos;
  for (int i = 0; i < L; ++i) {
    froms.push_back(i);
    tos.push_back(i);
  }
  froms.push_back(start);
  tos.push_back(stop);
  for (int from : froms)
    for (int to : tos)
      if (!(from == start && to == stop) && !allowed(from, to))
        transitions(from, to) = kNegInf;
}

Matrix crf_emissions(const CrfParams& crf, const std::vector<Vector>& features) {
  Matrix emissions(static_cast<int>(features.size()), crf.num_labels());
  for (std::size_t t = 0; t < features.size(); ++t) {
    if (features[t].size() != crf.feature_dim())
      throw Error("crf_emissions: feature dimension mismatch");
    emissions.row(t) = (crf.emission_w * features[t] + crf.emission_b).transpose();
  }
  return emissions;
}

double crf_sequence_score(const CrfParams& crf, const Matrix& emissions,
                          const std::vector<int>& labels) {
  const int T = static_cast<int>(emissions.rows());
  const int L = crf.num_labels();
  if (static_cast<int>(labels.size()) != T)
    throw Error("crf_sequence_score: label count does not match sequence length");
  if (T == 0) throw Error("crf_sequence_score: empty sequence");
  for (int y : labels)
    if (y < 0 || y >= L) throw Error("crf_sequence_score: label out of range");

  const int start = L, stop = L + 1;
  double score = crf.transitions(start, labels[0]);
  for (int t = 0; t < T; ++t) {
    score += emissions(t, labels[t]);
    if (t + 1 < T) score += crf.transitions(labels[t], labels[t + 1]);
  }
  score += crf.transitions(labels[T - 1], stop);
  return score;
}

double crf_log_partition(const CrfParams& crf, const Matrix& emissions) {
  const int T = static_cast<int>(emissions.rows());
  const int L = crf.num_labels();
  if (T == 0) throw Error("crf_log_partition: empty sequence");
  const int start = L, stop = L + 1;

  Vector alpha = crf.transitions.row(start).head(L).transpose() + emissions.row(0).transpose();
  Vector scratch(L);
  for (int t = 1; t < T; ++t) {
    Vector next(L);
    for (int j = 0; j < L; ++j) {
      scratch = alpha + crf.transitions.col(j).head(L);
      next[j] = num::logsumexp(scratch) + emissions(t, j);
    }
    alpha = next;
  }
  scratch = alpha + crf.transitions.col(stop).head(L);
  return num::logsumexp(scratch);
}

double crf_nll_and_gradients(const CrfParams& crf, const Matrix& emissions,
                             const std::vector<int>& gold, CrfGradients& grads) {
  const int T = static_cast<int>(emissions.rows());
  const int L = crf.num_labels();
  if (static_cast<int>(gold.size()) != T)
    throw Error("crf_nll_and_gradients: gold labeling length mismatch");
  const int start = L, stop = L + 1;

  // Forward and backward tables in log space.
  Matrix alpha(T, L), beta(T, L);
  alpha.row(0) = crf.transitions.row(start).head(L) + emissions.row(0);
  Vector scratch(L);
  for (int t = 1; t < T; ++t) {
    for (int j = 0; j < L; ++j) {
      scratch = alpha.row(t - 1).transpose() + crf.transitions.col(j).head(L);
      alpha(t, j) = num::logsumexp(scratch) + emissions(t, j);
    }
  }
  beta.row(T - 1) = crf.transitions.col(stop).head(L).transpose();
  for (int t = T - 2; t >= 0; --t) {
    for (int i = 0; i < L; ++i) {
      scratch = crf.transitions.row(i).head(L).transpose() +
                emissions.row(t + 1).transpose() + beta.row(t + 1).transpose();
      beta(t, i) = num::logsumexp(scratch);
    }
  }
  scratch = alpha.row(T - 1).transpose() + crf.transitions.col(stop).head(L);
  const double log_z = num::logsumexp(scratch);

  const double gold_score = crf_sequence_score(crf, emissions, gold);
  const double loss = log_z - gold_score;

  grads.emissions = Matrix::Zero(T, L);
  grads.transitions = Matrix::Zero(L + 2, L + 2);

  // Unary marginals minus gold indicators.
  for (int t = 0; t < T; ++t) {
    for (int j = 0; j < L; ++j) {
      const double p = std::exp(alpha(t, j) + beta(t, j) - log_z);
      grads.emissions(t, j) = p - (gold[t] == j ? 1.0 : 0.0);
    }
  }
  // START row and STOP column.
  for (int j = 0; j < L; ++j) {
    const double p_start = std::exp(alpha(0, j) + beta(0, j) - log_z);
    grads.transitions(start, j) = p_start - (gold[0] == j ? 1.0 : 0.0);
    const double p_stop = std::exp(alpha(T - 1, j) + crf.transitions(j, stop) - log_z);
    grads.transitions(j, stop) = p_stop - (gold[T - 1] == j ? 1.0 : 0.0);
  }
  // Pairwise marginals minus gold transition counts.
  for (int t = 0; t + 1 < T; ++t) {
    for (int i = 0; i < L; ++i) {
      for (int j = 0; j < L; ++j) {
        const double log_p = alpha(t, i) + crf.transitions(i, j) + emissions(t + 1, j) +
                             beta(t + 1, j) - log_z;
        grads.transitions(i, j) += std::exp(log_p);
      }
    }
    grads.transitions(gold[t], gold[t + 1]) -= 1.0;
  }
  return loss;
}

ViterbiResult viterbi_decode(const CrfParams& crf, const Matrix& emissions) {
  const int T = static_cast<int>(emissions.rows());
  const int L = crf.num_labels();
  if (T == 0) throw Error("viterbi_decode: empty sequence");
  const int start = L, stop = L + 1;

  Matrix delta(T, L);
  Eigen::MatrixXi backptr(T, L);
  delta.row(0) = crf.transitions.row(start).head(L) + emissions.row(0);
  backptr.row(0).setConstant(-1);
  for (int t = 1; t < T; ++t) {
    for (int j = 0; j < L; ++j) {
      int best_i = 0;
      double best = delta(t - 1, 0) + crf.transitions(0, j);
      for (int i = 1; i < L; ++i) {
        const double cand = delta(t - 1, i) + crf.transitions(i, j);
        if (cand > best) {  // strict: ties keep the lowest label index
          best = cand;
          best_i = i;
        }
      }
      delta(t, j) = best + emissions(t, j);
      backptr(t, j) = best_i;
    }
  }
  int best_last = 0;
  double best_score = delta(T - 1, 0) + crf.transitions(0, stop);
  for (int j = 1; j < L; ++j) {
    const double cand = delta(T - 1, j) + crf.transitions(j, stop);
    if (cand > best_score) {
      best_score = cand;
      best_last = j;
    }
  }

  ViterbiResult result;
  result.score = best_score;
  result.labels.assign(T, 0);
  result.labels[T - 1] = best_last;
  for (int t = T - 1; t > 0; --t)
    result.labels[t - 1] = backptr(t, result.labels[t]);
  return result;
}

}  // namespace seqtag::tagger
