#pragma once

#include <vector>

#include "seqtag/document.hpp"
#include "seqtag/iobes.hpp"
#include "seqtag/numerics.hpp"

namespace seqtag::tagger {

using num::Matrix;
using num::Vector;

// Label indices for one entity type: the five real IOBES labels plus the
// virtual START/STOP states used only in transitions.
struct LabelScheme {
  corpus::EntityType etype = corpus::EntityType::Gene;

  static constexpr int kOutside = 0;
  static constexpr int kBegin = 1;
  static constexpr int kInside = 2;
  static constexpr int kEnd = 3;
  static constexpr int kSingle = 4;
  static constexpr int kNumLabels = 5;
  static constexpr int kStart = 5;
  static constexpr int kStop = 6;

  int index_of(const corpus::IobesLabel& label) const;
  corpus::IobesLabel label_of(int index) const;
  std::vector<std::string> label_strings() const;
};

// Linear-chain CRF on top of BiLSTM features. Transitions are a
// (L+2)x(L+2) matrix indexed (from, to); the START row and STOP column
// participate in scoring, transitions into START and out of STOP are
// -inf by construction and never read.
struct CrfParams {
  Matrix transitions;  // (L+2) x (L+2)
  Matrix emission_w;   // L x feature_dim
  Vector emission_b;   // L

  int num_labels() const { return static_cast<int>(emission_w.rows()); }
  int feature_dim() const { return static_cast<int>(emission_w.cols()); }

  static CrfParams zeros(int num_labels, int feature_dim);
  static CrfParams glorot(int num_labels, int feature_dim, num::Rng& rng);

  // Sets transitions that violate the IOBES grammar to -inf (optional
  // hard mask; by default all real-label transitions are learnable).
  void apply_iobes_mask();
};

// Emission scores for a sentence: row t holds the per-label scores of
// token t (T x L).
Matrix crf_emissions(const CrfParams& crf, const std::vector<Vector>& features);

double crf_sequence_score(const CrfParams& crf, const Matrix& emissions,
                          const std::vector<int>& labels);

// Log partition via the forward algorithm in log space.
double crf_log_partition(const CrfParams& crf, const Matrix& emissions);

struct CrfGradients {
  Matrix emissions;    // T x L, dLoss/d emissions
  Matrix transitions;  // (L+2) x (L+2)
};

// Negative log-likelihood of the gold labeling plus exact gradients via
// forward-backward marginals.
double crf_nll_and_gradients(const CrfParams& crf, const Matrix& emissions,
                             const std::vector<int>& gold, CrfGradients& grads);

struct ViterbiResult {
  std::vector<int> labels;
  double score = 0.0;
};

// Argmax labeling; ties break toward the lowest label index.
ViterbiResult viterbi_decode(const CrfParams& crf, const Matrix& emissions);

}  // namespace seqtag::tagger
