#pragma once

#include <vector>

#include "seqtag/lstm.hpp"

namespace seqtag::tagger {

using num::LstmCellParams;
using num::LstmGrads;
using num::Matrix;
using num::Vector;

struct BiLstmParams {
  LstmCellParams forward;
  LstmCellParams backward;

  int input_dim() const { return forward.input_dim(); }
  int hidden_dim() const { return forward.hidden_dim(); }
  int output_dim() const { return forward.hidden_dim() + backward.hidden_dim(); }

  static BiLstmParams glorot(int input_dim, int hidden_dim, num::Rng& rng);
};

struct BiLstmGrads {
  LstmGrads forward;
  LstmGrads backward;

  static BiLstmGrads zeros_like(const BiLstmParams& p);
  void accumulate(const BiLstmGrads& other);
  void scale(double s);
};

// Caches both unrolled directions plus the dropout masks applied to the
// inputs and outputs, so the backward pass can replay them.
struct BiLstmCache {
  std::vector<num::LstmStepCache> fwd_steps;
  std::vector<num::LstmStepCache> bwd_steps;  // indexed in reversed time
  std::vector<Vector> dropped_inputs;
  std::vector<Vector> input_masks;   // empty when no dropout was applied
  std::vector<Vector> output_masks;  // empty when no dropout was applied
};

// Left-to-right and right-to-left passes with zero initial states,
// per-token concatenation [forward; backward]. In training mode dropout
// is applied to inputs and outputs.
std::vector<Vector> bilstm_encode(const BiLstmParams& params, const std::vector<Vector>& inputs,
                                  double dropout_p = 0.0, num::Rng* rng = nullptr,
                                  bool training = false, BiLstmCache* cache = nullptr);

// Backpropagates gradients w.r.t. the concatenated outputs; parameter
// gradients accumulate into `grads`; returns gradients w.r.t. inputs.
std::vector<Vector> bilstm_backward(const BiLstmParams& params, const BiLstmCache& cache,
                                    const std::vector<Vector>& grad_outputs,
                                    BiLstmGrads& grads);

}  // namespace seqtag::tagger
