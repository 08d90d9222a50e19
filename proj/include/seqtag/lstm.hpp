#pragma once

#include "seqtag/numerics.hpp"

namespace seqtag::num {

// Single LSTM cell. Gate order in the stacked 4H dimension is fixed as
// (input, forget, cell-candidate, output).
struct LstmCellParams {
  Matrix W;  // 4H x D, input weights
  Matrix U;  // 4H x H, recurrent weights
  Vector b;  // 4H

  int input_dim() const { return static_cast<int>(W.cols()); }
  int hidden_dim() const { return static_cast<int>(U.cols()); }

  static LstmCellParams zeros(int input_dim, int hidden_dim);
  // Uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases, forget-gate
  // bias +1.
  static LstmCellParams glorot(int input_dim, int hidden_dim, Rng& rng);
};

struct LstmGrads {
  Matrix W;
  Matrix U;
  Vector b;

  static LstmGrads zeros_like(const LstmCellParams& p);
  void accumulate(const LstmGrads& other);
  void scale(double s);
};

// Everything the backward pass needs from one forward step.
struct LstmStepCache {
  Vector x;
  Vector h_prev;
  Vector c_prev;
  Vector i, f, g, o;  // post-activation gates
  Vector c;
  Vector tanh_c;
};

struct LstmStepOut {
  Vector h;
  Vector c;
};

LstmStepOut lstm_cell_step(const LstmCellParams& params, const Eigen::Ref<const Vector>& x,
                           const Eigen::Ref<const Vector>& h_prev,
                           const Eigen::Ref<const Vector>& c_prev,
                           LstmStepCache* cache = nullptr);

struct LstmBackwardOut {
  Vector grad_x;
  Vector grad_h_prev;
  Vector grad_c_prev;
};

// Backpropagates one step. Parameter gradients accumulate into `grads`.
LstmBackwardOut lstm_cell_backward(const LstmCellParams& params, const LstmStepCache& cache,
                                   const Eigen::Ref<const Vector>& grad_h,
                                   const Eigen::Ref<const Vector>& grad_c, LstmGrads& grads);

}  // namespace seqtag::num
