#include "seqtag/bilstm.hpp"

namespace seqtag::tagger {

BiLstmParams BiLstmParams::glorot(int input_dim, int hidden_dim, num::Rng& rng) {
  BiLstmParams p;
  num::Rng fwd_rng = rng.child("bilstm-fwd");
  num::Rng bwd_rng = rng.child("bilstm-bwd");
  p.forward = LstmCellParams::glorot(input_dim, hidden_dim, fwd_rng);
  p.backward = LstmCellParams::glorot(input_dim, hidden_dim, bwd_rng);
  return p;
}

BiLstmGrads BiLstmGrads::zeros_like(const BiLstmParams& p) {
  return {LstmGrads::zeros_like(p.forward), LstmGrads::zeros_like(p.backward)};
}

void BiLstmGrads::accumulate(const BiLstmGrads& other) {
  forward.accumulate(other.forward);
  backward.accumulate(other.backward);
}

void BiLstmGrads::scale(double s) {
  forward.scale(s);
  backward.scale(s);
}

std::vector<Vector> bilstm_encode(const BiLstmParams& params, const std::vector<Vector>& inputs,
                                  double dropout_p, num::Rng* rng, bool training,
                                  BiLstmCache* cache) {
  const std::size_t T = inputs.size();
  if (T == 0) throw Error("bilstm_encode: empty sentence");
  const int in_dim = params.input_dim();
  const int h_fwd = params.forward.hidden_dim();
  const int h_bwd = params.backward.hidden_dim();
  for (const Vector& x : inputs)
    if (x.size() != in_dim) throw Error("bilstm_encode: input dimension mismatch");

  const bool use_dropout = training && dropout_p > 0.0;
  if (use_dropout && !rng) throw Error("bilstm_encode: dropout requires an rng");

  std::vector<Vector> dropped(T);
  std::vector<Vector> in_masks, out_masks;
  for (std::size_t t = 0; t < T; ++t) {
    if (use_dropout) {
      Vector mask = num::dropout_mask(in_dim, dropout_p, *rng);
      dropped[t] = inputs[t].cwiseProduct(mask);
      in_masks.push_back(std::move(mask));
    } else {
      dropped[t] = inputs[t];
    }
  }

  std::vector<num::LstmStepCache> fwd_steps(T), bwd_steps(T);
  std::vector<Vector> fwd_h(T), bwd_h(T);

  Vector h = Vector::Zero(h_fwd), c = Vector::Zero(h_fwd);
  for (std::size_t t = 0; t < T; ++t) {
    auto out = num::lstm_cell_step(params.forward, dropped[t], h, c,
                                   cache ? &fwd_steps[t] : nullptr);
    h = std::move(out.h);
    c = std::move(out.c);
    fwd_h[t] = h;
  }
  h = Vector::Zero(h_bwd);
  c = Vector::Zero(h_bwd);
  for (std::size_t k = 0; k < T; ++k) {
    const std::size_t t = T - 1 - k;
    auto out = num::lstm_cell_step(params.backward, dropped[t], h, c,
                                   cache ? &bwd_steps[k] : nullptr);
    h = std::move(out.h);
    c = std::move(out.c);
    bwd_h[t] = h;
  }

  std::vector<Vector> outputs(T);
  for (std::size_t t = 0; t < T; ++t) {
    Vector out(h_fwd + h_bwd);
    out << fwd_h[t], bwd_h[t];
    if (use_dropout) {
      Vector mask = num::dropout_mask(h_fwd + h_bwd, dropout_p, *rng);
      out = out.cwiseProduct(mask);
      out_masks.push_back(std::move(mask));
    }
    outputs[t] = std::move(out);
  }

  if (cache) {
    cache->fwd_steps = std::move(fwd_steps);
    cache->bwd_steps = std::move(bwd_steps);
    cache->dropped_inputs = std::move(dropped);
    cache->input_masks = std::move(in_masks);
    cache->output_masks = std::move(out_masks);
  }
  return outputs;
}

std::vector<Vector> bilstm_backward(const BiLstmParams& params, const BiLstmCache& cache,
                                    const std::vector<Vector>& grad_outputs,
                                    BiLstmGrads& grads) {
  const std::size_t T = cache.fwd_steps.size();
  if (grad_outputs.size() != T) throw Error("bilstm_backward: gradient count mismatch");
  const int h_fwd = params.forward.hidden_dim();
  const int h_bwd = params.backward.hidden_dim();
  const int in_dim = params.input_dim();

  // Undo output dropout, split the concatenated gradient.
  std::vector<Vector> d_fwd_h(T), d_bwd_h(T);
  for (std::size_t t = 0; t < T; ++t) {
    Vector g = grad_outputs[t];
    if (!cache.output_masks.empty()) g = g.cwiseProduct(cache.output_masks[t]);
    d_fwd_h[t] = g.head(h_fwd);
    d_bwd_h[t] = g.tail(h_bwd);
  }

  std::vector<Vector> d_inputs(T, Vector::Zero(in_dim));

  Vector dh = Vector::Zero(h_fwd), dc = Vector::Zero(h_fwd);
  for (std::size_t k = 0; k < T; ++k) {
    const std::size_t t = T - 1 - k;
    dh += d_fwd_h[t];
    auto back = num::lstm_cell_backward(params.forward, cache.fwd_steps[t], dh, dc,
                                        grads.forward);
    d_inputs[t] += back.grad_x;
    dh = std::move(back.grad_h_prev);
    dc = std::move(back.grad_c_prev);
  }
  dh = Vector::Zero(h_bwd);
  dc = Vector::Zero(h_bwd);
  // Backward direction was unrolled over reversed time; its "last" step
  // is original position 0, so walk cache indices in reverse.
  for (std::size_t k = T; k-- > 0;) {
    const std::size_t t = T - 1 - k;
    dh += d_bwd_h[t];
    auto back = num::lstm_cell_backward(params.backward, cache.bwd_steps[k], dh, dc,
                                        grads.backward);
    d_inputs[t] += back.grad_x;
    dh = std::move(back.grad_h_prev);
    dc = std::move(back.grad_c_prev);
  }

  if (!cache.input_masks.empty())
    for (std::size_t t = 0; t < T; ++t)
      d_inputs[t] = d_inputs[t].cwiseProduct(cache.input_masks[t]);
  return d_inputs;
}

}  // namespace seqtag::tagger
