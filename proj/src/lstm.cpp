#include "seqtag/lstm.hpp"

namespace seqtag::num {

LstmCellParams LstmCellParams::zeros(int input_dim, int hidden_dim) {
  LstmCellParams p;
  p.W = Matrix::Zero(4 * hidden_dim, input_dim);
  p.U = Matrix::Zero(4 * hidden_dim, hidden_dim);
  p.b = Vector::Zero(4 * hidden_dim);
  return p;
}

namespace {

Matrix glorot_matrix(int rows, int cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / (rows + cols));
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-bound, bound);
  return m;
}

}  // namespace

LstmCellParams LstmCellParams::glorot(int input_dim, int hidden_dim, Rng& rng) {
  LstmCellParams p;
  p.W = glorot_matrix(4 * hidden_dim, input_dim, rng);
  p.U = glorot_matrix(4 * hidden_dim, hidden_dim, rng);
  p.b = Vector::Zero(4 * hidden_dim);
  p.b.segment(hidden_dim, hidden_dim).setOnes();  // forget gate
  return p;
}

LstmGrads LstmGrads::zeros_like(const LstmCellParams& p) {
  LstmGrads g;
  g.W = Matrix::Zero(p.W.rows(), p.W.cols());
  g.U = Matrix::Zero(p.U.rows(), p.U.cols());
  g.b = Vector::Zero(p.b.size());
  return g;
}

void LstmGrads::accumulate(const LstmGrads& other) {
  W += other.W;
  U += other.U;
  b += other.b;
}

void LstmGrads::scale(double s) {
  W *= s;
  U *= s;
  b *= s;
}

LstmStepOut lstm_cell_step(const LstmCellParams& params, const Eigen::Ref<const Vector>& x,
                           const Eigen::Ref<const Vector>& h_prev,
                           const Eigen::Ref<const Vector>& c_prev, LstmStepCache* cache) {
  const int h_dim = params.hidden_dim();
  if (x.size() != params.input_dim() || h_prev.size() != h_dim || c_prev.size() != h_dim)
    throw Error("lstm_cell_step: shape mismatch");

  const Vector pre = params.W * x + params.U * h_prev + params.b;
  const Vector i = pre.segment(0, h_dim).unaryExpr([](double v) { return sigmoid(v); });
  const Vector f = pre.segment(h_dim, h_dim).unaryExpr([](double v) { return sigmoid(v); });
  const Vector g = pre.segment(2 * h_dim, h_dim).array().tanh();
  const Vector o = pre.segment(3 * h_dim, h_dim).unaryExpr([](double v) { return sigmoid(v); });

  LstmStepOut out;
  out.c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
  const Vector tanh_c = out.c.array().tanh();
  out.h = o.cwiseProduct(tanh_c);
  check_finite(out.h, "lstm hidden state");

  if (cache) {
    cache->x = x;
    cache->h_prev = h_prev;
    cache->c_prev = c_prev;
    cache->i = i;
    cache->f = f;
    cache->g = g;
    cache->o = o;
    cache->c = out.c;
    cache->tanh_c = tanh_c;
  }
  return out;
}

LstmBackwardOut lstm_cell_backward(const LstmCellParams& params, const LstmStepCache& cache,
                                   const Eigen::Ref<const Vector>& grad_h,
                                   const Eigen::Ref<const Vector>& grad_c, LstmGrads& grads) {
  const int h_dim = params.hidden_dim();
  if (grad_h.size() != h_dim || grad_c.size() != h_dim)
    throw Error("lstm_cell_backward: shape mismatch");

  const Vector d_o = grad_h.cwiseProduct(cache.tanh_c);
  const Vector one_minus_tanh2 =
      (1.0 - cache.tanh_c.array().square()).matrix();
  Vector d_c = grad_c + grad_h.cwiseProduct(cache.o).cwiseProduct(one_minus_tanh2);

  const Vector d_i = d_c.cwiseProduct(cache.g);
  const Vector d_f = d_c.cwiseProduct(cache.c_prev);
  const Vector d_g = d_c.cwiseProduct(cache.i);
  const Vector d_c_prev = d_c.cwiseProduct(cache.f);

  Vector d_pre(4 * h_dim);
  d_pre.segment(0, h_dim) =
      d_i.cwiseProduct(cache.i).cwiseProduct((1.0 - cache.i.array()).matrix());
  d_pre.segment(h_dim, h_dim) =
      d_f.cwiseProduct(cache.f).cwiseProduct((1.0 - cache.f.array()).matrix());
  d_pre.segment(2 * h_dim, h_dim) =
      d_g.cwiseProduct((1.0 - cache.g.array().square()).matrix());
  d_pre.segment(3 * h_dim, h_dim) =
      d_o.cwiseProduct(cache.o).cwiseProduct((1.0 - cache.o.array()).matrix());

  grads.W.noalias() += d_pre * cache.x.transpose();
  grads.U.noalias() += d_pre * cache.h_prev.transpose();
  grads.b += d_pre;

  LstmBackwardOut out;
  out.grad_x = params.W.transpose() * d_pre;
  out.grad_h_prev = params.U.transpose() * d_pre;
  out.grad_c_prev = d_c_prev;
  return out;
}

}  // namespace seqtag::num
