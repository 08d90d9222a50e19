#include <doctest.h>

#include <cmath>

#include "seqtag/grad_check.hpp"
#include "seqtag/lstm.hpp"

using namespace seqtag;
using num::LstmCellParams;
using num::LstmGrads;
using num::Matrix;
using num::Vector;

namespace {

// Independent scalar-loop trace of the LSTM recurrence, no Eigen products.
void scalar_lstm_step(const LstmCellParams& p, const Vector& x, const Vector& h_prev,
                      const Vector& c_prev, Vector& h_out, Vector& c_out) {
  const int H = p.hidden_dim();
  const int D = p.input_dim();
  h_out.resize(H);
  c_out.resize(H);
  for (int j = 0; j < H; ++j) {
    double pre[4];
    for (int gate = 0; gate < 4; ++gate) {
      double acc = p.b[gate * H + j];
      for (int d = 0; d < D; ++d) acc += p.W(gate * H + j, d) * x[d];
      for (int k = 0; k < H; ++k) acc += p.U(gate * H + j, k) * h_prev[k];
      pre[gate] = acc;
    }
    const double i = 1.0 / (1.0 + std::exp(-pre[0]));
    const double f = 1.0 / (1.0 + std::exp(-pre[1]));
    const double g = std::tanh(pre[2]);
    const double o = 1.0 / (1.0 + std::exp(-pre[3]));
    c_out[j] = f * c_prev[j] + i * g;
    h_out[j] = o * std::tanh(c_out[j]);
  }
}

Vector random_vector(int n, num::Rng& rng, double scale = 1.0) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform(-scale, scale);
  return v;
}

}  // namespace

TEST_CASE("lstm zero params and states give zero outputs") {
  const auto p = LstmCellParams::zeros(3, 4);
  const auto out = num::lstm_cell_step(p, Vector::Zero(3), Vector::Zero(4), Vector::Zero(4));
  CHECK(out.h.isZero(0));
  CHECK(out.c.isZero(0));
}

TEST_CASE("lstm zero params halve the carried cell") {
  // sigma(0) = 0.5 and tanh(0) = 0: c' = 0.5 c, h' = 0.5 tanh(0.5 c).
  const auto p = LstmCellParams::zeros(2, 3);
  Vector c_prev(3);
  c_prev << 1.0, -2.0, 0.5;
  const auto out = num::lstm_cell_step(p, Vector::Zero(2), Vector::Zero(3), c_prev);
  for (int j = 0; j < 3; ++j) {
    CHECK(out.c[j] == doctest::Approx(0.5 * c_prev[j]).epsilon(1e-15));
    CHECK(out.h[j] == doctest::Approx(0.5 * std::tanh(0.5 * c_prev[j])).epsilon(1e-15));
  }
}

TEST_CASE("lstm matches the scalar-loop oracle on random instances") {
  num::Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int D = 1 + static_cast<int>(rng.uniform_index(5));
    const int H = 1 + static_cast<int>(rng.uniform_index(5));
    num::Rng init = rng.child("init" + std::to_string(trial));
    const auto p = LstmCellParams::glorot(D, H, init);
    const Vector x = random_vector(D, rng);
    const Vector h_prev = random_vector(H, rng);
    const Vector c_prev = random_vector(H, rng);
    const auto out = num::lstm_cell_step(p, x, h_prev, c_prev);
    Vector h_ref, c_ref;
    scalar_lstm_step(p, x, h_prev, c_prev, h_ref, c_ref);
    CHECK((out.h - h_ref).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK((out.c - c_ref).lpNorm<Eigen::Infinity>() < 1e-12);
    // |h| < 1 elementwise: tanh bound times sigmoid bound.
    CHECK(out.h.lpNorm<Eigen::Infinity>() < 1.0);
  }
}

TEST_CASE("lstm shape mismatch errors") {
  const auto p = LstmCellParams::zeros(3, 4);
  CHECK_THROWS_AS(
      num::lstm_cell_step(p, Vector::Zero(2), Vector::Zero(4), Vector::Zero(4)), Error);
  CHECK_THROWS_AS(
      num::lstm_cell_step(p, Vector::Zero(3), Vector::Zero(5), Vector::Zero(4)), Error);
}

TEST_CASE("lstm backward: zero upstream gradients give zero parameter gradients") {
  num::Rng rng(5);
  const auto p = LstmCellParams::glorot(3, 4, rng);
  num::LstmStepCache cache;
  num::lstm_cell_step(p, random_vector(3, rng), random_vector(4, rng), random_vector(4, rng),
                      &cache);
  LstmGrads grads = LstmGrads::zeros_like(p);
  num::lstm_cell_backward(p, cache, Vector::Zero(4), Vector::Zero(4), grads);
  CHECK(grads.W.isZero(0));
  CHECK(grads.U.isZero(0));
  CHECK(grads.b.isZero(0));
}

TEST_CASE("lstm backward gradients scale linearly with upstream gradients") {
  num::Rng rng(6);
  const auto p = LstmCellParams::glorot(2, 3, rng);
  num::LstmStepCache cache;
  num::lstm_cell_step(p, random_vector(2, rng), random_vector(3, rng), random_vector(3, rng),
                      &cache);
  const Vector gh = random_vector(3, rng), gc = random_vector(3, rng);
  LstmGrads g1 = LstmGrads::zeros_like(p), g2 = LstmGrads::zeros_like(p);
  const auto out1 = num::lstm_cell_backward(p, cache, gh, gc, g1);
  const auto out2 = num::lstm_cell_backward(p, cache, 2.0 * gh, 2.0 * gc, g2);
  CHECK((g2.W - 2.0 * g1.W).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((g2.b - 2.0 * g1.b).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((out2.grad_x - 2.0 * out1.grad_x).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("lstm backward agrees with central finite differences") {
  num::Rng rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    const int D = 1 + static_cast<int>(rng.uniform_index(4));
    const int H = 1 + static_cast<int>(rng.uniform_index(4));
    num::Rng init = rng.child("t" + std::to_string(trial));
    const auto p = LstmCellParams::glorot(D, H, init);
    const Vector x = random_vector(D, rng);
    const Vector h_prev = random_vector(H, rng);
    const Vector c_prev = random_vector(H, rng);
    const Vector wh = random_vector(H, rng);  // fixed projection to a scalar loss
    const Vector wc = random_vector(H, rng);

    // Flatten (W, U, b, x, h_prev, c_prev) into one parameter vector.
    const int n_w = static_cast<int>(p.W.size());
    const int n_u = static_cast<int>(p.U.size());
    const int total = n_w + n_u + 4 * H + D + 2 * H;
    Vector flat(total);
    int at = 0;
    for (int r = 0; r < p.W.rows(); ++r)
      for (int c = 0; c < p.W.cols(); ++c) flat[at++] = p.W(r, c);
    for (int r = 0; r < p.U.rows(); ++r)
      for (int c = 0; c < p.U.cols(); ++c) flat[at++] = p.U(r, c);
    flat.segment(at, 4 * H) = p.b;
    at += 4 * H;
    flat.segment(at, D) = x;
    at += D;
    flat.segment(at, H) = h_prev;
    at += H;
    flat.segment(at, H) = c_prev;

    auto unpack = [&](const Vector& f, LstmCellParams& q, Vector& xx, Vector& hh, Vector& cc) {
      q = LstmCellParams::zeros(D, H);
      int k = 0;
      for (int r = 0; r < q.W.rows(); ++r)
        for (int c = 0; c < q.W.cols(); ++c) q.W(r, c) = f[k++];
      for (int r = 0; r < q.U.rows(); ++r)
        for (int c = 0; c < q.U.cols(); ++c) q.U(r, c) = f[k++];
      q.b = f.segment(k, 4 * H);
      k += 4 * H;
      xx = f.segment(k, D);
      k += D;
      hh = f.segment(k, H);
      k += H;
      cc = f.segment(k, H);
    };

    auto loss = [&](const Vector& f) {
      LstmCellParams q;
      Vector xx, hh, cc;
      unpack(f, q, xx, hh, cc);
      const auto out = num::lstm_cell_step(q, xx, hh, cc);
      return wh.dot(out.h) + wc.dot(out.c);
    };

    num::LstmStepCache cache;
    num::lstm_cell_step(p, x, h_prev, c_prev, &cache);
    LstmGrads grads = LstmGrads::zeros_like(p);
    const auto back = num::lstm_cell_backward(p, cache, wh, wc, grads);

    Vector analytic(total);
    at = 0;
    for (int r = 0; r < grads.W.rows(); ++r)
      for (int c = 0; c < grads.W.cols(); ++c) analytic[at++] = grads.W(r, c);
    for (int r = 0; r < grads.U.rows(); ++r)
      for (int c = 0; c < grads.U.cols(); ++c) analytic[at++] = grads.U(r, c);
    analytic.segment(at, 4 * H) = grads.b;
    at += 4 * H;
    analytic.segment(at, D) = back.grad_x;
    at += D;
    analytic.segment(at, H) = back.grad_h_prev;
    at += H;
    analytic.segment(at, H) = back.grad_c_prev;

    const auto report = num::grad_check(loss, flat, analytic, 1e-5, 1e-6);
    CHECK_MESSAGE(report.passed, report.to_string());
  }
}
