#include <doctest.h>

#include <cmath>

#include "seqtag/crf.hpp"
#include "seqtag/grad_check.hpp"

using namespace seqtag;
using num::Matrix;
using num::Vector;
using tagger::CrfGradients;
using tagger::CrfParams;
using tagger::LabelScheme;

namespace {

// Exhaustive enumeration over all L^T labelings: reference partition
// function and argmax, independent of the forward/viterbi code paths.
struct BruteForce {
  double log_partition = 0.0;
  std::vector<int> best_labels;
  double best_score = 0.0;
};

BruteForce brute_force(const CrfParams& crf, const Matrix& emissions) {
  const int T = static_cast<int>(emissions.rows());
  const int L = crf.num_labels();
  std::vector<int> labels(T, 0);
  std::vector<double> scores;
  BruteForce out;
  bool first = true;
  while (true) {
    const double s = tagger::crf_sequence_score(crf, emissions, labels);
    scores.push_back(s);
    // Strictly-greater keeps the lexicographically smallest maximizer,
    // which is what the viterbi tie rule (lowest index first) produces.
    if (first || s > out.best_score) {
      out.best_score = s;
      out.best_labels = labels;
      first = false;
    }
    int pos = T - 1;
    while (pos >= 0 && labels[pos] == L - 1) labels[pos--] = 0;
    if (pos < 0) break;
    ++labels[pos];
  }
  const double m = *std::max_element(scores.begin(), scores.end());
  double acc = 0.0;
  for (double s : scores) acc += std::exp(s - m);
  out.log_partition = m + std::log(acc);
  return out;
}

CrfParams random_crf(int L, int feature_dim, num::Rng& rng, double scale = 2.0) {
  CrfParams crf = CrfParams::zeros(L, feature_dim);
  const int start = L, stop = L + 1;
  for (int i = 0; i < L + 2; ++i)
    for (int j = 0; j < L + 2; ++j)
      if (i != stop && j != start) crf.transitions(i, j) = rng.uniform(-scale, scale);
  for (int r = 0; r < L; ++r)
    for (int c = 0; c < feature_dim; ++c) crf.emission_w(r, c) = rng.uniform(-scale, scale);
  for (int r = 0; r < L; ++r) crf.emission_b[r] = rng.uniform(-scale, scale);
  return crf;
}

Matrix random_emissions(int T, int L, num::Rng& rng, double scale = 3.0) {
  Matrix em(T, L);
  for (int t = 0; t < T; ++t)
    for (int l = 0; l < L; ++l) em(t, l) = rng.uniform(-scale, scale);
  return em;
}

}  // namespace

TEST_CASE("sequence score analytic cases") {
  SUBCASE("all zeros score zero for any labeling") {
    CrfParams crf = CrfParams::zeros(3, 2);
    const Matrix em = Matrix::Zero(4, 3);
    CHECK(tagger::crf_sequence_score(crf, em, {0, 1, 2, 1}) == doctest::Approx(0.0));
  }
  SUBCASE("single token decomposes into start + emission + stop") {
    CrfParams crf = CrfParams::zeros(2, 2);
    crf.transitions(2, 0) = 0.7;   // START -> label 0
    crf.transitions(0, 3) = -0.2;  // label 0 -> STOP
    Matrix em(1, 2);
    em << 1.5, -4.0;
    CHECK(tagger::crf_sequence_score(crf, em, {0}) == doctest::Approx(0.7 + 1.5 - 0.2));
  }
  SUBCASE("label out of range throws") {
    CrfParams crf = CrfParams::zeros(2, 2);
    const Matrix em = Matrix::Zero(1, 2);
    CHECK_THROWS_AS(tagger::crf_sequence_score(crf, em, {5}), Error);
  }
  SUBCASE("random instance equals direct summation") {
    num::Rng rng(31);
    CrfParams crf = random_crf(5, 2, rng);
    const Matrix em = random_emissions(4, 5, rng);
    const std::vector<int> y = {2, 0, 4, 1};
    double expected = crf.transitions(5, y[0]) + crf.transitions(y[3], 6);
    for (int t = 0; t < 4; ++t) expected += em(t, y[t]);
    for (int t = 0; t + 1 < 4; ++t) expected += crf.transitions(y[t], y[t + 1]);
    CHECK(tagger::crf_sequence_score(crf, em, y) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("log partition analytic cases") {
  SUBCASE("uniform zero scores count the labelings") {
    CrfParams crf = CrfParams::zeros(2, 2);
    const Matrix em = Matrix::Zero(3, 2);
    CHECK(tagger::crf_log_partition(crf, em) ==
          doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-12));
  }
  SUBCASE("single token reduces to logsumexp over labels") {
    num::Rng rng(32);
    CrfParams crf = random_crf(4, 2, rng);
    Matrix em = random_emissions(1, 4, rng);
    Vector terms(4);
    for (int j = 0; j < 4; ++j)
      terms[j] = crf.transitions(4, j) + em(0, j) + crf.transitions(j, 5);
    CHECK(tagger::crf_log_partition(crf, em) ==
          doctest::Approx(num::logsumexp(terms)).epsilon(1e-12));
  }
}

TEST_CASE("log partition and viterbi match brute force on random instances") {
  num::Rng rng(33);
  for (int trial = 0; trial < 60; ++trial) {
    const int T = 1 + static_cast<int>(rng.uniform_index(5));
    const int L = 1 + static_cast<int>(rng.uniform_index(4));
    CrfParams crf = random_crf(L, 2, rng);
    const Matrix em = random_emissions(T, L, rng);
    const BruteForce ref = brute_force(crf, em);

    CHECK(tagger::crf_log_partition(crf, em) ==
          doctest::Approx(ref.log_partition).epsilon(1e-10));

    const auto vit = tagger::viterbi_decode(crf, em);
    CHECK(vit.score == doctest::Approx(ref.best_score).epsilon(1e-10));
    CHECK(vit.labels == ref.best_labels);
    CHECK(tagger::crf_sequence_score(crf, em, vit.labels) ==
          doctest::Approx(vit.score).epsilon(1e-10));

    // Partition dominance.
    CHECK(tagger::crf_log_partition(crf, em) >= ref.best_score - 1e-12);
  }
}

TEST_CASE("viterbi per-position argmax with zero transitions") {
  CrfParams crf = CrfParams::zeros(3, 2);
  Matrix em(3, 3);
  em << 0.0, 9.0, 0.0,
        9.0, 0.0, 0.0,
        0.0, 0.0, 9.0;
  const auto vit = tagger::viterbi_decode(crf, em);
  CHECK(vit.labels == std::vector<int>{1, 0, 2});
}

TEST_CASE("viterbi tie rule prefers the lowest label index") {
  CrfParams crf = CrfParams::zeros(3, 2);
  const Matrix em = Matrix::Zero(4, 3);  // fully tied
  const auto vit = tagger::viterbi_decode(crf, em);
  CHECK(vit.labels == std::vector<int>{0, 0, 0, 0});
}

TEST_CASE("crf nll: marginals per position sum to one") {
  num::Rng rng(34);
  CrfParams crf = random_crf(4, 2, rng);
  const Matrix em = random_emissions(5, 4, rng);
  CrfGradients grads;
  const double loss = tagger::crf_nll_and_gradients(crf, em, {0, 1, 2, 3, 0}, grads);
  CHECK(loss >= 0.0);
  // grad_emissions[t] = marginals - onehot, so each row sums to zero.
  for (int t = 0; t < 5; ++t)
    CHECK(grads.emissions.row(t).sum() == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("crf nll approaches zero when emissions strongly favor gold") {
  CrfParams crf = CrfParams::zeros(3, 2);
  Matrix em = Matrix::Zero(4, 3);
  const std::vector<int> gold = {2, 0, 1, 1};
  for (int t = 0; t < 4; ++t) em(t, gold[t]) = 50.0;
  CrfGradients grads;
  const double loss = tagger::crf_nll_and_gradients(crf, em, gold, grads);
  CHECK(loss < 1e-12);
  CHECK(loss >= 0.0);
}

TEST_CASE("crf gradients match finite differences") {
  num::Rng rng(35);
  for (int trial = 0; trial < 8; ++trial) {
    const int T = 1 + static_cast<int>(rng.uniform_index(5));
    const int L = 2 + static_cast<int>(rng.uniform_index(3));
    CrfParams crf = random_crf(L, 2, rng, 1.0);
    const Matrix em = random_emissions(T, L, rng, 1.0);
    std::vector<int> gold(T);
    for (int t = 0; t < T; ++t) gold[t] = static_cast<int>(rng.uniform_index(L));

    CrfGradients grads;
    tagger::crf_nll_and_gradients(crf, em, gold, grads);

    // Pack emissions and the used transition cells into one flat vector.
    const int start = L, stop = L + 1;
    std::vector<std::pair<int, int>> cells;
    for (int j = 0; j < L; ++j) cells.emplace_back(start, j);
    for (int i = 0; i < L; ++i) cells.emplace_back(i, stop);
    for (int i = 0; i < L; ++i)
      for (int j = 0; j < L; ++j) cells.emplace_back(i, j);

    Vector flat(T * L + static_cast<int>(cells.size()));
    Vector analytic(flat.size());
    int at = 0;
    for (int t = 0; t < T; ++t)
      for (int l = 0; l < L; ++l) {
        flat[at] = em(t, l);
        analytic[at] = grads.emissions(t, l);
        ++at;
      }
    for (const auto& [i, j] : cells) {
      flat[at] = crf.transitions(i, j);
      analytic[at] = grads.transitions(i, j);
      ++at;
    }

    auto loss = [&](const Vector& f) {
      CrfParams c = crf;
      Matrix e = em;
      int k = 0;
      for (int t = 0; t < T; ++t)
        for (int l = 0; l < L; ++l) e(t, l) = f[k++];
      for (const auto& [i, j] : cells) c.transitions(i, j) = f[k++];
      CrfGradients unused;
      return tagger::crf_nll_and_gradients(c, e, gold, unused);
    };

    const auto report = num::grad_check(loss, flat, analytic, 1e-5, 1e-6);
    CHECK_MESSAGE(report.passed, report.to_string());
  }
}

TEST_CASE("iobes transition mask blocks invalid paths") {
  CrfParams crf = CrfParams::zeros(LabelScheme::kNumLabels, 4);
  crf.apply_iobes_mask();
  Matrix em = Matrix::Zero(2, LabelScheme::kNumLabels);
  // Make I the per-position favorite; the mask must forbid starting in I.
  em.col(LabelScheme::kInside).setConstant(10.0);
  const auto vit = tagger::viterbi_decode(crf, em);
  CHECK(vit.labels.front() == LabelScheme::kBegin);  // B -> I is the legal way in
  CHECK(vit.labels[1] == LabelScheme::kInside);

  // Partition stays finite and dominated by valid paths only.
  const double log_z = tagger::crf_log_partition(crf, em);
  CHECK(std::isfinite(log_z));

  // Gradient flow with the mask in place stays finite.
  CrfGradients grads;
  const double loss = tagger::crf_nll_and_gradients(
      crf, em, {LabelScheme::kBegin, LabelScheme::kEnd}, grads);
  CHECK(std::isfinite(loss));
  CHECK(grads.emissions.allFinite());
}

TEST_CASE("label scheme round-trips indices") {
  LabelScheme scheme;
  scheme.etype = corpus::EntityType::Disease;
  for (int i = 0; i < LabelScheme::kNumLabels; ++i)
    CHECK(scheme.index_of(scheme.label_of(i)) == i);
  CHECK(scheme.label_strings() ==
        std::vector<std::string>{"O", "B-Disease", "I-Disease", "E-Disease", "S-Disease"});
}
