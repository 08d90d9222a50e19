#include <doctest.h>

#include <cmath>

#include "seqtag/grad_check.hpp"
#include "seqtag/numerics.hpp"

using namespace seqtag;
using num::Matrix;
using num::Vector;

TEST_CASE("logsumexp analytic cases") {
  Vector v(2);
  v << 0.0, 0.0;
  CHECK(num::logsumexp(v) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  Vector single(1);
  single << 3.25;
  CHECK(num::logsumexp(single) == doctest::Approx(3.25).epsilon(1e-15));

  Vector empty(0);
  CHECK_THROWS_AS(num::logsumexp(empty), Error);
}

TEST_CASE("logsumexp shift invariance and bounds") {
  num::Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_index(6));
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.uniform(-30.0, 30.0);
    const double c = rng.uniform(-100.0, 100.0);
    const double base = num::logsumexp(v);
    CHECK(num::logsumexp((v.array() + c).matrix()) == doctest::Approx(base + c).epsilon(1e-9));
    CHECK(base >= v.maxCoeff());
    CHECK(base <= v.maxCoeff() + std::log(static_cast<double>(n)) + 1e-12);
  }
}

TEST_CASE("logsumexp survives huge magnitudes") {
  Vector v(3);
  v << 1000.0, 999.0, -1000.0;
  const double expected = 1000.0 + std::log(1.0 + std::exp(-1.0) + std::exp(-2000.0));
  CHECK(num::logsumexp(v) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("sgd_update definition") {
  Matrix w(1, 1), g(1, 1);
  w << 1.0;
  g << 0.5;
  num::sgd_update(w, g, 0.1);
  CHECK(w(0, 0) == doctest::Approx(0.95).epsilon(1e-15));

  num::sgd_update(w, Matrix::Zero(1, 1), 0.1);
  CHECK(w(0, 0) == doctest::Approx(0.95).epsilon(1e-15));

  Matrix wrong(2, 1);
  CHECK_THROWS_AS(num::sgd_update(w, wrong, 0.1), Error);
}

TEST_CASE("dropout identity cases") {
  num::Rng rng(3);
  Vector v(8);
  for (int i = 0; i < 8; ++i) v[i] = i + 1.0;
  CHECK(num::dropout_apply(v, 0.0, rng, true) == v);
  CHECK(num::dropout_apply(v, 0.9, rng, false) == v);
  CHECK_THROWS_AS(num::dropout_apply(v, 1.0, rng, true), Error);
  CHECK_THROWS_AS(num::dropout_apply(v, -0.1, rng, true), Error);
}

TEST_CASE("dropout empirical zero fraction and survivor scale") {
  num::Rng rng(11);
  const int n = 100000;
  Vector v = Vector::Ones(n);
  const Vector dropped = num::dropout_apply(v, 0.5, rng, true);
  int zeros = 0;
  for (int i = 0; i < n; ++i) {
    if (dropped[i] == 0.0) {
      ++zeros;
    } else {
      CHECK(dropped[i] == doctest::Approx(2.0));
    }
  }
  const double frac = static_cast<double>(zeros) / n;
  CHECK(frac == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("plateau scheduler traces") {
  SUBCASE("improvements keep the rate") {
    num::PlateauScheduler sched({0.1, 0.5, 3, 1e-4});
    double lr = 0.1;
    for (int i = 0; i < 10; ++i) lr = sched.report(static_cast<double>(i), true);
    CHECK(lr == doctest::Approx(0.1));
  }
  SUBCASE("patience 3, four non-improvements, exactly one halving") {
    num::PlateauScheduler sched({0.1, 0.5, 3, 1e-4});
    sched.report(1.0, true);  // establishes the best
    CHECK(sched.report(0.9, true) == doctest::Approx(0.1));
    CHECK(sched.report(0.8, true) == doctest::Approx(0.1));
    CHECK(sched.report(0.7, true) == doctest::Approx(0.05));  // third miss
    CHECK(sched.report(0.6, true) == doctest::Approx(0.05));  // counter was reset
  }
  SUBCASE("floor at min_lr") {
    num::PlateauScheduler sched({2e-4, 0.5, 1, 1e-4});
    sched.report(1.0, false);
    CHECK(sched.report(2.0, false) == doctest::Approx(1e-4));
    CHECK(sched.report(3.0, false) == doctest::Approx(1e-4));
  }
  SUBCASE("lower-is-better direction") {
    num::PlateauScheduler sched({0.1, 0.5, 1, 1e-4});
    sched.report(5.0, false);
    CHECK(sched.report(4.0, false) == doctest::Approx(0.1));  // improvement
    CHECK(sched.report(4.5, false) == doctest::Approx(0.05));
  }
}

TEST_CASE("rng determinism and children") {
  num::Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  num::Rng parent(42);
  num::Rng c1 = parent.child("dropout");
  num::Rng c2 = parent.child("dropout");
  num::Rng c3 = parent.child("shuffle");
  CHECK(c1.next_u64() == c2.next_u64());
  CHECK(c1.seed() != c3.seed());
}

TEST_CASE("rng uniform bounds") {
  num::Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  for (int i = 0; i < 100; ++i) CHECK(rng.uniform_index(7) < 7);
}

TEST_CASE("grad_check on quadratic loss") {
  Vector w(4);
  w << 0.5, -1.25, 2.0, 0.0;
  auto loss = [](const Vector& p) { return 0.5 * p.squaredNorm(); };
  const auto report = num::grad_check(loss, w, w, 1e-5, 1e-8);
  CHECK(report.passed);
  CHECK(report.max_rel_error < 1e-8);
}

TEST_CASE("grad_check rejects a corrupted gradient") {
  Vector w(3);
  w << 1.0, 2.0, 3.0;
  Vector bad = w;
  bad[1] += 0.05;
  auto loss = [](const Vector& p) { return 0.5 * p.squaredNorm(); };
  const auto report = num::grad_check(loss, w, bad, 1e-5, 1e-4);
  CHECK_FALSE(report.passed);
  CHECK(report.worst_index == 1);
}
