#include <doctest.h>

#include "conic/conditioning.hpp"
#include "conic/exact.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <random>

using namespace conic;

namespace {
Matrix mat(Index m, Index n, std::initializer_list<double> v) {
  Matrix a(m, n);
  auto it = v.begin();
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = *it++;
  return a;
}
}  // namespace

TEST_CASE("Hadamard bound examples") {
  CHECK(hadamard_delta(Matrix::Identity(2, 2)) == doctest::Approx(1.0));
  CHECK(hadamard_delta(mat(2, 3, {1, 0, 3, 0, 1, 4})) == doctest::Approx(5.0));
  CHECK(hadamard_delta(mat(1, 2, {2, 4})) == doctest::Approx(4.0));
}

TEST_CASE("theta examples") {
  CHECK(theta(Matrix::Identity(2, 2)) == doctest::Approx(0.25));
  CHECK(theta(mat(2, 3, {1, 0, 3, 0, 1, 4})) == doctest::Approx(0.01));
  CHECK(theta(mat(1, 2, {2, 4})) == doctest::Approx(1.0 / 16));
}

TEST_CASE("encoding length examples") {
  CHECK(encoding_length(Matrix::Zero(1, 1)) == 1);
  CHECK(encoding_length(Matrix::Identity(2, 2)) == 6);
  CHECK(encoding_length(mat(1, 2, {2, 4})) == 7);
  CHECK_THROWS_AS(encoding_length(mat(1, 1, {0.5})), PreconditionError);
  CHECK(is_integral(mat(1, 2, {-3, 7})));
  CHECK_FALSE(is_integral(mat(1, 2, {-3, 7.25})));
}

TEST_CASE("greedy Hadamard bound matches exhaustive enumeration") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const Index m = 1 + static_cast<Index>(rng() % 3);
    const Index n = 1 + static_cast<Index>(rng() % 8);
    Matrix a = testsupport::random_integer_matrix(rng, m, n, -4, 4);
    if (trial % 4 == 0 && n > 1) a.col(n - 1) = 2 * a.col(0);  // parallel columns
    for (Index j = 0; j < n; ++j)
      if (a.col(j).isZero(0)) a(0, j) = 1;
    CHECK(hadamard_delta(a) == doctest::Approx(testsupport::exhaustive_delta(a)).epsilon(1e-12));
  }
}

TEST_CASE("Goffin measure examples") {
  CHECK(goffin_oracle(mat(1, 2, {1, -1})) == doctest::Approx(-1.0));
  CHECK(goffin_oracle(Matrix::Identity(2, 2)) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-9));
  CHECK(goffin_oracle(mat(2, 3, {1, -1, 0, 0, 0, 1})) == doctest::Approx(0.0));
  CHECK(goffin_oracle(mat(1, 1, {3})) == doctest::Approx(1.0));
}

TEST_CASE("Goffin grid search brackets the exact value") {
  const auto id = goffin_grid(Matrix::Identity(2, 2));
  CHECK(std::abs(id.value - 1 / std::sqrt(2.0)) <= id.accuracy + 1e-12);
  CHECK(id.accuracy <= 1e-6);

  std::mt19937_64 rng(22);
  int compared = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const Index m = 2 + static_cast<Index>(rng() % 2);
    const Index n = m + static_cast<Index>(rng() % 4);
    Matrix a(m, n);
    for (Index j = 0; j < n; ++j) a.col(j) = testsupport::random_gaussian(rng, m);
    const double exact = goffin_oracle(a);
    const auto grid = goffin_grid(a, 1e-6);
    if (grid.accuracy > 1e-5) continue;
    ++compared;
    CHECK(grid.value <= exact + 1e-9);
    CHECK(exact <= grid.value + grid.accuracy + 1e-9);
  }
  CHECK(compared >= 40);
}

TEST_CASE("Goffin sign matches the exact feasibility oracle") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 150; ++trial) {
    const Index m = 1 + static_cast<Index>(rng() % 3);
    const Index n = 1 + static_cast<Index>(rng() % 6);
    Matrix a = testsupport::random_integer_matrix(rng, m, n, -3, 3);
    for (Index j = 0; j < n; ++j)
      if (a.col(j).isZero(0)) a(0, j) = 1;
    const double rho = goffin_oracle(a);
    const ExactSupports ex = exact_support_oracle(a);
    if (rho < -1e-9) {
      CHECK(static_cast<Index>(ex.S.size()) == n);  // x > 0 with Ax = 0 exists
    } else if (rho > 1e-9) {
      CHECK(static_cast<Index>(ex.T.size()) == n);  // Aᵀy > 0 exists
    } else {
      CHECK(static_cast<Index>(ex.S.size()) < n);
      CHECK(static_cast<Index>(ex.T.size()) < n);
    }
  }
}

TEST_CASE("condition chain on small integer matrices") {
  std::mt19937_64 rng(24);
  int used = 0;
  for (int trial = 0; trial < 300 && used < 100; ++trial) {
    const Index m = 1 + static_cast<Index>(rng() % 3);
    const Index n = 1 + static_cast<Index>(rng() % 6);
    Matrix a = testsupport::random_integer_matrix(rng, m, n, -10, 10);
    bool zero = false;
    for (Index j = 0; j < n; ++j) zero = zero || a.col(j).isZero(0);
    if (zero) continue;
    const double rho = goffin_oracle(a);
    if (std::abs(rho) <= 1e-3) continue;
    ++used;
    const double th = theta(a);
    CHECK(std::abs(rho) >= th);
    CHECK(std::log2(th) >= -4.0 * static_cast<double>(encoding_length(a)));
  }
  CHECK(used >= 50);
}

TEST_CASE("width measure examples") {
  CHECK(omega_oracle(mat(1, 1, {1}), {0}) == doctest::Approx(1.0));
  // For the identity the width along each axis of the quarter disk is 1,
  // which dominates the Goffin measure 1/√2.
  const double w = omega_oracle(Matrix::Identity(2, 2), {0, 1});
  CHECK(w == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(w >= goffin_oracle(Matrix::Identity(2, 2)));
}

TEST_CASE("width measure dominates the Goffin measure on image-feasible instances") {
  std::mt19937_64 rng(25);
  for (int trial = 0; trial < 40; ++trial) {
    const Index m = 2 + static_cast<Index>(rng() % 2);
    const Index n = m + static_cast<Index>(rng() % 3);
    Matrix a(m, n);
    for (Index j = 0; j < n; ++j) a.col(j) = testsupport::random_gaussian(rng, m);
    const double rho = goffin_oracle(a);
    if (rho <= 1e-6) continue;
    std::vector<Index> all(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) all[j] = j;
    CHECK(omega_oracle(a, all) >= rho - 1e-9);
  }
}

TEST_CASE("cone projection satisfies the optimality conditions") {
  std::mt19937_64 rng(26);
  for (int trial = 0; trial < 50; ++trial) {
    const Index m = 2 + static_cast<Index>(rng() % 2);
    const Index n = 2 + static_cast<Index>(rng() % 4);
    Matrix a(m, n);
    for (Index j = 0; j < n; ++j) a.col(j) = testsupport::random_gaussian(rng, m);
    const Vector c = testsupport::random_gaussian(rng, m);
    const Vector p = project_onto_image_cone(a, c);
    CHECK((a.transpose() * p).minCoeff() >= -1e-9);
    // The projection is no farther than any sampled feasible point.
    std::vector<Vector> samples;
    for (int s = 0; s < 200; ++s) {
      const Vector z = testsupport::random_gaussian(rng, m);
      if ((a.transpose() * z).minCoeff() >= 0) CHECK((c - p).norm() <= (c - z).norm() + 1e-9);
    }
    CHECK((c - p).norm() <= c.norm() + 1e-12);  // 0 is feasible
  }
}

TEST_CASE("condition report fills every field for integer input") {
  const ConditionReport r = condition_report(Matrix::Identity(2, 2));
  CHECK(r.rho == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(r.delta == doctest::Approx(1.0));
  CHECK(r.theta == doctest::Approx(0.25));
  CHECK(r.encoding_length == 6);
  const ConditionReport f = condition_report(mat(1, 2, {0.5, -1.5}));
  CHECK(f.encoding_length == -1);
  CHECK(f.rho == doctest::Approx(-1.0));
}
