#include "conic/conditioning.hpp"
#include "conic/exact.hpp"
#include "conic/instance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace conic {

namespace {

constexpr int kMaxAttempts = 20'000;

Vector random_unit(std::mt19937_64& rng, Index m) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(m);
  do {
    for (Index i = 0; i < m; ++i) v(i) = gauss(rng);
  } while (v.norm() < 1e-8);
  return v / v.norm();
}

}  // namespace

ConicInstance gen_kernel_feasible(Index m, Index n, double rho_target, std::uint64_t seed) {
  if (m < 1 || n < m + 1) throw PreconditionError("gen_kernel_feasible: need n >= m + 1");
  if (!(rho_target > 0 && rho_target < 1)) throw PreconditionError("gen_kernel_feasible: need 0 < rho_target < 1");
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Matrix a(m, n);
    for (Index j = 0; j + 1 < n; ++j) a.col(j) = random_unit(rng, m);
    if (a(0, 0) < 0) a.col(0) = -a.col(0);
    const Vector sum = a.leftCols(n - 1).rowwise().sum();
    if (sum.norm() < 1e-6) continue;
    a.col(n - 1) = -sum / sum.norm();
    if (matrix_rank(a) < m) continue;
    ConicInstance inst;
    inst.A = a;
    inst.provenance = Provenance::generated;
    try {
      const double rho = goffin_oracle(a);
      if (rho > -rho_target) continue;
      inst.known_rho = rho;
    } catch (const UnsupportedInstance&) {
      // Too large to measure; x = (1, …, 1, ‖sum‖) > 0 with Ax = 0 and full
      // rank already place 0 in the interior of the hull.
    }
    return inst;
  }
  throw std::runtime_error("gen_kernel_feasible: resampling budget exceeded");
}

ConicInstance gen_image_feasible(Index m, Index n, double rho_target, std::uint64_t seed) {
  if (m < 1 || n < 1) throw PreconditionError("gen_image_feasible: empty shape");
  if (!(rho_target > 0 && rho_target < 1)) throw PreconditionError("gen_image_feasible: need 0 < rho_target < 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(rho_target, 1.0);
  ConicInstance inst;
  inst.provenance = Provenance::generated;
  inst.known_rho = rho_target;
  if (m == 1) {
    inst.A = Matrix::Ones(1, n);
    return inst;
  }
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const Vector ystar = random_unit(rng, m);
    Matrix a(m, n);
    for (Index j = 0; j < n; ++j) {
      const double c = j == 0 ? rho_target : unif(rng);
      Vector w = random_unit(rng, m);
      w -= w.dot(ystar) * ystar;
      if (w.norm() < 1e-8) {
        --j;
        continue;
      }
      w /= w.norm();
      a.col(j) = c * ystar + std::sqrt(1 - c * c) * w;
    }
    if (n >= m && matrix_rank(a) < m) continue;
    inst.A = a;
    return inst;
  }
  throw std::runtime_error("gen_image_feasible: resampling budget exceeded");
}

ConicInstance gen_degenerate(Index m, Index n, Index s, std::uint64_t seed) {
  if (m < 2) throw PreconditionError("gen_degenerate: need m >= 2");
  if (s < 2 || s >= n) throw PreconditionError("gen_degenerate: need 2 <= s < n");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> small(-3, 3);
  std::uniform_int_distribution<int> positive(1, 3);

  const Index hi = std::min(m - 1, s - 1);
  const Index lo = std::max<Index>(1, m - (n - s));
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Index h = hi;
    if (lo <= hi) h = std::uniform_int_distribution<Index>(lo, hi)(rng);

    // S block lives in the first h coordinates and sums to zero.
    Matrix a = Matrix::Zero(m, n);
    for (Index j = 0; j + 1 < s; ++j)
      for (Index i = 0; i < h; ++i) a(i, j) = small(rng);
    a.col(s - 1).head(h) = -a.leftCols(s - 1).topRows(h).rowwise().sum();
    bool zero_col = false;
    for (Index j = 0; j < s; ++j) zero_col = zero_col || a.col(j).isZero(0);
    if (zero_col || matrix_rank(a.leftCols(s)) < h) continue;

    // T block: coordinate h is at least one, so e_h separates it.
    for (Index j = s; j < n; ++j) {
      for (Index i = 0; i < m; ++i) a(i, j) = small(rng);
      a(h, j) = positive(rng);
    }

    // A unimodular change of coordinates keeps both supports and integrality.
    Matrix g = Matrix::Identity(m, m);
    for (Index i = 1; i < m; ++i)
      for (Index j = 0; j < i; ++j) g(i, j) = std::uniform_int_distribution<int>(-1, 1)(rng);
    std::vector<Index> rows(m);
    std::iota(rows.begin(), rows.end(), 0);
    std::shuffle(rows.begin(), rows.end(), rng);
    Matrix mixed = g * a;
    Matrix permuted_rows(m, n);
    for (Index i = 0; i < m; ++i) permuted_rows.row(i) = mixed.row(rows[i]);

    std::vector<Index> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix out(m, n);
    Supports sup;
    for (Index j = 0; j < n; ++j) {
      out.col(j) = permuted_rows.col(perm[j]);
      (perm[j] < s ? sup.S : sup.T).push_back(j);
    }
    if (lo <= hi && matrix_rank(out) < m) continue;

    if (n <= 12 && m <= 6) {
      const ExactSupports ex = exact_support_oracle(out);
      if (ex.S != sup.S || ex.T != sup.T) continue;
    }
    ConicInstance inst;
    inst.A = out;
    inst.is_integer = true;
    inst.provenance = Provenance::generated;
    inst.known_rho = 0.0;
    inst.known_supports = sup;
    return inst;
  }
  throw std::runtime_error("gen_degenerate: resampling budget exceeded");
}

}  // namespace conic
