#include "conic/exact.hpp"

#include "conic/conditioning.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>

namespace conic {

RationalMatrix to_rational(const Matrix& a) {
  if (!a.allFinite()) throw PreconditionError("to_rational: non-finite entry");
  RationalMatrix out(static_cast<std::size_t>(a.rows()), RationalVector(static_cast<std::size_t>(a.cols())));
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out[i][j] = Rational(a(i, j));
  return out;
}

namespace {

struct Ineq {
  RationalVector c;  // c·v ≤ d
  Rational d;
  std::uint64_t origin;  // original rows combined into this one
};

// Scales so the first nonzero coefficient has absolute value one; rows that
// differ only by a positive factor then compare equal.
void normalize(Ineq& row) {
  for (const Rational& v : row.c) {
    if (v != 0) {
      const Rational s = abs(v);
      for (Rational& w : row.c) w /= s;
      row.d /= s;
      return;
    }
  }
}

bool same_row(const Ineq& a, const Ineq& b) { return a.c == b.c && a.d == b.d; }

}  // namespace

std::optional<RationalVector> fourier_motzkin_solve(const RationalMatrix& g, const RationalVector& h) {
  if (g.size() != h.size()) throw PreconditionError("fourier_motzkin_solve: dimension mismatch");
  if (g.size() > 64) throw UnsupportedInstance("fourier_motzkin_solve: more than 64 inequalities");
  const std::size_t k = g.empty() ? 0 : g[0].size();

  // stages[j] holds the system in variables 0..j−1.
  std::vector<std::vector<Ineq>> stages(k + 1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i].size() != k) throw PreconditionError("fourier_motzkin_solve: ragged matrix");
    Ineq row{g[i], h[i], std::uint64_t{1} << i};
    normalize(row);
    stages[k].push_back(std::move(row));
  }

  for (std::size_t j = k; j-- > 0;) {
    const auto& cur = stages[j + 1];
    std::vector<Ineq> next;
    std::vector<const Ineq*> pos, neg;
    for (const Ineq& row : cur) {
      if (row.c[j] > 0)
        pos.push_back(&row);
      else if (row.c[j] < 0)
        neg.push_back(&row);
      else
        next.push_back(row);
    }
    const int eliminated = static_cast<int>(k - j);
    for (const Ineq* p : pos)
      for (const Ineq* q : neg) {
        const std::uint64_t origin = p->origin | q->origin;
        if (std::popcount(origin) > eliminated + 1) continue;  // Chernikov: redundant
        Ineq row;
        row.c.resize(k);
        const Rational wp = -q->c[j];
        const Rational wq = p->c[j];
        for (std::size_t l = 0; l < k; ++l) row.c[l] = wp * p->c[l] + wq * q->c[l];
        row.c[j] = 0;
        row.d = wp * p->d + wq * q->d;
        row.origin = origin;
        normalize(row);
        next.push_back(std::move(row));
      }
    std::vector<Ineq> unique;
    for (Ineq& row : next) {
      const bool trivial = std::all_of(row.c.begin(), row.c.end(), [](const Rational& v) { return v == 0; });
      if (trivial) {
        if (row.d < 0) return std::nullopt;
        continue;
      }
      if (std::none_of(unique.begin(), unique.end(), [&](const Ineq& u) { return same_row(u, row); }))
        unique.push_back(std::move(row));
    }
    stages[j] = std::move(unique);
  }
  for (const Ineq& row : stages[0])
    if (row.d < 0) return std::nullopt;

  RationalVector v(k, Rational(0));
  for (std::size_t j = 0; j < k; ++j) {
    std::optional<Rational> lower, upper;
    for (const Ineq& row : stages[j + 1]) {
      if (row.c[j] == 0) continue;
      Rational rhs = row.d;
      for (std::size_t l = 0; l < j; ++l) rhs -= row.c[l] * v[l];
      const Rational bound = rhs / row.c[j];
      if (row.c[j] > 0) {
        if (!upper || bound < *upper) upper = bound;
      } else {
        if (!lower || bound > *lower) lower = bound;
      }
    }
    if (lower && upper)
      v[j] = (*lower + *upper) / 2;
    else if (lower)
      v[j] = *lower + 1;
    else if (upper)
      v[j] = *upper - 1;
    else
      v[j] = 0;
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    Rational lhs = 0;
    for (std::size_t l = 0; l < k; ++l) lhs += g[i][l] * v[l];
    if (lhs > h[i]) throw std::logic_error("fourier_motzkin_solve: back substitution produced an infeasible point");
  }
  return v;
}

std::vector<RationalVector> rational_kernel_basis(const RationalMatrix& a, std::size_t cols) {
  RationalMatrix w = a;
  const std::size_t m = w.size();
  std::vector<std::size_t> pivot_cols;
  std::size_t row = 0;
  for (std::size_t c = 0; c < cols && row < m; ++c) {
    std::size_t p = row;
    while (p < m && w[p][c] == 0) ++p;
    if (p == m) continue;
    std::swap(w[p], w[row]);
    const Rational piv = w[row][c];
    for (Rational& v : w[row]) v /= piv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == row || w[i][c] == 0) continue;
      const Rational f = w[i][c];
      for (std::size_t l = 0; l < cols; ++l) w[i][l] -= f * w[row][l];
    }
    pivot_cols.push_back(c);
    ++row;
  }
  std::vector<char> is_pivot(cols, 0);
  for (std::size_t c : pivot_cols) is_pivot[c] = 1;
  std::vector<RationalVector> basis;
  for (std::size_t f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    RationalVector v(cols, Rational(0));
    v[f] = 1;
    for (std::size_t r = 0; r < pivot_cols.size(); ++r) v[pivot_cols[r]] = -w[r][f];
    basis.push_back(std::move(v));
  }
  return basis;
}

ExactSupports exact_support_oracle(const Matrix& a) {
  const std::size_t m = static_cast<std::size_t>(a.rows());
  const std::size_t n = static_cast<std::size_t>(a.cols());
  if (n > 12 || m > 6) throw UnsupportedInstance("exact_support_oracle: beyond n = 12, m = 6");
  if (n == 0 || m == 0) throw PreconditionError("exact_support_oracle: empty matrix");
  const RationalMatrix ar = to_rational(a);

  ExactSupports out;
  out.x.assign(n, Rational(0));
  out.y.assign(m, Rational(0));

  // Kernel side in the coordinates x = Nλ of ker(A).
  const std::vector<RationalVector> basis = rational_kernel_basis(ar, n);
  const std::size_t k = basis.size();
  std::vector<char> in_s(n, 0);
  if (k > 0) {
    for (std::size_t i = 0; i < n; ++i) {
      if (in_s[i]) continue;
      RationalMatrix g(n + 1, RationalVector(k));
      RationalVector h(n + 1, Rational(0));
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t l = 0; l < k; ++l) g[r][l] = -basis[l][r];
      g[n] = g[i];
      h[n] = -1;
      const auto lambda = fourier_motzkin_solve(g, h);
      if (!lambda) continue;
      for (std::size_t r = 0; r < n; ++r) {
        Rational xr = 0;
        for (std::size_t l = 0; l < k; ++l) xr += basis[l][r] * (*lambda)[l];
        out.x[r] += xr;
        if (xr > 0) in_s[r] = 1;
      }
    }
  }

  // Image side: Aᵀy ≥ 0 with a_iᵀy ≥ 1.
  std::vector<char> in_t(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (in_s[i] || in_t[i]) continue;
    RationalMatrix g(n + 1, RationalVector(m));
    RationalVector h(n + 1, Rational(0));
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t l = 0; l < m; ++l) g[r][l] = -ar[l][r];
    g[n] = g[i];
    h[n] = -1;
    const auto y = fourier_motzkin_solve(g, h);
    if (!y) throw std::logic_error("exact_support_oracle: column in neither support");
    for (std::size_t l = 0; l < m; ++l) out.y[l] += (*y)[l];
    for (std::size_t r = 0; r < n; ++r) {
      Rational v = 0;
      for (std::size_t l = 0; l < m; ++l) v += ar[l][r] * (*y)[l];
      if (v > 0) in_t[r] = 1;
    }
  }

  // Exact verification of both witnesses and of the partition.
  for (std::size_t l = 0; l < m; ++l) {
    Rational v = 0;
    for (std::size_t r = 0; r < n; ++r) v += ar[l][r] * out.x[r];
    if (v != 0) throw std::logic_error("exact_support_oracle: kernel witness fails Ax = 0");
  }
  for (std::size_t r = 0; r < n; ++r) {
    Rational v = 0;
    for (std::size_t l = 0; l < m; ++l) v += ar[l][r] * out.y[l];
    if (v < 0 || out.x[r] < 0) throw std::logic_error("exact_support_oracle: witness sign violated");
    if ((out.x[r] > 0) == (v > 0)) throw std::logic_error("exact_support_oracle: supports do not partition");
    (out.x[r] > 0 ? out.S : out.T).push_back(static_cast<Index>(r));
  }
  return out;
}

std::optional<RationalVector> exact_lp_feasible(const Matrix& a, const Vector& b) {
  if (b.size() != a.rows()) throw PreconditionError("exact_lp_feasible: dimension mismatch");
  if (!b.allFinite()) throw PreconditionError("exact_lp_feasible: non-finite entry");
  const RationalMatrix g = to_rational(a);
  RationalVector h(static_cast<std::size_t>(b.size()));
  for (Index i = 0; i < b.size(); ++i) h[i] = Rational(b(i));
  return fourier_motzkin_solve(g, h);
}

}  // namespace conic
