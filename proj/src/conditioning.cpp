#include "conic/conditioning.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>

namespace conic {

namespace {

// Calls f(idx) for every k-subset of {0,…,n−1} in lexicographic order.
// Stops early when f returns false.
void for_each_subset(int n, int k, const std::function<bool(const std::vector<int>&)>& f) {
  if (k < 0 || k > n) return;
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    if (!f(idx)) return;
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  double c = 1;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

void require_nonzero(const Matrix& a, const char* who) {
  if (a.size() == 0 || a.isZero(0)) throw PreconditionError(std::string(who) + ": A must be nonzero");
}

// Normalized columns expressed in an orthonormal basis of im(A).
Matrix image_coordinates(const Matrix& a) {
  const Matrix u = column_space_basis(a);
  return u.transpose() * normalize_columns(a);
}

double min_dot(const Matrix& p, const Vector& y) { return (p.transpose() * y).minCoeff(); }

// Distance from the origin to conv(columns of p), by minimum-norm points of
// the affine hulls of affinely independent subsets.
double min_norm_distance(const Matrix& p, int max_size) {
  const int n = static_cast<int>(p.cols());
  double best = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= std::min(max_size, n); ++k) {
    for_each_subset(n, k, [&](const std::vector<int>& s) {
      Matrix ps(p.rows(), k);
      for (int i = 0; i < k; ++i) ps.col(i) = p.col(s[i]);
      Matrix kkt = Matrix::Zero(k + 1, k + 1);
      kkt.topLeftCorner(k, k) = ps.transpose() * ps;
      kkt.block(0, k, k, 1).setOnes();
      kkt.block(k, 0, 1, k).setOnes();
      Eigen::FullPivLU<Matrix> lu(kkt);
      lu.setThreshold(1e-11);
      if (lu.rank() < k + 1) return true;
      Vector rhs = Vector::Zero(k + 1);
      rhs(k) = 1;
      const Vector sol = lu.solve(rhs);
      if (sol.head(k).minCoeff() < -1e-12) return true;
      best = std::min(best, (ps * sol.head(k)).norm());
      return true;
    });
  }
  return best;
}

}  // namespace

double hadamard_delta(const Matrix& a) {
  require_nonzero(a, "hadamard_delta");
  std::vector<Index> order(a.cols());
  std::iota(order.begin(), order.end(), 0);
  const Vector norms = a.colwise().norm();
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) { return norms(i) > norms(j); });
  std::vector<Index> chosen;
  double product = 1;
  for (Index j : order) {
    if (norms(j) == 0 || static_cast<Index>(chosen.size()) == a.rows()) break;
    Matrix trial(a.rows(), chosen.size() + 1);
    for (std::size_t i = 0; i < chosen.size(); ++i) trial.col(i) = a.col(chosen[i]);
    trial.col(chosen.size()) = a.col(j);
    if (matrix_rank(trial) == static_cast<Index>(chosen.size()) + 1) {
      chosen.push_back(j);
      product *= norms(j);
    }
  }
  return product;
}

double theta(const Matrix& a) {
  const double d = hadamard_delta(a);
  const double m = static_cast<double>(a.rows());
  return 1.0 / (m * m * d * d);
}

bool is_integral(const Matrix& a) {
  return a.unaryExpr([](double v) { return std::isfinite(v) && v == std::round(v) && std::abs(v) < 9.007199254740992e15; })
      .all();
}

std::int64_t encoding_length(const Matrix& a) {
  if (!is_integral(a)) throw PreconditionError("encoding_length: entries must be integers");
  std::int64_t total = 0;
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) {
      const auto v = static_cast<std::uint64_t>(std::llabs(static_cast<long long>(a(i, j))));
      total += 1 + static_cast<std::int64_t>(std::bit_width(v));
    }
  return total;
}

double goffin_oracle(const Matrix& a, double /*tol*/, std::int64_t max_subsets) {
  require_nonzero(a, "goffin_oracle");
  const Matrix p = image_coordinates(a);
  const int r = static_cast<int>(p.rows());
  const int n = static_cast<int>(p.cols());

  double work = binomial(n, r);
  for (int k = 1; k <= r; ++k) work += binomial(n, k);
  if (work > static_cast<double>(max_subsets))
    throw UnsupportedInstance("goffin_oracle: instance too large for enumeration");

  Matrix diffs(r, n);
  for (int j = 0; j < n; ++j) diffs.col(j) = p.col(j) - p.col(0);
  const Index affine_dim = diffs.isZero(0) ? 0 : matrix_rank(diffs);
  if (affine_dim < r) return min_norm_distance(p, r);

  constexpr double side_tol = 1e-10;
  double min_offset = std::numeric_limits<double>::infinity();
  for_each_subset(n, r, [&](const std::vector<int>& s) {
    Vector w(r);
    if (r == 1) {
      w(0) = 1;
    } else {
      Matrix d(r, r - 1);
      for (int i = 1; i < r; ++i) d.col(i - 1) = p.col(s[i]) - p.col(s[0]);
      Eigen::ColPivHouseholderQR<Matrix> qr(d);
      qr.setThreshold(1e-10);
      if (qr.rank() < r - 1) return true;
      w = Matrix(qr.householderQ()).col(r - 1);
    }
    double c = w.dot(p.col(s[0]));
    const Vector side = (p.transpose() * w).array() - c;
    if (side.maxCoeff() > side_tol) {
      if (side.minCoeff() < -side_tol) return true;
      c = -c;
    }
    min_offset = std::min(min_offset, c);
    return true;
  });
  if (min_offset > 1e-12) return -min_offset;
  if (min_offset < -1e-12) return min_norm_distance(p, r);
  return 0.0;
}

GridEstimate goffin_grid(const Matrix& a, double tol, std::int64_t max_cells) {
  require_nonzero(a, "goffin_grid");
  const Matrix p = image_coordinates(a);
  const Index r = p.rows();
  if (r > 3) throw UnsupportedInstance("goffin_grid: image dimension above 3");
  if (r == 1) {
    Vector plus(1), minus(1);
    plus << 1;
    minus << -1;
    return {std::max(min_dot(p, plus), min_dot(p, minus)), 0.0};
  }

  struct Cell {
    double ub;
    double u0, v0, half;
    int face;
    bool operator<(const Cell& o) const { return ub < o.ub; }
  };
  double best = -std::numeric_limits<double>::infinity();
  std::priority_queue<Cell> queue;
  std::int64_t evaluations = 0;

  // r = 2: cells are angle intervals [u0 − half, u0 + half]; the chord
  // length to the centre is at most 2 sin(half/2).
  // r = 3: cells are squares on the six faces of the cube, mapped radially
  // onto the sphere; that map is 1-Lipschitz, so half·√2 bounds the chord.
  auto point = [&](int face, double u, double v) {
    Vector y(r);
    if (r == 2) {
      y << std::cos(u), std::sin(u);
      return y;
    }
    const int axis = face / 2;
    const double sgn = (face % 2 == 0) ? 1.0 : -1.0;
    y(axis) = sgn;
    y((axis + 1) % 3) = u;
    y((axis + 2) % 3) = v;
    return Vector(y / y.norm());
  };
  auto push = [&](int face, double u, double v, double half) {
    const double val = min_dot(p, point(face, u, v));
    ++evaluations;
    best = std::max(best, val);
    const double radius = (r == 2) ? 2 * std::sin(half / 2) : half * std::sqrt(2.0);
    queue.push({val + radius, u, v, half, face});
  };

  if (r == 2) {
    constexpr int k0 = 64;
    const double half = M_PI / k0;
    for (int i = 0; i < k0; ++i) push(0, (2 * i + 1) * half, 0, half);
  } else {
    constexpr int k0 = 8;
    const double half = 1.0 / k0;
    for (int f = 0; f < 6; ++f)
      for (int i = 0; i < k0; ++i)
        for (int j = 0; j < k0; ++j) push(f, -1 + (2 * i + 1) * half, -1 + (2 * j + 1) * half, half);
  }

  while (true) {
    const Cell top = queue.top();
    if (top.ub - best <= tol || evaluations >= max_cells) return {best, std::max(0.0, top.ub - best)};
    queue.pop();
    const double h = top.half / 2;
    if (r == 2) {
      push(0, top.u0 - h, 0, h);
      push(0, top.u0 + h, 0, h);
    } else {
      for (int du : {-1, 1})
        for (int dv : {-1, 1}) push(top.face, top.u0 + du * h, top.v0 + dv * h, h);
    }
  }
}

Vector project_onto_image_cone(const Matrix& a, const Vector& c) {
  const int n = static_cast<int>(a.cols());
  const int m = static_cast<int>(a.rows());
  if (c.size() != m) throw PreconditionError("project_onto_image_cone: dimension mismatch");
  double work = 0;
  for (int k = 0; k <= std::min(m, n); ++k) work += binomial(n, k);
  if (work > 2e6) throw UnsupportedInstance("project_onto_image_cone: instance too large");

  const Vector norms = a.colwise().norm();
  auto feasible = [&](const Vector& z) {
    for (int j = 0; j < n; ++j)
      if (a.col(j).dot(z) < -1e-10 * norms(j)) return false;
    return true;
  };
  Vector best = Vector::Zero(m);
  double best_dist = c.norm();
  if (feasible(c)) return c;
  for (int k = 1; k <= std::min(m, n); ++k) {
    for_each_subset(n, k, [&](const std::vector<int>& s) {
      Matrix aj(m, k);
      for (int i = 0; i < k; ++i) aj.col(i) = a.col(s[i]);
      if (aj.isZero(0) || matrix_rank(aj) < k) return true;
      const Matrix basis = column_space_basis(aj);
      const Vector z = c - basis * (basis.transpose() * c);
      const double dist = (c - z).norm();
      if (dist < best_dist && feasible(z)) {
        best_dist = dist;
        best = z;
      }
      return true;
    });
  }
  return best;
}

double omega_oracle(const Matrix& a, const std::vector<Index>& t_star, double /*tol*/) {
  if (t_star.empty()) throw PreconditionError("omega_oracle: index set must be nonempty");
  const Matrix ah = normalize_columns(a);
  double result = std::numeric_limits<double>::infinity();
  for (Index i : t_star) {
    if (i < 0 || i >= a.cols()) throw PreconditionError("omega_oracle: index out of range");
    result = std::min(result, project_onto_image_cone(a, ah.col(i)).norm());
  }
  return result;
}

ConditionReport condition_report(const Matrix& a) {
  ConditionReport rep;
  rep.delta = hadamard_delta(a);
  rep.theta = theta(a);
  if (is_integral(a)) rep.encoding_length = encoding_length(a);
  try {
    rep.rho = goffin_oracle(a);
    rep.rho_accuracy = 1e-9;
  } catch (const UnsupportedInstance&) {
    rep.rho = 0;
    rep.rho_accuracy = std::numeric_limits<double>::infinity();
  }
  return rep;
}

}  // namespace conic
