#include "conic/oracle_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>

namespace conic {

PolyhedralOracle::PolyhedralOracle(Matrix a) : a_(std::move(a)), norms_(a_.colwise().norm()) {
  if (a_.cols() == 0 || (norms_.array() == 0).any())
    throw PreconditionError("PolyhedralOracle: columns must be nonzero");
}

std::optional<Vector> PolyhedralOracle::query(const Vector& v) {
  if (v.size() != a_.rows()) throw PreconditionError("PolyhedralOracle: dimension mismatch");
  const Vector c = (a_.transpose() * v).cwiseQuotient(norms_);
  Index k = 0;
  for (Index j = 1; j < c.size(); ++j)
    if (c(j) < c(k)) k = j;
  if (c(k) > 0) return std::nullopt;
  return Vector(a_.col(k));
}

namespace {

bool same_bits(const Vector& a, const Vector& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

void check_answer(const Vector& a, const Vector& v, Index m) {
  if (a.size() != m) throw OracleFault("oracle returned a vector of the wrong dimension");
  if (!a.allFinite()) throw OracleFault("oracle returned a non-finite vector");
  if (a.isZero(0)) throw OracleFault("oracle returned the zero vector");
  // The oracle may evaluate aᵀv with a different summation order, so allow
  // rounding-level disagreement.
  if (a.dot(v) > 1e-12 * a.norm() * v.norm())
    throw OracleFault("oracle returned a vector with positive inner product against the query");
}

}  // namespace

OracleVonNeumannResult oracle_von_neumann(SeparationOracle& oracle, const SymPosDef<double>& q, double eps,
                                          const OracleOptions& opts) {
  const Index m = oracle.dim();
  if (q.dim() != m) throw PreconditionError("oracle_von_neumann: metric dimension mismatch");
  const std::int64_t bound = von_neumann_budget(eps);
  const std::int64_t budget = opts.budget < 0 ? bound : std::min(opts.budget, bound);

  OracleVonNeumannResult res;
  res.y = Vector::Zero(m);
  const Vector origin = Vector::Zero(m);
  ++res.oracle_calls;
  std::optional<Vector> first = oracle.query(origin);
  if (!first) {
    res.status = FOStatus::separated;
    return res;
  }
  if (opts.check_faults) check_answer(*first, origin, m);

  std::vector<double> qnorms;
  auto& vecs = res.active.vectors;
  std::vector<double> x;
  vecs.push_back(*first);
  qnorms.push_back(q.norm(*first));
  x.push_back(1.0);
  Vector y = *first / qnorms[0];

  for (std::int64_t it = 0;; ++it) {
    const Vector v = q.matrix() * y;
    const double yq2 = std::max(0.0, y.dot(v));
    if (std::sqrt(yq2) <= eps) {
      res.status = FOStatus::small_norm;
      break;
    }
    ++res.oracle_calls;
    std::optional<Vector> ans = oracle.query(v);
    if (!ans) {
      res.status = FOStatus::separated;
      break;
    }
    if (opts.check_faults) check_answer(*ans, v, m);
    if (it >= budget) {
      res.status = FOStatus::budget_exhausted;
      break;
    }
    std::size_t k = vecs.size();
    for (std::size_t i = 0; i < vecs.size(); ++i)
      if (same_bits(vecs[i], *ans)) {
        k = i;
        break;
      }
    if (k == vecs.size()) {
      vecs.push_back(*ans);
      qnorms.push_back(q.norm(*ans));
      x.push_back(0.0);
    }
    const double ak_y = ans->dot(v) / qnorms[k];  // ⟨â_k, y⟩_Q
    const double num = yq2 - ak_y;
    const double den = yq2 - 2 * ak_y + 1;
    const double lambda = den > 0 ? std::clamp(num / den, 0.0, 1.0) : 0.0;
    for (double& xi : x) xi *= (1 - lambda);
    x[k] += lambda;
    y = (1 - lambda) * y + (lambda / qnorms[k]) * vecs[k];
    ++res.iterations;
    if (res.iterations % 10'000 == 0) {
      y.setZero();
      for (std::size_t i = 0; i < vecs.size(); ++i) y += (x[i] / qnorms[i]) * vecs[i];
    }
    if (opts.observer) {
      res.active.x = Eigen::Map<const Vector>(x.data(), static_cast<Index>(x.size()));
      opts.observer(res.active, v, *ans);
    }
  }
  res.active.x = Eigen::Map<const Vector>(x.data(), static_cast<Index>(x.size()));
  res.y = y;
  return res;
}

OracleResult strict_conic_feasibility(SeparationOracle& oracle, const Limits& limits, const OracleOptions& opts) {
  const auto started = std::chrono::steady_clock::now();
  const Index m = oracle.dim();
  if (m < 1) throw PreconditionError("strict_conic_feasibility: dimension must be positive");
  const double eps = limits.epsilon.value_or(default_epsilon(m));
  const std::int64_t vn_bound = von_neumann_budget(eps);
  const std::int64_t max_rescalings = limits.max_rescalings.value_or(
      static_cast<std::int64_t>(std::ceil(static_cast<double>(m) * 65.0 / std::log2(1.5))));
  const std::int64_t max_iterations = limits.max_iterations.value_or((max_rescalings + 1) * vn_bound);

  OracleResult out;
  SolveReport& rep = out.report;
  out.y = Vector::Zero(m);
  SymPosDef<double> r = SymPosDef<double>::identity(m);
  SymPosDef<double> q = SymPosDef<double>::identity(m);
  double min_ratio = std::numeric_limits<double>::infinity();
  std::size_t max_active = 0;
  std::int64_t max_vn = 0;

  rep.status = SolveStatus::no_converge;
  while (true) {
    if (rep.fo_iters >= max_iterations) {
      rep.message = "iteration limit reached";
      break;
    }
    OracleOptions call = opts;
    call.budget = std::min(vn_bound, max_iterations - rep.fo_iters);
    if (opts.budget >= 0) call.budget = std::min(call.budget, opts.budget);
    const OracleVonNeumannResult res = oracle_von_neumann(oracle, q, eps, call);
    rep.fo_iters += res.iterations;
    rep.oracle_calls += res.oracle_calls;
    max_vn = std::max(max_vn, res.iterations);
    max_active = std::max(max_active, res.active.vectors.size());
    if (res.status == FOStatus::separated) {
      out.y = q.matrix() * res.y;
      rep.status = SolveStatus::solved;
      break;
    }
    if (res.status == FOStatus::budget_exhausted) {
      rep.message = "first-order budget exhausted";
      break;
    }
    if (q.norm(res.y) <= 1e-12) {
      rep.status = SolveStatus::infeasible_detected;
      rep.message = "oracle answers combine to zero; the cone has empty interior";
      break;
    }
    if (rep.rescalings >= max_rescalings) {
      rep.message = "rescaling limit reached";
      break;
    }
    // R ← (R + Σ x_i a_iaᵢᵀ/‖a_i‖²_Q)/(1+ε), applied to the Cholesky factor.
    std::vector<Vector> cols;
    for (std::size_t i = 0; i < res.active.vectors.size(); ++i) {
      const double xi = res.active.x(static_cast<Index>(i));
      if (xi > 0) cols.push_back(std::sqrt(xi) * res.active.vectors[i] / r.dual_norm(res.active.vectors[i]));
    }
    Matrix v(m, static_cast<Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) v.col(static_cast<Index>(i)) = cols[i];
    const double before = r.log_det();
    r = r.updated(v, 1 / (1 + eps));
    q = r.inverted();
    ++rep.rescalings;
    min_ratio = std::min(min_ratio, std::exp(r.log_det() - before));
    // Same resolution limit as the matrix image solver.
    if (!(r.matrix().diagonal().maxCoeff() <= 1e15 && r.condition_estimate() <= 1e15)) {
      rep.message = "metric too ill-conditioned for double precision";
      break;
    }
  }

  rep.check("von_neumann_iterations", static_cast<double>(vn_bound), static_cast<double>(max_vn), max_vn <= vn_bound);
  rep.check("active_set_size", static_cast<double>(vn_bound), static_cast<double>(max_active),
            static_cast<std::int64_t>(max_active) <= vn_bound);
  if (rep.rescalings > 0)
    rep.check("det_ratio_per_rescale", 16.0 / 9.0, min_ratio, min_ratio >= (16.0 / 9.0) * (1 - 1e-8));
  if (limits.known_rho && *limits.known_rho > 0) {
    const double bound = std::ceil(static_cast<double>(m) * std::log(2.0 / *limits.known_rho) / std::log(1.5));
    rep.check("rescalings", bound, static_cast<double>(rep.rescalings), rep.rescalings <= bound);
  }
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return out;
}

}  // namespace conic
