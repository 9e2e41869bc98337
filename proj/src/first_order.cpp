#include "conic/first_order.hpp"

#include <algorithm>
#include <cmath>

namespace conic {

std::string to_string(FOStatus s) {
  switch (s) {
    case FOStatus::separated: return "separated";
    case FOStatus::small_norm: return "small_norm";
    case FOStatus::budget_exhausted: return "budget_exhausted";
  }
  return "unknown";
}

FOState dv_step(const Matrix& a, const FOState& state, Index k) {
  const double nrm2 = a.col(k).squaredNorm();
  if (nrm2 == 0) throw PreconditionError("dv_step: degenerate (zero) column");
  const double dot = a.col(k).dot(state.y);
  FOState out = state;
  out.x(k) -= dot / nrm2;
  out.y -= (dot / nrm2) * a.col(k);
  return out;
}

FOState perceptron_step(const Matrix& a, const FOState& state, Index k) {
  const double nrm = a.col(k).norm();
  if (nrm == 0) throw PreconditionError("perceptron_step: degenerate (zero) column");
  FOState out = state;
  out.y += a.col(k) / nrm;
  out.x(k) += 1.0 / nrm;
  return out;
}

std::int64_t von_neumann_budget(double eps) {
  if (!(eps > 0)) throw PreconditionError("von_neumann: eps must be positive");
  return static_cast<std::int64_t>(std::ceil(1.0 / (eps * eps) - 1e-9));
}

namespace {

struct Prepared {
  Matrix gram_storage;
  const Matrix* gram;
  Vector qnorm;
};

Prepared prepare(const Matrix& a, const SymPosDef<double>& q, const VonNeumannOptions& opts) {
  if (a.rows() != q.dim()) throw PreconditionError("von_neumann: metric dimension mismatch");
  if (a.cols() == 0) throw PreconditionError("von_neumann: matrix has no columns");
  Prepared p;
  if (opts.gram) {
    p.gram = opts.gram;
  } else {
    const Matrix la = q.factor().transpose() * a;  // Q = LLᵀ, so AᵀQA = (LᵀA)ᵀ(LᵀA)
    p.gram_storage = la.transpose() * la;
    p.gram = &p.gram_storage;
  }
  p.qnorm = p.gram->diagonal().cwiseMax(0.0).cwiseSqrt();
  if ((p.qnorm.array() == 0).any()) throw PreconditionError("von_neumann: zero column");
  return p;
}

// True when min_k ⟨â_k, y⟩_Q exceeds min_cosine·‖y‖_Q, with z = AᵀQy.
bool separates(const Vector& z, const Vector& qnorm, double ynorm, double min_cosine) {
  if (min_cosine <= 0) return z.minCoeff() > 0;
  return z.cwiseQuotient(qnorm).minCoeff() > min_cosine * ynorm;
}

Index most_violated(const Vector& z, const Vector& qnorm) {
  Index k = 0;
  double best = z(0) / qnorm(0);
  for (Index j = 1; j < z.size(); ++j) {
    const double v = z(j) / qnorm(j);
    if (v < best) {
      best = v;
      k = j;
    }
  }
  return k;
}

VonNeumannResult finish(const Matrix& a, const Vector& x, const Vector& z, const Vector& qnorm,
                        FOStatus status, std::int64_t iters) {
  VonNeumannResult res;
  res.state.x = x;
  res.state.y = a * x.cwiseQuotient(qnorm);
  res.z = z;
  res.y_norm = std::sqrt(std::max(0.0, x.cwiseQuotient(qnorm).dot(z)));
  res.outcome = {status, iters};
  return res;
}

}  // namespace

VonNeumannResult von_neumann(const Matrix& a, const SymPosDef<double>& q, double eps,
                             const VonNeumannOptions& opts) {
  const std::int64_t bound = von_neumann_budget(eps);
  const std::int64_t budget = opts.budget < 0 ? bound : std::min(opts.budget, bound);
  const Prepared p = prepare(a, q, opts);
  const Matrix& g = *p.gram;
  const Index n = a.cols();

  Vector x = Vector::Zero(n);
  x(0) = 1;
  Vector z = g.col(0) / p.qnorm(0);
  for (std::int64_t it = 0;; ++it) {
    const double ynorm2 = x.cwiseQuotient(p.qnorm).dot(z);
    if (std::sqrt(std::max(0.0, ynorm2)) <= eps) return finish(a, x, z, p.qnorm, FOStatus::small_norm, it);
    if (separates(z, p.qnorm, std::sqrt(std::max(0.0, ynorm2)), opts.min_cosine))
      return finish(a, x, z, p.qnorm, FOStatus::separated, it);
    if (it >= budget) return finish(a, x, z, p.qnorm, FOStatus::budget_exhausted, it);

    const Index k = most_violated(z, p.qnorm);
    const double zk = z(k) / p.qnorm(k);
    const double num = ynorm2 - zk;
    const double den = ynorm2 - 2 * zk + 1;
    const double lambda = den > 0 ? std::clamp(num / den, 0.0, 1.0) : 0.0;
    x *= (1 - lambda);
    x(k) += lambda;
    z = (1 - lambda) * z + (lambda / p.qnorm(k)) * g.col(k);
    if (opts.refresh_period > 0 && (it + 1) % opts.refresh_period == 0) z = g * x.cwiseQuotient(p.qnorm);
    if (opts.observer) opts.observer(VonNeumannStep{it + 1, k, lambda, x, z});
  }
}

VonNeumannResult perceptron_method(const Matrix& a, const SymPosDef<double>& q, double eps,
                                   const VonNeumannOptions& opts) {
  const std::int64_t bound = von_neumann_budget(eps);
  const std::int64_t budget = opts.budget < 0 ? bound : std::min(opts.budget, bound);
  const Prepared p = prepare(a, q, opts);
  const Matrix& g = *p.gram;
  const Index n = a.cols();

  // Unnormalized counts; y = Σ c_i a_i/‖a_i‖_Q and z = AᵀQy.
  Vector c = Vector::Zero(n);
  c(0) = 1;
  Vector z = g.col(0) / p.qnorm(0);
  double total = 1;
  for (std::int64_t it = 0;; ++it) {
    const double ynorm = std::sqrt(std::max(0.0, c.cwiseQuotient(p.qnorm).dot(z))) / total;
    if (ynorm <= eps) return finish(a, c / total, z / total, p.qnorm, FOStatus::small_norm, it);
    if (separates(z / total, p.qnorm, ynorm, opts.min_cosine))
      return finish(a, c / total, z / total, p.qnorm, FOStatus::separated, it);
    if (it >= budget) return finish(a, c / total, z / total, p.qnorm, FOStatus::budget_exhausted, it);
    const Index k = most_violated(z, p.qnorm);
    c(k) += 1;
    total += 1;
    z += g.col(k) / p.qnorm(k);
    if (opts.observer) {
      const Vector xs = c / total;
      const Vector zs = z / total;
      opts.observer(VonNeumannStep{it + 1, k, 1.0 / total, xs, zs});
    }
  }
}

FirstOrderMethod default_first_order_method() {
  return [](const Matrix& a, const SymPosDef<double>& q, double eps, const VonNeumannOptions& o) {
    return von_neumann(a, q, eps, o);
  };
}

std::optional<FirstOrderMethod> first_order_method_by_name(const std::string& name) {
  if (name == "vonneumann") return default_first_order_method();
  if (name == "perceptron")
    return FirstOrderMethod([](const Matrix& a, const SymPosDef<double>& q, double eps, const VonNeumannOptions& o) {
      return perceptron_method(a, q, eps, o);
    });
  return std::nullopt;
}

}  // namespace conic
