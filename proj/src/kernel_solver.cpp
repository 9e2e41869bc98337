#include "conic/kernel_solver.hpp"

#include "conic/conditioning.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace conic {

Vector to_original_scale(const Matrix& a, const Vector& x_normalized) {
  if (x_normalized.size() != a.cols()) throw PreconditionError("to_original_scale: dimension mismatch");
  Vector out = x_normalized;
  for (Index j = 0; j < a.cols(); ++j) {
    const double nrm = a.col(j).norm();
    if (nrm > 0) out(j) /= nrm;
  }
  return out;
}

double KernelState::log_q_factor() const {
  return log_shrink - static_cast<double>(t) * std::log1p(3 * eps);
}

double KernelState::column_qnorm(Index pos) const {
  return a_cur.col(pos).norm() * std::exp(log_q_factor());
}

double KernelState::y_qnorm() const { return y.norm() * std::exp(log_q_factor()); }

Matrix KernelState::metric() const {
  return transform.transpose() * transform * std::exp(2 * log_q_factor());
}

Matrix rescale_columns(const Matrix& a, const Vector& y) {
  const double nrm = y.norm();
  if (nrm == 0) throw PreconditionError("rescale_columns: y must be nonzero");
  const Vector yh = y / nrm;
  return a + yh * (yh.transpose() * a);
}

SymPosDef<double> rescale_metric(const SymPosDef<double>& q, const Vector& y, double eps) {
  const Vector qy = q.matrix() * y;
  const double yq2 = y.dot(qy);
  if (!(yq2 > 0)) throw PreconditionError("rescale_metric: y must be nonzero");
  const double s = (1 + 3 * eps) * (1 + 3 * eps);
  Matrix next = (q.matrix() + (3.0 / yq2) * qy * qy.transpose()) / s;
  return SymPosDef<double>((next + next.transpose()) / 2);
}

namespace {

constexpr std::int64_t kRefreshSteps = 10'000;
constexpr std::int64_t kRefreshRescalings = 16;

constexpr double kMagnitudeCap = 1e64;
constexpr double kPositiveProjection = 1e-9;

void refresh(KernelState& s) {
  s.y = s.a_cur * s.x;
  s.z = s.a_cur.transpose() * s.y;
  s.gram = s.a_cur.transpose() * s.a_cur;
  s.pix = s.pi * s.x;
}

void keep_representable(KernelState& s) {
  const double big = s.a_cur.cwiseAbs().maxCoeff();
  if (big <= kMagnitudeCap) return;
  s.a_cur /= big;
  s.transform /= big;
  s.y /= big;
  s.z /= big * big;
  s.gram /= big * big;
  s.log_shrink += std::log(big);
}

// Restricts the state to the columns in `active`, resets x to all ones and
// recomputes everything derived from them. The accumulated stretch is kept.
void reset_to(KernelState& s, std::vector<Index> active) {
  s.S = std::move(active);
  s.in_T.assign(s.S.size(), 0);
  const Index k = static_cast<Index>(s.S.size());
  Matrix sub(s.a_hat.rows(), k);
  for (Index i = 0; i < k; ++i) sub.col(i) = s.a_hat.col(s.S[i]);
  s.a_cur = s.transform * sub;
  s.x = Vector::Ones(k);
  s.pi = k > 0 ? kernel_projector(sub).matrix : Matrix(0, 0);
  refresh(s);
}

Index rank_of(const Matrix& a_hat, const std::vector<Index>& cols) {
  if (cols.empty()) return 0;
  Matrix sub(a_hat.rows(), static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) sub.col(static_cast<Index>(i)) = a_hat.col(cols[i]);
  return matrix_rank(sub);
}

double log_base(double x, double base) { return std::log(x) / std::log(base); }

KernelResult run_kernel(const Matrix& a, const KernelOptions& opts, bool max_support) {
  const auto started = std::chrono::steady_clock::now();
  if (a.rows() < 1 || a.cols() < 1) throw PreconditionError("kernel solver: empty matrix");
  if (!a.allFinite()) throw PreconditionError("kernel solver: non-finite entry");
  const Index m = a.rows();
  const Index n = a.cols();
  const bool integral = is_integral(a);
  if (max_support && !integral) throw PreconditionError("max_support_kernel: entries must be integers");

  KernelResult result;
  SolveReport& rep = result.report;

  KernelState s;
  s.eps = opts.limits.epsilon.value_or(default_epsilon(m));
  if (!(s.eps > 0)) throw PreconditionError("kernel solver: epsilon must be positive");
  s.a_hat = normalize_columns(a);
  s.transform = Matrix::Identity(m, m);

  std::vector<Index> zero_cols, nonzero;
  for (Index j = 0; j < n; ++j) (a.col(j).isZero(0) ? zero_cols : nonzero).push_back(j);

  const bool any_nonzero = !nonzero.empty();
  s.theta = (max_support && any_nonzero) ? theta(a) : 0.0;
  const double l_est = integral ? static_cast<double>(encoding_length(a)) : 64.0 * static_cast<double>(m);
  const std::int64_t max_rescalings = opts.limits.max_rescalings.value_or(
      static_cast<std::int64_t>(std::ceil(10.0 * m * (std::log2(static_cast<double>(n)) + 4 * l_est))));
  const double kappa = 2.0 / (s.eps * s.eps) *
                       (std::log(static_cast<double>(n)) + (static_cast<double>(max_rescalings) + 4 * l_est) * std::log(2.0));
  const std::int64_t max_iterations = opts.limits.max_iterations.value_or(
      static_cast<std::int64_t>(std::min(std::ceil(kappa) + 1, 4e18)));

  reset_to(s, nonzero);
  Index rank_s = rank_of(s.a_hat, s.S);
  std::int64_t steps_since_refresh = 0;
  std::int64_t rescalings_since_refresh = 0;
  // ‖y‖_Q right after the previous refresh of the current phase, or 0.
  double refreshed_norm = 0;

  auto notify = [&](KernelEvent ev) {
    if (opts.observer) opts.observer(ev);
  };

  rep.status = SolveStatus::no_converge;
  while (true) {
    if (s.S.empty()) {
      rep.status = SolveStatus::solved;
      break;
    }
    // A positive projection is accepted only above rounding level, so a
    // column whose kernel component is exactly zero cannot slip in.
    if (s.pix.minCoeff() > kPositiveProjection * s.x.cwiseAbs().maxCoeff()) {
      rep.status = SolveStatus::solved;
      break;
    }
    if (rep.fo_iters >= max_iterations) {
      rep.message = "iteration limit reached";
      break;
    }
    const double ynorm = s.y.norm();
    if (ynorm == 0) {
      rep.message = "aggregate vanished without a positive projection";
      break;
    }
    const Vector col_norms = s.a_cur.colwise().norm();
    Index k = 0;
    double best = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < static_cast<Index>(s.S.size()); ++j) {
      const double v = s.z(j) / col_norms(j);
      if (v < best) {
        best = v;
        k = j;
      }
    }
    const double cosine = best / ynorm;

    const bool take_step = opts.rescaling ? cosine < -s.eps : cosine < 0;
    if (take_step) {
      const double before = s.y_qnorm();
      const double delta = -s.z(k) / (col_norms(k) * col_norms(k));
      s.x(k) += delta;
      s.y += delta * s.a_cur.col(k);
      s.z += delta * s.gram.col(k);
      s.pix += delta * s.pi.col(k);
      ++rep.fo_iters;
      if (++steps_since_refresh >= kRefreshSteps) {
        refresh(s);
        steps_since_refresh = 0;
        // Each step shrinks ‖y‖_Q by √(1−cos²) with |cos| > ε, so a whole
        // period should leave almost nothing. If the y rebuilt from x has
        // not even halved, the updates to x were lost to rounding.
        const double now = s.y_qnorm();
        if (opts.rescaling && refreshed_norm > 0 && now >= 0.5 * refreshed_norm) {
          rep.message = "aggregate stuck at rounding level";
          break;
        }
        refreshed_norm = now;
      }
      notify({KernelEventKind::dv_step, s, k, cosine, before, s.y_qnorm()});
      continue;
    }

    if (!max_support && cosine > 0) {
      rep.status = SolveStatus::infeasible_detected;
      rep.message = "rescaled aggregate strictly separates all columns";
      break;
    }
    if (!opts.rescaling) {
      rep.status = SolveStatus::infeasible_detected;
      rep.message = "no column makes an obtuse angle with the aggregate";
      break;
    }
    if (rep.rescalings >= max_rescalings) {
      rep.message = "rescaling limit reached";
      break;
    }

    const Matrix a_before = opts.observer ? s.a_cur : Matrix();
    const Vector y_before = s.y;
    const double before = s.y_qnorm();
    kernel_rescale(s);
    ++rep.rescalings;
    refreshed_norm = 0;
    if (++rescalings_since_refresh >= kRefreshRescalings) {
      refresh(s);
      rescalings_since_refresh = 0;
    }
    keep_representable(s);
    notify({KernelEventKind::rescale, s, k, cosine, before, s.y_qnorm(), &a_before, &y_before, cosine});

    if (!max_support) continue;
    const double limit = 1.0 / s.theta;
    std::vector<Index> keep;
    for (Index j = 0; j < static_cast<Index>(s.S.size()); ++j) {
      if (!s.in_T[j] && s.column_qnorm(j) > limit) s.in_T[j] = 1;
      if (!s.in_T[j]) keep.push_back(s.S[j]);
    }
    if (keep.size() < s.S.size() && rank_of(s.a_hat, keep) < rank_s) {
      rep.removals += static_cast<std::int64_t>(s.S.size() - keep.size());
      reset_to(s, keep);
      rank_s = rank_of(s.a_hat, s.S);
      steps_since_refresh = 0;
      rescalings_since_refresh = 0;
      notify({KernelEventKind::removal, s});
    }
  }

  KernelCertificate& cert = result.certificate;
  cert.x = Vector::Zero(n);
  if (rep.status == SolveStatus::solved) {
    const double top = s.S.empty() ? 1.0 : s.pix.maxCoeff();
    for (std::size_t i = 0; i < s.S.size(); ++i) cert.x(s.S[i]) = s.pix(static_cast<Index>(i)) / top;
    for (Index j : zero_cols) cert.x(j) = 1.0;
    for (Index j = 0; j < n; ++j)
      if (cert.x(j) > 0) cert.support.push_back(j);
    cert.residual = (s.a_hat * cert.x).cwiseAbs().maxCoeff();
    cert.min_support_value = cert.support.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    for (Index j : cert.support) cert.min_support_value = std::min(cert.min_support_value, cert.x(j));
    rep.residual = cert.residual;
    rep.margin = cert.min_support_value;
    rep.check("residual", 1e-8 * static_cast<double>(n), cert.residual, cert.residual <= 1e-8 * static_cast<double>(n));
  }

  if (opts.limits.known_rho && *opts.limits.known_rho < 0) {
    const double rho = std::abs(*opts.limits.known_rho);
    if (!opts.rescaling) {
      const double bound = static_cast<double>(coordinate_descent_step_bound(n, -rho));
      rep.check("coordinate_descent_steps", bound, static_cast<double>(rep.fo_iters), rep.fo_iters <= bound);
    } else if (!max_support) {
      const double bound = std::ceil(static_cast<double>(m) * log_base(1.0 / rho, 1.5));
      rep.check("rescalings", bound, static_cast<double>(rep.rescalings), rep.rescalings <= bound);
    }
  }
  if (max_support && any_nonzero) {
    const double bound = static_cast<double>(m) +
                         std::ceil(static_cast<double>(m) * log_base(2.0 / std::pow(s.theta, 4), 1.5));
    rep.check("rescalings", bound, static_cast<double>(rep.rescalings), rep.rescalings <= bound);
  }
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace

void kernel_rescale(KernelState& s) {
  const double ynorm = s.y.norm();
  if (ynorm == 0) throw PreconditionError("kernel_rescale: y must be nonzero");
  const Vector yh = s.y / ynorm;
  const Eigen::RowVectorXd w = s.z.transpose() / ynorm;  // ŷᵀ a_cur
  s.a_cur += yh * w;
  s.transform += yh * (yh.transpose() * s.transform);
  s.gram += (3.0 / (ynorm * ynorm)) * s.z * s.z.transpose();
  s.y *= 2;
  s.z *= 4;
  ++s.t;
}

KernelResult full_support_kernel(const Matrix& a, const KernelOptions& opts) {
  return run_kernel(a, opts, false);
}

KernelResult max_support_kernel(const Matrix& a, const KernelOptions& opts) {
  return run_kernel(a, opts, true);
}

std::int64_t coordinate_descent_step_bound(Index n, double rho) {
  const double r = std::abs(rho);
  if (!(r > 0 && r <= 1)) throw PreconditionError("coordinate_descent_step_bound: need 0 < |rho| <= 1");
  if (r == 1) return 1;
  return static_cast<std::int64_t>(std::ceil(std::log(static_cast<double>(n) / r) / (-0.5 * std::log1p(-r * r)))) + 1;
}

}  // namespace conic
