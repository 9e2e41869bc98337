#include "conic/image_solver.hpp"

#include "conic/conditioning.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace conic {

void measure_image_certificate(const Matrix& a, ImageCertificate& cert) {
  if (cert.y.size() != a.rows()) throw PreconditionError("image certificate: dimension mismatch");
  const double ynorm = cert.y.norm();
  std::vector<char> in_support(a.cols(), 0);
  for (Index i : cert.support) in_support.at(i) = 1;
  cert.min_margin = cert.support.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  cert.residual_zero = 0;
  for (Index i = 0; i < a.cols(); ++i) {
    const double cn = a.col(i).norm();
    const double c = (ynorm > 0 && cn > 0) ? a.col(i).dot(cert.y) / (cn * ynorm) : 0.0;
    if (in_support[i])
      cert.min_margin = std::min(cert.min_margin, c);
    else
      cert.residual_zero = std::max(cert.residual_zero, std::abs(c));
  }
}

ImageState::ImageState(Index dim)
    : R(SymPosDef<double>::identity(dim)), Q(SymPosDef<double>::identity(dim)), U(Matrix::Identity(dim, dim)), r(dim) {}

Vector ImageState::unit_column(Index pos) const { return A_cur.col(pos).normalized(); }

double ImageState::column_qnorm(Index pos) const { return R.dual_norm(unit_column(pos)); }

Matrix ImageState::reconstruct_R() const {
  Matrix out = alpha * Matrix::Identity(r, r);
  for (Index pos = 0; pos < static_cast<Index>(T.size()); ++pos) {
    const Vector u = unit_column(pos);
    out += gamma(T[pos]) * u * u.transpose();
  }
  return out;
}

Matrix image_rescale_matrix(const SymPosDef<double>& r, const Matrix& a, const Vector& x, double eps) {
  if (x.size() != a.cols() || a.rows() != r.dim()) throw PreconditionError("image rescale: dimension mismatch");
  if (x.minCoeff() < -1e-15 || std::abs(x.sum() - 1) > 1e-8)
    throw PreconditionError("image rescale: coefficients must be a convex combination");
  Matrix next = r.matrix();
  for (Index i = 0; i < a.cols(); ++i) {
    if (x(i) <= 0) continue;
    const double qn = r.dual_norm(a.col(i));
    next += (x(i) / (qn * qn)) * a.col(i) * a.col(i).transpose();
  }
  next /= (1 + eps);
  return (next + next.transpose()) / 2;
}

double image_rescale(ImageState& s, const Vector& x) {
  if (x.size() != s.A_cur.cols()) throw PreconditionError("image rescale: dimension mismatch");
  if (x.minCoeff() < -1e-15 || std::abs(x.sum() - 1) > 1e-8)
    throw PreconditionError("image rescale: coefficients must be a convex combination");
  const double before = s.R.log_det();
  // Predicted growth from det(R + VVᵀ) = det(R)·det(I + VᵀR⁻¹V), where the
  // columns of V are √x_i â_i/‖â_i‖_Q.
  std::vector<Index> used;
  for (Index i = 0; i < x.size(); ++i)
    if (x(i) > 0) used.push_back(i);
  Matrix v(s.r, static_cast<Index>(used.size()));
  Vector qn(x.size());
  for (Index i = 0; i < x.size(); ++i) qn(i) = s.R.dual_norm(s.A_cur.col(i));
  for (std::size_t j = 0; j < used.size(); ++j) {
    const Index i = used[j];
    v.col(static_cast<Index>(j)) = std::sqrt(x(i)) * s.A_cur.col(i) / qn(i);
  }
  const Matrix lv = s.R.factor().solve(v);
  const Matrix small = Matrix::Identity(v.cols(), v.cols()) + lv.transpose() * lv;
  const Eigen::LLT<Matrix> small_llt(small);
  const double predicted =
      2 * small_llt.matrixLLT().diagonal().array().log().sum() - static_cast<double>(s.r) * std::log1p(s.eps);

  for (Index i = 0; i < x.size(); ++i) {
    const Index col = s.T[i];
    const double cn = s.A_cur.col(i).norm();
    const double unit_qn2 = (qn(i) / cn) * (qn(i) / cn);
    s.gamma(col) = (s.gamma(col) + x(i) / unit_qn2) / (1 + s.eps);
  }
  s.alpha /= (1 + s.eps);
  // Same matrix as image_rescale_matrix, built by updating the factor.
  s.R = s.R.updated(v, 1 / (1 + s.eps));
  s.Q = s.R.inverted();
  ++s.t;
  s.log_det_ledger += predicted;
  return std::exp(s.R.log_det() - before);
}

std::vector<Index> short_column_scan(const ImageState& s) {
  std::vector<Index> out;
  for (Index pos = 0; pos < static_cast<Index>(s.T.size()); ++pos)
    if (s.column_qnorm(pos) < s.theta) out.push_back(pos);
  return out;
}

double image_remove(ImageState& s, Index pos) {
  const double before = s.R.log_det();
  const Vector a = s.unit_column(pos);
  const double qn = s.R.dual_norm(a);
  const Matrix w = orthocomplement_basis(a);
  const Matrix projected = w.transpose() * s.A_cur;
  std::vector<Index> keep;
  for (Index i = 0; i < projected.cols(); ++i) {
    if (i == pos) continue;
    if (projected.col(i).norm() > 1e-9 * s.A_cur.col(i).norm()) keep.push_back(i);
  }
  Matrix next_a(w.cols(), static_cast<Index>(keep.size()));
  std::vector<Index> next_t;
  for (std::size_t j = 0; j < keep.size(); ++j) {
    const Index i = keep[j];
    next_a.col(static_cast<Index>(j)) = projected.col(i);
    const double shrink = projected.col(i).norm() / s.A_cur.col(i).norm();
    s.gamma(s.T[i]) *= shrink * shrink;
    next_t.push_back(s.T[i]);
  }
  s.A_cur = std::move(next_a);
  s.T = std::move(next_t);
  s.U = s.U * w;
  s.r -= 1;
  s.R = s.R.congruence(w);
  s.Q = s.R.inverted();
  s.log_det_ledger += 2 * std::log(qn);
  return std::exp(s.R.log_det() - before);
}

namespace {

double log_base(double x, double base) { return std::log(x) / std::log(base); }

// Since E(R) contains F_A ∩ B, a full-dimensional F_A with condition ρ keeps
// every eigenvalue of R below roughly (2/ρ)². Beyond 1e15, in scale or in
// conditioning, R and R⁻¹ stop resolving each other in double precision and
// the run cannot say anything reliable, whatever the instance.
constexpr double kMaxScale = 1e15;
// Multiple of u·√κ(R) that a cosine must exceed before a maximum-support
// separation is trusted. Surveys over thousands of degenerate integer
// instances settled on 2¹³; smaller values let spurious separations through.
constexpr double kCosineResolution = 8192;

bool resolvable(const SymPosDef<double>& r) {
  return r.matrix().diagonal().maxCoeff() <= kMaxScale && r.condition_estimate() <= kMaxScale;
}

ImageResult run_image(const Matrix& a, const ImageOptions& opts, bool max_support) {
  const auto started = std::chrono::steady_clock::now();
  if (a.rows() < 1 || a.cols() < 1) throw PreconditionError("image solver: empty matrix");
  if (!a.allFinite()) throw PreconditionError("image solver: non-finite entry");
  const Index m = a.rows();
  const Index n = a.cols();
  const bool integral = is_integral(a);
  if (max_support && !integral) throw PreconditionError("max_support_image: entries must be integers");

  std::vector<Index> nonzero;
  for (Index j = 0; j < n; ++j)
    if (!a.col(j).isZero(0)) nonzero.push_back(j);
  const Index rank = nonzero.empty() ? 0 : matrix_rank(a);
  if (!max_support) {
    if (static_cast<Index>(nonzero.size()) != n) throw PreconditionError("full_support_image: zero column");
    if (rank != m) throw PreconditionError("full_support_image: A must have full row rank");
  }

  const double eps = opts.limits.epsilon.value_or(default_epsilon(m));
  if (!(eps > 0)) throw PreconditionError("image solver: epsilon must be positive");
  const FirstOrderMethod method = opts.method ? opts.method : default_first_order_method();
  const std::int64_t vn_bound = von_neumann_budget(eps);

  ImageResult result;
  SolveReport& rep = result.report;
  ImageCertificate& cert = result.certificate;
  cert.y = Vector::Zero(m);

  ImageState s(std::max<Index>(rank, 1));
  s.eps = eps;
  s.gamma = Vector::Zero(n);
  if (rank == 0) {
    // Every column is zero: no inequality can be strict.
    rep.status = SolveStatus::solved;
    measure_image_certificate(a, cert);
    rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return result;
  }
  if (rank < m) s.U = column_space_basis(a);
  s.T = nonzero;
  s.A_cur.resize(rank, static_cast<Index>(nonzero.size()));
  for (std::size_t j = 0; j < nonzero.size(); ++j) s.A_cur.col(static_cast<Index>(j)) = s.U.transpose() * a.col(nonzero[j]);
  s.theta = max_support ? theta(a) : 0.0;

  const double l_est = integral ? static_cast<double>(encoding_length(a)) : 64.0 * static_cast<double>(m);
  double potential_bound = 0;
  if (max_support) {
    const double th2 = s.theta * s.theta;
    potential_bound = static_cast<double>(m) + 1 +
                      std::ceil((static_cast<double>(m) * std::log1p(1 / th2) +
                                 static_cast<double>(m) * std::log(2.0 * static_cast<double>(n + 1) / th2)) /
                                std::log(16.0 / 9.0));
  }
  const std::int64_t default_rescalings =
      max_support ? static_cast<std::int64_t>(4 * potential_bound + 100)
                  : static_cast<std::int64_t>(std::ceil(static_cast<double>(m) * (4 * l_est + 1) / std::log2(4.0 / 3.0)));
  const std::int64_t max_rescalings = opts.limits.max_rescalings.value_or(default_rescalings);
  const std::int64_t max_iterations = opts.limits.max_iterations.value_or((max_rescalings + 1) * vn_bound);

  double min_rescale_ratio = std::numeric_limits<double>::infinity();
  double min_removal_ratio = std::numeric_limits<double>::infinity();
  double max_gamma = 0;
  double max_decomposition_error = 0;
  double max_ledger_error = 0;
  std::int64_t max_vn_iterations = 0;

  auto audit = [&] {
    if (s.r == 0) return;
    // Entrywise error relative to the largest entry of R, which can reach
    // 1/θ² and so sits far above the absolute resolution of a double.
    const Matrix diff = s.reconstruct_R() - s.R.matrix();
    const double scale = std::max(1.0, s.R.matrix().cwiseAbs().maxCoeff());
    max_decomposition_error = std::max(max_decomposition_error, diff.cwiseAbs().maxCoeff() / scale);
    for (Index i : s.T) max_gamma = std::max(max_gamma, s.gamma(i));
    max_ledger_error = std::max(max_ledger_error, std::abs(std::expm1(s.log_det_ledger - s.R.log_det())));
  };

  rep.status = SolveStatus::no_converge;
  while (true) {
    if (s.T.empty()) {
      rep.status = SolveStatus::solved;
      break;
    }
    if (rep.fo_iters >= max_iterations) {
      rep.message = "iteration limit reached";
      break;
    }
    const Matrix la = s.R.factor().solve(s.A_cur);
    const Matrix gram = la.transpose() * la;
    VonNeumannOptions vo;
    vo.gram = &gram;
    vo.budget = std::min(vn_bound, max_iterations - rep.fo_iters);
    // Columns of the kernel support are exactly orthogonal to every answer,
    // so their cosines are pure roundoff, which grows like u·√κ(R) in the
    // metric. A separation must clear that level to mean anything.
    if (max_support)
      vo.min_cosine = kCosineResolution * std::numeric_limits<double>::epsilon() * std::sqrt(s.R.condition_estimate());
    const VonNeumannResult fo = method(s.A_cur, s.Q, eps, vo);
    rep.fo_iters += fo.outcome.iterations;
    max_vn_iterations = std::max(max_vn_iterations, fo.outcome.iterations);

    if (fo.outcome.status == FOStatus::separated) {
      cert.y = s.U * s.R.solve(fo.state.y);
      cert.support = s.T;
      std::sort(cert.support.begin(), cert.support.end());
      rep.status = SolveStatus::solved;
      break;
    }
    if (fo.outcome.status == FOStatus::budget_exhausted) {
      rep.message = "first-order budget exhausted";
      break;
    }
    if (!max_support && s.R.dual_norm(fo.state.y) <= 1e-12) {
      rep.status = SolveStatus::infeasible_detected;
      rep.message = "a convex combination of the normalized columns vanishes";
      break;
    }
    if (rep.rescalings >= max_rescalings) {
      rep.message = "rescaling limit reached";
      break;
    }

    const Matrix r_before = opts.observer ? s.R.matrix() : Matrix();
    const double logdet_before = s.R.log_det();
    const double ratio = image_rescale(s, fo.state.x);
    ++rep.rescalings;
    min_rescale_ratio = std::min(min_rescale_ratio, ratio);
    audit();
    if (opts.observer)
      opts.observer(ImageEvent{ImageEventKind::rescale, s, r_before, logdet_before, ratio, &fo.state.x, nullptr, -1,
                               fo.outcome.iterations});

    if (!max_support) {
      if (!resolvable(s.R)) {
        rep.message = "metric too ill-conditioned for double precision";
        break;
      }
      continue;
    }
    while (!s.T.empty()) {
      Index pick = -1;
      double shortest = s.theta;
      for (Index pos = 0; pos < static_cast<Index>(s.T.size()); ++pos) {
        const double qn = s.column_qnorm(pos);
        if (qn < shortest) {
          shortest = qn;
          pick = pos;
        }
      }
      if (pick < 0) break;
      const Index removed = s.T[pick];
      const Matrix rb = opts.observer ? s.R.matrix() : Matrix();
      const double lb = s.R.log_det();
      const Vector dir = s.unit_column(pick);
      const Matrix w = orthocomplement_basis(dir);
      const double removal_ratio = image_remove(s, pick);
      ++rep.removals;
      min_removal_ratio = std::min(min_removal_ratio, removal_ratio);
      audit();
      if (opts.observer)
        opts.observer(ImageEvent{ImageEventKind::removal, s, rb, lb, removal_ratio, nullptr, &w, removed, 0});
      if (s.r == 0) {
        s.T.clear();
        break;
      }
    }
  }

  measure_image_certificate(a, cert);
  if (rep.status == SolveStatus::solved && !cert.support.empty() && !(cert.min_margin > 0)) {
    // Rounding produced a point that separates in the rescaled metric only.
    rep.status = SolveStatus::no_converge;
    rep.message = "separating point failed verification against the input";
  }
  if (rep.status == SolveStatus::solved) {
    rep.margin = cert.min_margin;
    rep.residual = cert.residual_zero;
  }

  rep.check("von_neumann_iterations", static_cast<double>(vn_bound), static_cast<double>(max_vn_iterations),
            max_vn_iterations <= vn_bound);
  if (rep.rescalings > 0)
    rep.check("det_ratio_per_rescale", 16.0 / 9.0, min_rescale_ratio, min_rescale_ratio >= (16.0 / 9.0) * (1 - 1e-8));
  if (rep.rescalings > 0 || rep.removals > 0)
    rep.check("log_det_ledger", 1e-8, max_ledger_error, max_ledger_error <= 1e-8);
  if (!max_support && opts.limits.known_rho && *opts.limits.known_rho > 0) {
    const double bound = std::ceil(static_cast<double>(m) * log_base(2.0 / *opts.limits.known_rho, 1.5));
    rep.check("rescalings", bound, static_cast<double>(rep.rescalings), rep.rescalings <= bound);
  }
  if (max_support) {
    const double g_bound = 2.0 / (s.theta * s.theta);
    rep.check("gamma_max", g_bound, max_gamma, max_gamma <= g_bound);
    rep.check("decomposition_error", 1e-8, max_decomposition_error, max_decomposition_error <= 1e-8);
    if (rep.removals > 0) {
      const double d_bound = s.theta * s.theta / (2.0 * static_cast<double>(n + 1));
      rep.check("det_ratio_per_removal", d_bound, min_removal_ratio, min_removal_ratio >= d_bound * (1 - 1e-8));
    }
    rep.check("rescalings", potential_bound, static_cast<double>(rep.rescalings), rep.rescalings <= potential_bound);
  }
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace

ImageResult full_support_image(const Matrix& a, const ImageOptions& opts) { return run_image(a, opts, false); }

ImageResult max_support_image(const Matrix& a, const ImageOptions& opts) { return run_image(a, opts, true); }

}  // namespace conic
