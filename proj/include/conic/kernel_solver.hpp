#pragma once

#include "conic/linalg.hpp"
#include "conic/report.hpp"

#include <functional>
#include <vector>

namespace conic {

/// A nonnegative x with Âx ≈ 0 where Â has the columns of A scaled to unit
/// length. Entries are scaled so the largest equals 1.
struct KernelCertificate {
  Vector x;
  std::vector<Index> support;  // zero-based, ascending
  double residual = 0;         // ‖Âx‖∞
  double min_support_value = 0;
};

/// Converts a certificate vector for Â into one for A by dividing by the
/// column norms (zero columns keep their entry).
Vector to_original_scale(const Matrix& a, const Vector& x_normalized);

/// Mutable state of the rescaling kernel solvers.
///
/// The rescaled columns are stored explicitly as a_cur = M·Â_S, where M is the
/// product of all rank-one stretches (I + ŷŷᵀ) applied so far. The metric on
/// the original space is Q = MᵀM/(1+3ε)^{2t}, so every Q-norm is a Euclidean
/// norm of a_cur divided by (1+3ε)^t. A common positive factor can be pulled
/// out of a_cur, y, z and M to keep magnitudes representable; it is tracked in
/// `log_shrink` and never changes directions.
struct KernelState {
  Matrix a_hat;             // m×n normalized input columns
  std::vector<Index> S;     // active input columns (ascending)
  std::vector<char> in_T;   // per position of S: suspected outside the support
  Matrix a_cur;             // m×|S| rescaled active columns
  Matrix transform;         // M
  Vector x;                 // coefficients over S, ≥ 1 since the last reset
  Vector y;                 // a_cur·x
  Vector z;                 // a_curᵀ·y
  Matrix gram;              // a_curᵀ·a_cur
  Matrix pi;                // projector onto ker(Â_S)
  Vector pix;               // pi·x
  double eps = 0;
  double theta = 0;         // column-length threshold (max-support only)
  std::int64_t t = 0;       // rescalings so far
  double log_shrink = 0;    // log of the factor divided out of a_cur

  /// log of the factor converting Euclidean norms of a_cur into Q-norms.
  double log_q_factor() const;
  /// ‖â_i‖_Q for the column at position `pos` of S.
  double column_qnorm(Index pos) const;
  /// ‖y‖_Q.
  double y_qnorm() const;
  /// The metric Q on the original space.
  Matrix metric() const;
};

/// Matrix form of the rank-one stretch: (I + ŷŷᵀ)·A.
Matrix rescale_columns(const Matrix& a, const Vector& y);

/// Metric form of the same stretch:
/// Q' = (Q + 3·Qyyᵀ Q/‖y‖²_Q)/(1+3ε)².
SymPosDef<double> rescale_metric(const SymPosDef<double>& q, const Vector& y, double eps);

/// Applies one stretch along the current y to the state: updates a_cur, M,
/// y := 2y, z := 4z, the Gram matrix by F + 3zzᵀ/‖y‖² and t.
void kernel_rescale(KernelState& state);

enum class KernelEventKind { dv_step, rescale, removal };

struct KernelEvent {
  KernelEventKind kind;
  const KernelState& state;      // after the event
  Index k = -1;                  // position in S of the column used
  double cosine = 0;             // â_kᵀŷ in the metric, before the step
  double y_qnorm_before = 0;
  double y_qnorm_after = 0;
  const Matrix* a_before = nullptr;  // rescale only: a_cur before stretching
  const Vector* y_before = nullptr;  // rescale only
  double min_cosine = 0;             // rescale only: min_j ⟨â_j, ŷ⟩_Q
};

struct KernelOptions {
  Limits limits;
  /// When false the solver performs coordinate descent steps only, taking
  /// the most violated column whenever its cosine is negative.
  bool rescaling = true;
  std::function<void(const KernelEvent&)> observer;
};

struct KernelResult {
  KernelCertificate certificate;
  SolveReport report;
};

/// Finds x > 0 with Ax = 0 by alternating coordinate descent steps with
/// rank-one stretches. Returns no_converge when the limits fire and
/// infeasible_detected when the rescaled y strictly separates every column.
KernelResult full_support_kernel(const Matrix& a, const KernelOptions& opts = {});

/// Finds x ≥ 0 with Ax = 0 of maximum support. Columns whose Q-length
/// exceeds 1/θ are set aside, and are dropped once the rank test shows they
/// cannot belong to the support. Requires integer entries.
KernelResult max_support_kernel(const Matrix& a, const KernelOptions& opts = {});

/// ⌈ln(n/|ρ|)/(−½ln(1−ρ²))⌉ + 1, the step bound of plain coordinate
/// descent on an instance with condition ρ < 0.
std::int64_t coordinate_descent_step_bound(Index n, double rho);

}  // namespace conic
