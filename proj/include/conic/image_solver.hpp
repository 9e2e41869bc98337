#pragma once

#include "conic/first_order.hpp"
#include "conic/linalg.hpp"
#include "conic/report.hpp"

#include <functional>
#include <vector>

namespace conic {

/// A vector y with a_iᵀy > 0 on `support` and a_iᵀy = 0 elsewhere.
struct ImageCertificate {
  Vector y;
  std::vector<Index> support;  // zero-based, ascending
  double min_margin = 0;       // min over the support of â_iᵀŷ
  double residual_zero = 0;    // max off the support of |â_iᵀŷ|
};

/// Fills min_margin and residual_zero of `cert` from A, y and the support.
void measure_image_certificate(const Matrix& a, ImageCertificate& cert);

/// Mutable state of the image solvers.
///
/// R is kept together with the decomposition R = αI + Σ γ_i â_iâ_iᵀ over the
/// current normalized columns, which the solver updates alongside R so that
/// callers can cross-check it.
struct ImageState {
  explicit ImageState(Index dim);

  SymPosDef<double> R;
  SymPosDef<double> Q;      // R⁻¹
  std::int64_t t = 0;       // rescalings so far
  double alpha = 1;
  Vector gamma;             // indexed by input column
  Matrix U;                 // m×r, orthonormal columns
  Matrix A_cur;             // r×|T| current columns
  std::vector<Index> T;     // input indices of the current columns
  Index r = 0;
  double theta = 0;
  double eps = 0;
  double log_det_ledger = 0;  // running log det(R) from update identities

  /// Euclidean-normalized current column at position `pos` of T.
  Vector unit_column(Index pos) const;
  /// ‖â‖_Q for the column at position `pos` of T.
  double column_qnorm(Index pos) const;
  /// αI + Σ γ_i â_iâ_iᵀ, for comparison with R.
  Matrix reconstruct_R() const;
};

/// R' = (R + Σ x_i a_ia_iᵀ/‖a_i‖²_Q)/(1+ε) for convex coefficients x over the
/// columns of A. Throws PreconditionError if x is not on the simplex.
Matrix image_rescale_matrix(const SymPosDef<double>& r, const Matrix& a, const Vector& x, double eps);

/// Applies image_rescale_matrix to the state and updates Q, α, γ, t and the
/// log-det ledger. Returns the determinant ratio det(R')/det(R).
double image_rescale(ImageState& state, const Vector& x);

/// Positions in T of columns with ‖â_k‖_Q < θ.
std::vector<Index> short_column_scan(const ImageState& state);

/// Projects out column `pos`: A := WᵀA with zero columns dropped, R := WᵀRW,
/// U := UW, r := r−1. Returns the determinant ratio det(R')/det(R).
double image_remove(ImageState& state, Index pos);

enum class ImageEventKind { rescale, removal };

struct ImageEvent {
  ImageEventKind kind;
  const ImageState& state;        // after the event
  const Matrix& r_before;
  double log_det_before;
  double det_ratio;               // det(R')/det(R) from the new factorization
  const Vector* x = nullptr;      // rescale only: von Neumann coefficients
  const Matrix* w = nullptr;      // removal only: basis of the kept hyperplane
  Index removed = -1;             // removal only: input index
  std::int64_t fo_iterations = 0; // rescale only: iterations of the preceding call
};

struct ImageOptions {
  Limits limits;
  FirstOrderMethod method;  // von Neumann when empty
  std::function<void(const ImageEvent&)> observer;
};

struct ImageResult {
  ImageCertificate certificate;
  SolveReport report;
};

/// Finds y with Aᵀy > 0 by alternating von Neumann calls with multi-rank
/// metric updates. Requires rank(A) = m and nonzero columns. Returns
/// infeasible_detected when a call ends with y = 0, which exhibits a
/// nonnegative combination of the normalized columns equal to zero.
ImageResult full_support_image(const Matrix& a, const ImageOptions& opts = {});

/// Finds y with Aᵀy ≥ 0 and the largest number of strict inequalities.
/// Columns that become shorter than θ in the metric are projected out.
/// Requires integer entries.
ImageResult max_support_image(const Matrix& a, const ImageOptions& opts = {});

}  // namespace conic
