#pragma once

#include "conic/linalg.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace conic {

/// Raised by the brute-force oracles when an instance is too large for them.
struct UnsupportedInstance : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConditionReport {
  double rho = 0;
  double delta = 0;
  double theta = 0;
  std::int64_t encoding_length = -1;  // -1 when the input is not integral
  double rho_accuracy = 0;
};

/// Largest product of column norms over linearly independent column sets,
/// found greedily (columns by decreasing norm, kept when independent).
double hadamard_delta(const Matrix& a);

/// 1/(m²Δ²), the column-length threshold of the maximum support solvers.
double theta(const Matrix& a);

/// True when every entry is an integer that fits in 53 bits.
bool is_integral(const Matrix& a);

/// Σ over entries of 1 + ⌈log₂(|a|+1)⌉. Throws PreconditionError on
/// non-integral input.
std::int64_t encoding_length(const Matrix& a);

/// Signed Goffin measure: max over unit y in im(A) of min_j â_jᵀy.
/// Computed exactly (up to rounding) by enumerating facets of conv(Â) in
/// coordinates of im(A) when 0 is inside its relative interior, and
/// minimum-norm points of its faces otherwise. Throws UnsupportedInstance
/// when the enumeration would exceed `max_subsets`.
double goffin_oracle(const Matrix& a, double tol = 1e-6, std::int64_t max_subsets = 2'000'000);

struct GridEstimate {
  double value;     // best value attained at a grid point (a lower bound)
  double accuracy;  // certified gap between the upper bound and `value`
};

/// Independent estimate of the same quantity by Lipschitz branch and bound on
/// the unit sphere of im(A). Only rank ≤ 3. Stops once the certified gap is
/// at most `tol` or after `max_cells` cell evaluations.
GridEstimate goffin_grid(const Matrix& a, double tol = 1e-6, std::int64_t max_cells = 4'000'000);

/// Euclidean projection of c onto the cone {z : Aᵀz ≥ 0}, by enumerating
/// sets of active constraints. Desk scale only.
Vector project_onto_image_cone(const Matrix& a, const Vector& c);

/// min over i in `t_star` of max{â_iᵀz : Aᵀz ≥ 0, ‖z‖ ≤ 1}. Indices are
/// zero-based.
double omega_oracle(const Matrix& a, const std::vector<Index>& t_star, double tol = 1e-6);

/// Fills every field it can; rho via goffin_oracle (left at 0 with accuracy
/// +inf if unsupported).
ConditionReport condition_report(const Matrix& a);

}  // namespace conic
