#pragma once

// Exact rational decision procedures used as ground truth at desk scale.
// Every input double is converted to the rational number it represents, so
// results carry no rounding error.

#include "conic/linalg.hpp"

#include <gmpxx.h>

#include <optional>
#include <vector>

namespace conic {

using Rational = mpq_class;
using RationalVector = std::vector<Rational>;
using RationalMatrix = std::vector<RationalVector>;  // row-major

RationalMatrix to_rational(const Matrix& a);

/// A point v with G v ≤ h, found by Fourier–Motzkin elimination with
/// Chernikov's redundancy rule followed by back substitution, or nullopt
/// when the system is infeasible. At most 64 inequalities.
std::optional<RationalVector> fourier_motzkin_solve(const RationalMatrix& g, const RationalVector& h);

/// Basis of ker(A) over the rationals, one vector per free column of the
/// reduced row echelon form.
std::vector<RationalVector> rational_kernel_basis(const RationalMatrix& a, std::size_t cols);

struct ExactSupports {
  std::vector<Index> S;    // maximum support of {x ≥ 0 : Ax = 0}
  std::vector<Index> T;    // maximum support of {Aᵀy : Aᵀy ≥ 0}
  RationalVector x;        // Ax = 0, x ≥ 0, supp(x) = S
  RationalVector y;        // Aᵀy ≥ 0, supp(Aᵀy) = T
};

/// Decides for every column whether it lies in the kernel support or the
/// image support, and returns exact witnesses for both. Throws
/// UnsupportedInstance beyond n = 12 or m = 6.
ExactSupports exact_support_oracle(const Matrix& a);

/// Exact decision of whether Ax ≤ b has a solution; returns one if so.
std::optional<RationalVector> exact_lp_feasible(const Matrix& a, const Vector& b);

}  // namespace conic
