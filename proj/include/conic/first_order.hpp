#pragma once

#include "conic/linalg.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace conic {

/// Coefficients x and aggregate y of a first-order method.
struct FOState {
  Vector x;
  Vector y;
};

enum class FOStatus { separated, small_norm, budget_exhausted };

std::string to_string(FOStatus s);

struct FOOutcome {
  FOStatus status = FOStatus::budget_exhausted;
  std::int64_t iterations = 0;
};

/// One coordinate descent step on column k: x_k grows by −a_kᵀy/‖a_k‖² and
/// y loses its component along â_k. Throws PreconditionError if a_k = 0.
FOState dv_step(const Matrix& a, const FOState& state, Index k);

/// y += â_k and x_k += 1/‖a_k‖. Throws PreconditionError if a_k = 0.
FOState perceptron_step(const Matrix& a, const FOState& state, Index k);

/// ⌈1/ε²⌉, the iteration bound shared by the von Neumann and perceptron
/// methods.
std::int64_t von_neumann_budget(double eps);

/// Progress record passed to an optional per-iteration observer.
struct VonNeumannStep {
  std::int64_t iteration;
  Index k;
  double lambda;
  const Vector& x;
  const Vector& z;  // AᵀQy
};

struct VonNeumannResult {
  FOState state;  // y in the original coordinates, x on the simplex
  FOOutcome outcome;
  Vector z;       // AᵀQy for the returned y
  double y_norm;  // ‖y‖_Q
};

struct VonNeumannOptions {
  std::int64_t budget = -1;      // negative means ⌈1/ε²⌉
  const Matrix* gram = nullptr;  // AᵀQA if the caller already has it
  std::function<void(const VonNeumannStep&)> observer;
  std::int64_t refresh_period = 10'000;
  /// Stop as separated only once every column has ⟨â_k, ŷ⟩_Q above this
  /// cosine. Zero gives the plain test AᵀQy > 0.
  double min_cosine = 0;
};

/// Minimum-norm-point iteration over the normalized columns in the metric Q.
/// Starts from the first column and moves toward the most violated column
/// with the exact line-search step. Stops as soon as AᵀQy > 0 (with the
/// optional cosine margin) or ‖y‖_Q ≤ ε.
VonNeumannResult von_neumann(const Matrix& a, const SymPosDef<double>& q, double eps,
                             const VonNeumannOptions& opts = {});

/// Same contract as von_neumann but with unit steps toward violated columns;
/// the returned x is the normalized accumulated step count.
VonNeumannResult perceptron_method(const Matrix& a, const SymPosDef<double>& q, double eps,
                                   const VonNeumannOptions& opts = {});

/// Any routine meeting the von_neumann contract can drive the image solver.
using FirstOrderMethod = std::function<VonNeumannResult(
    const Matrix&, const SymPosDef<double>&, double, const VonNeumannOptions&)>;

FirstOrderMethod default_first_order_method();

/// Looks up "vonneumann" or "perceptron".
std::optional<FirstOrderMethod> first_order_method_by_name(const std::string& name);

}  // namespace conic
