#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace conic {

enum class SolveStatus { solved, no_converge, infeasible_detected };

std::string to_string(SolveStatus s);

/// A theoretical bound compared with the value a run actually produced.
struct BoundCheck {
  std::string name;
  double bound;
  double observed;
  bool pass;
};

struct SolveReport {
  SolveStatus status = SolveStatus::no_converge;
  std::int64_t fo_iters = 0;
  std::int64_t rescalings = 0;
  std::int64_t removals = 0;
  std::int64_t oracle_calls = 0;
  double residual = 0;
  double margin = 0;
  double wall_ms = 0;
  std::string message;
  std::vector<BoundCheck> bound_checks;

  void check(std::string name, double bound, double observed, bool pass) {
    bound_checks.push_back({std::move(name), bound, observed, pass});
  }
  bool all_bounds_pass() const {
    for (const auto& b : bound_checks)
      if (!b.pass) return false;
    return true;
  }
};

/// Iteration caps. Unset fields fall back to solver-specific defaults derived
/// from the worst-case analysis of each method.
struct Limits {
  std::optional<std::int64_t> max_rescalings;
  std::optional<std::int64_t> max_iterations;
  std::optional<double> epsilon;  // overrides 1/(11m)
  std::optional<double> known_rho;  // enables rescaling-count bound checks
};

/// 1/(11m), the step-size constant shared by all rescaling solvers.
inline double default_epsilon(std::int64_t m) { return 1.0 / (11.0 * static_cast<double>(m)); }

}  // namespace conic
