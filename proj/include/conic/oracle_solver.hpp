#pragma once

#include "conic/first_order.hpp"
#include "conic/linalg.hpp"
#include "conic/report.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace conic {

/// Raised when an oracle answer contradicts its contract.
struct OracleFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Strict separation oracle for a closed convex cone Σ ⊆ ℝᵐ: answers YES
/// (std::nullopt) when v lies in the interior of Σ, and otherwise returns a
/// vector a with aᵀv ≤ 0 and aᵀz > 0 on the interior.
class SeparationOracle {
 public:
  virtual ~SeparationOracle() = default;
  virtual Index dim() const = 0;
  virtual std::optional<Vector> query(const Vector& v) = 0;
};

/// Oracle for {y : Aᵀy ≥ 0}: returns the column with the smallest normalized
/// inner product with v (lowest index on ties), or YES when all are positive.
class PolyhedralOracle final : public SeparationOracle {
 public:
  explicit PolyhedralOracle(Matrix a);
  Index dim() const override { return a_.rows(); }
  std::optional<Vector> query(const Vector& v) override;

 private:
  Matrix a_;
  Vector norms_;
};

/// Oracle backed by a child process speaking a line protocol on its standard
/// streams: each query is one line "v₁ … v_m", each reply is "YES" or
/// "a₁ … a_m". Numbers are written with 17 significant digits so doubles
/// round-trip exactly. The child is started with /bin/sh -c.
class SubprocessOracle final : public SeparationOracle {
 public:
  SubprocessOracle(const std::string& command, Index dim);
  ~SubprocessOracle() override;
  SubprocessOracle(const SubprocessOracle&) = delete;
  SubprocessOracle& operator=(const SubprocessOracle&) = delete;
  Index dim() const override { return dim_; }
  std::optional<Vector> query(const Vector& v) override;

 private:
  Index dim_;
  int pid_ = -1;
  void* to_child_ = nullptr;    // FILE*
  void* from_child_ = nullptr;  // FILE*
};

/// Distinct oracle answers gathered by the oracle von Neumann method with
/// their convex coefficients.
struct ActiveSet {
  std::vector<Vector> vectors;
  Vector x;
};

struct OracleVonNeumannResult {
  ActiveSet active;
  Vector y;  // Σ x_i a_i/‖a_i‖_Q
  FOStatus status = FOStatus::budget_exhausted;  // separated means Qy is interior
  std::int64_t iterations = 0;
  std::int64_t oracle_calls = 0;
};

struct OracleOptions {
  bool check_faults = true;
  std::int64_t budget = -1;  // per von Neumann call; negative means ⌈1/ε²⌉
  /// Called after every update with the active set and the Qy that was queried.
  std::function<void(const ActiveSet&, const Vector& queried, const Vector& returned)> observer;
};

/// The von Neumann method driven by oracle answers instead of a column list.
OracleVonNeumannResult oracle_von_neumann(SeparationOracle& oracle, const SymPosDef<double>& q, double eps,
                                          const OracleOptions& opts = {});

struct OracleResult {
  Vector y;
  SolveReport report;
};

/// Finds a point in the interior of a full-dimensional cone given only by a
/// strict separation oracle, rescaling the metric with the active set after
/// every unsuccessful von Neumann call.
OracleResult strict_conic_feasibility(SeparationOracle& oracle, const Limits& limits = {},
                                      const OracleOptions& opts = {});

}  // namespace conic
