#pragma once

#include "conic/linalg.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace conic {

enum class Provenance { generated, parsed };

/// A partition of the column indices (zero-based) into the kernel support S
/// and the image support T.
struct Supports {
  std::vector<Index> S;
  std::vector<Index> T;
};

struct ConicInstance {
  Matrix A;
  bool is_integer = false;
  Provenance provenance = Provenance::parsed;
  /// For kernel-feasible instances the measured (negative) condition
  /// number; for image-feasible ones a certified lower bound.
  std::optional<double> known_rho;
  std::optional<Supports> known_supports;
};

/// Malformed text input. `line` is 1-based.
struct ParseError : std::runtime_error {
  ParseError(int line, const std::string& what);
  int line;
};

/// Instance file: "m n", then m rows of n numbers; lines starting with '#'
/// are comments and may appear anywhere after the header.
ConicInstance parse_instance(const std::string& text);
std::string write_instance(const Matrix& a, const std::vector<std::string>& comments = {});

/// Integers print without a decimal point; other values use the shortest
/// decimal string that reads back to the same double.
std::string format_number(double v);

enum class CertificateKind { kernel, image };

struct CertificateFile {
  CertificateKind kind = CertificateKind::kernel;
  Vector vector;
  std::vector<Index> support;  // zero-based in memory, 1-based on disk
};

std::string write_certificate(const CertificateFile& cert);
CertificateFile parse_certificate(const std::string& text);

/// Ax ≤ b.
struct LPFeasibilityProblem {
  Matrix A;
  Vector b;
};

/// Columns of M are x⁺ (d), x⁻ (d), slacks (m) and the homogenizing
/// column t. Ax ≤ b is feasible exactly when t lies in the kernel support
/// of M.
struct HomogenizedLP {
  Matrix M;
  Index t_index = 0;
  Index d = 0;
  Index m = 0;
};

HomogenizedLP reduce_lp_feasibility(const LPFeasibilityProblem& p);

/// x = (x⁺ − x⁻)/t from a kernel vector of M (in the original column
/// scaling), or nullopt if its t entry is not positive.
std::optional<Vector> recover_lp_solution(const HomogenizedLP& h, const Vector& kernel_x);

/// LP file: "m d", then m rows of d+1 numbers holding [A | b].
LPFeasibilityProblem parse_lp(const std::string& text);

// Generators. All are deterministic functions of their arguments.

/// Unit columns with 0 in the interior of their convex hull and measured
/// condition number at most −rho_target.
ConicInstance gen_kernel_feasible(Index m, Index n, double rho_target, std::uint64_t seed);

/// Unit columns making angle at most arccos(rho_target) with a hidden unit
/// vector, so the condition number is at least rho_target.
ConicInstance gen_image_feasible(Index m, Index n, double rho_target, std::uint64_t seed);

/// Integer matrix whose kernel support has exactly s columns (the rest form
/// the image support), certified by the exact oracle when it applies.
ConicInstance gen_degenerate(Index m, Index n, Index s, std::uint64_t seed);

/// Reads a whole file; throws std::runtime_error if it cannot be opened.
std::string read_file(const std::string& path);

}  // namespace conic
