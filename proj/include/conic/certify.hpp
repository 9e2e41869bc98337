#pragma once

#include "conic/linalg.hpp"

#include <string>
#include <vector>

namespace conic {

struct CertReport {
  bool valid = false;
  double residual = 0;
  double margin = 0;
  std::string message;
};

/// Default tolerances: 1e-8·n for kernel residuals, 1e-8·‖A‖∞ for the zero
/// rows of an image certificate.
double default_kernel_tol(const Matrix& a);
double default_image_tol(const Matrix& a);

/// Valid iff x > 0 on the support, x = 0 off it and ‖Â_S x_S‖∞ ≤ tol, where Â
/// has unit columns. Indices are zero-based. Throws PreconditionError on a
/// dimension mismatch or out-of-range index.
CertReport check_kernel_certificate(const Matrix& a, const Vector& x, const std::vector<Index>& support, double tol);

/// Valid iff a_iᵀy > 0 on the support and |â_iᵀŷ| ≤ tol off it, with ŷ the
/// unit vector along y. The margin is min over the support of â_iᵀŷ.
CertReport check_image_certificate(const Matrix& a, const Vector& y, const std::vector<Index>& support, double tol);

/// Valid iff S and T are disjoint and cover {0, …, n−1}.
CertReport check_complementary_pair(const std::vector<Index>& s, const std::vector<Index>& t, Index n);

}  // namespace conic
