#include "conic/certify.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace conic {

double default_kernel_tol(const Matrix& a) { return 1e-8 * static_cast<double>(a.cols()); }

double default_image_tol(const Matrix& a) {
  return 1e-8 * std::max(1.0, a.cwiseAbs().rowwise().sum().maxCoeff());
}

namespace {

std::vector<char> support_mask(const std::vector<Index>& support, Index n, const char* who) {
  std::vector<char> mask(static_cast<std::size_t>(n), 0);
  for (Index i : support) {
    if (i < 0 || i >= n) throw PreconditionError(std::string(who) + ": support index out of range");
    mask[i] = 1;
  }
  return mask;
}

}  // namespace

CertReport check_kernel_certificate(const Matrix& a, const Vector& x, const std::vector<Index>& support, double tol) {
  if (x.size() != a.cols()) throw PreconditionError("check_kernel_certificate: dimension mismatch");
  const auto mask = support_mask(support, a.cols(), "check_kernel_certificate");
  CertReport rep;
  Vector combo = Vector::Zero(a.rows());
  rep.margin = support.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  std::ostringstream msg;
  bool signs_ok = true;
  for (Index j = 0; j < a.cols(); ++j) {
    if (mask[j]) {
      if (!(x(j) > 0)) {
        signs_ok = false;
        msg << "x[" << j + 1 << "] is not positive; ";
      }
      rep.margin = std::min(rep.margin, x(j));
      const double nrm = a.col(j).norm();
      if (nrm > 0) combo += x(j) * a.col(j) / nrm;
    } else if (x(j) != 0) {
      signs_ok = false;
      msg << "x[" << j + 1 << "] is nonzero off the support; ";
    }
  }
  rep.residual = combo.size() ? combo.cwiseAbs().maxCoeff() : 0.0;
  const bool small = rep.residual <= tol;
  if (!small) msg << "residual " << rep.residual << " exceeds " << tol << "; ";
  rep.valid = signs_ok && small;
  rep.message = rep.valid ? "valid kernel certificate" : msg.str();
  return rep;
}

CertReport check_image_certificate(const Matrix& a, const Vector& y, const std::vector<Index>& support, double tol) {
  if (y.size() != a.rows()) throw PreconditionError("check_image_certificate: dimension mismatch");
  const auto mask = support_mask(support, a.cols(), "check_image_certificate");
  CertReport rep;
  const double ynorm = y.norm();
  rep.margin = support.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  std::ostringstream msg;
  bool strict_ok = true;
  for (Index j = 0; j < a.cols(); ++j) {
    const double raw = a.col(j).dot(y);
    const double cn = a.col(j).norm();
    const double c = (ynorm > 0 && cn > 0) ? raw / (cn * ynorm) : 0.0;
    if (mask[j]) {
      rep.margin = std::min(rep.margin, c);
      if (!(raw > 0)) {
        strict_ok = false;
        msg << "a[" << j + 1 << "]^T y = " << raw << " is not positive; ";
      }
    } else {
      rep.residual = std::max(rep.residual, std::abs(c));
    }
  }
  const bool zeros_ok = rep.residual <= tol;
  if (!zeros_ok) msg << "off-support value " << rep.residual << " exceeds " << tol << "; ";
  rep.valid = strict_ok && zeros_ok;
  rep.message = rep.valid ? "valid image certificate" : msg.str();
  return rep;
}

CertReport check_complementary_pair(const std::vector<Index>& s, const std::vector<Index>& t, Index n) {
  std::vector<int> count(static_cast<std::size_t>(std::max<Index>(n, 0)), 0);
  CertReport rep;
  for (const auto* set : {&s, &t})
    for (Index i : *set) {
      if (i < 0 || i >= n) {
        rep.message = "index " + std::to_string(i + 1) + " out of range";
        return rep;
      }
      ++count[i];
    }
  for (Index i = 0; i < n; ++i) {
    if (count[i] == 0) {
      rep.message = "index " + std::to_string(i + 1) + " is in neither set";
      return rep;
    }
    if (count[i] > 1) {
      rep.message = "index " + std::to_string(i + 1) + " is in both sets";
      return rep;
    }
  }
  rep.valid = true;
  rep.message = "complementary pair";
  return rep;
}

}  // namespace conic
