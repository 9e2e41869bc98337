#pragma once

// Dense primitives shared by every solver: metrics given by symmetric
// positive definite matrices, orthogonal projectors onto kernel and image,
// ellipsoid widths and Householder complements.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace conic {

using Index = Eigen::Index;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

/// Raised when a caller breaks an operation's documented precondition.
struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Relative pivot threshold used for every numerical rank decision.
inline constexpr double kRankTolerance = 1e-9;

/// Symmetric positive definite matrix with its lower Cholesky factor,
/// inverse and log-determinant. Besides factoring a given matrix, instances
/// can be produced directly from a factor, which is how badly conditioned
/// metrics are updated without ever refactoring them from scratch.
template <typename Scalar>
class SymPosDef {
 public:
  using Mat = MatrixX<Scalar>;
  using Vec = VectorX<Scalar>;
  using Factor = Eigen::TriangularView<const Mat, Eigen::Lower>;

  explicit SymPosDef(const Mat& m) {
    if (m.rows() != m.cols()) throw PreconditionError("SymPosDef: matrix must be square");
    if (m.rows() == 0) {  // the zero-dimensional metric, det = 1
      mat_ = inv_ = l_ = m;
      return;
    }
    const Scalar scale = std::max<Scalar>(m.cwiseAbs().maxCoeff(), Scalar(1e-300));
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * scale)
      throw PreconditionError("SymPosDef: matrix is not symmetric");
    mat_ = (m + m.transpose()) / Scalar(2);
    const Eigen::LLT<Mat> llt(mat_);
    if (llt.info() != Eigen::Success) throw PreconditionError("SymPosDef: matrix is not positive definite");
    l_ = llt.matrixL();
    finish(false);
  }

  static SymPosDef identity(Index d) { return SymPosDef(Mat::Identity(d, d)); }

  /// The matrix L Lᵀ for a lower triangular L with positive diagonal.
  static SymPosDef from_factor(Mat l) {
    if (l.rows() != l.cols()) throw PreconditionError("SymPosDef: factor must be square");
    SymPosDef out;
    out.l_ = l.template triangularView<Eigen::Lower>();
    out.finish(true);
    return out;
  }

  /// The Gram matrix BᵀB of a matrix with full column rank, factored through
  /// a QR decomposition of B so that BᵀB itself is never formed.
  static SymPosDef from_gram_root(const Mat& b) {
    if (b.rows() < b.cols()) throw PreconditionError("SymPosDef: Gram root must have full column rank");
    const Index k = b.cols();
    const Eigen::HouseholderQR<Mat> qr(b);
    Mat l = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>().transpose();
    for (Index j = 0; j < k; ++j)
      if (l(j, j) < 0) l.col(j) = -l.col(j);
    return from_factor(std::move(l));
  }

  Index dim() const { return mat_.rows(); }
  const Mat& matrix() const { return mat_; }
  const Mat& inverse() const { return inv_; }
  /// Lower Cholesky factor L with M = L Lᵀ.
  const Factor factor() const { return Factor(l_); }
  Scalar log_det() const { return log_det_; }
  Scalar det() const { return std::exp(log_det_); }
  /// Lower bound on the spectral condition number, from the spread of the
  /// factor's diagonal.
  Scalar condition_estimate() const {
    if (dim() == 0) return Scalar(1);
    const Vec d = l_.diagonal();
    const Scalar ratio = d.maxCoeff() / d.minCoeff();
    return ratio * ratio;
  }

  /// M⁻¹ b through the factor.
  template <typename B>
  Mat solve(const Eigen::MatrixBase<B>& b) const {
    return factor().transpose().solve(factor().solve(Mat(b)));
  }

  /// vᵀ M w, the inner product this matrix defines.
  template <typename A, typename B>
  Scalar inner(const Eigen::MatrixBase<A>& v, const Eigen::MatrixBase<B>& w) const {
    return v.dot(mat_ * w);
  }
  /// ‖v‖ in the metric of this matrix.
  template <typename A>
  Scalar norm(const Eigen::MatrixBase<A>& v) const {
    return std::sqrt(std::max(Scalar(0), inner(v, v)));
  }
  /// ‖v‖ in the metric of the inverse, through the factor rather than the
  /// explicit inverse.
  template <typename A>
  Scalar dual_norm(const Eigen::MatrixBase<A>& v) const {
    return factor().solve(Vec(v)).norm();
  }

  /// The inverse as a metric of its own, factored from L⁻¹ so that its
  /// accuracy does not depend on refactoring an ill-conditioned matrix.
  SymPosDef inverted() const {
    if (dim() == 0) return *this;
    return from_gram_root(factor().solve(Mat::Identity(dim(), dim())));
  }

  /// Wᵀ M W for W with orthonormal columns.
  SymPosDef congruence(const Mat& w) const {
    if (w.rows() != dim()) throw PreconditionError("SymPosDef: congruence dimension mismatch");
    if (w.cols() == 0) return SymPosDef(Mat(0, 0));
    return from_gram_root(Mat(factor().transpose() * w));
  }

  /// c (M + Σ v_j v_jᵀ) over the columns of V, by rank-one updates of the
  /// factor followed by a rescaling.
  SymPosDef updated(const Mat& v, Scalar c) const {
    if (v.rows() != dim()) throw PreconditionError("SymPosDef: update dimension mismatch");
    if (!(c > 0)) throw PreconditionError("SymPosDef: scale must be positive");
    Mat l = l_;
    for (Index j = 0; j < v.cols(); ++j) {
      Vec w = v.col(j);
      for (Index k = 0; k < dim(); ++k) {
        const Scalar r = std::hypot(l(k, k), w(k));
        const Scalar cs = r / l(k, k);
        const Scalar sn = w(k) / l(k, k);
        l(k, k) = r;
        for (Index i = k + 1; i < dim(); ++i) {
          l(i, k) = (l(i, k) + sn * w(i)) / cs;
          w(i) = cs * w(i) - sn * l(i, k);
        }
      }
    }
    return from_factor(std::sqrt(c) * l);
  }

 private:
  SymPosDef() = default;

  void finish(bool rebuild_matrix) {
    const Vec diag = l_.diagonal();
    if (!diag.allFinite() || (diag.array() <= Scalar(0)).any())
      throw PreconditionError("SymPosDef: nonpositive Cholesky pivot");
    log_det_ = Scalar(2) * diag.array().log().sum();
    if (rebuild_matrix) {
      mat_ = l_ * l_.transpose();
      mat_ = (mat_ + mat_.transpose()).eval() / Scalar(2);
    }
    const Mat linv = factor().solve(Mat::Identity(dim(), dim()));
    inv_ = linv.transpose() * linv;
    inv_ = (inv_ + inv_.transpose()).eval() / Scalar(2);
  }

  Mat mat_;
  Mat inv_;
  Mat l_;
  Scalar log_det_{};
};

enum class ProjectorKind { kernel, image };

/// Orthogonal projector in ℝⁿ together with the rank of the matrix it came from.
template <typename Scalar>
struct Projector {
  MatrixX<Scalar> matrix;
  ProjectorKind kind;
  Index rank;
};

/// Rows of `a` that form a basis of its row space, chosen by Gaussian
/// elimination with complete pivoting. Pivots below kRankTolerance times the
/// largest pivot are treated as zero. Indices are returned in pivot order.
template <typename Derived>
std::vector<Index> independent_rows(const Eigen::MatrixBase<Derived>& a,
                                    double rel_tol = kRankTolerance) {
  using Scalar = typename Derived::Scalar;
  MatrixX<Scalar> w = a;
  const Index m = w.rows();
  const Index n = w.cols();
  std::vector<Index> row_id(m);
  for (Index i = 0; i < m; ++i) row_id[i] = i;
  std::vector<Index> chosen;
  Scalar first_pivot = 0;
  for (Index step = 0; step < std::min(m, n); ++step) {
    Index pr = 0, pc = 0;
    const Scalar piv = w.bottomRightCorner(m - step, n - step).cwiseAbs().maxCoeff(&pr, &pc);
    if (step == 0) first_pivot = piv;
    if (piv == Scalar(0) || piv <= Scalar(rel_tol) * first_pivot) break;
    pr += step;
    pc += step;
    w.row(step).swap(w.row(pr));
    w.col(step).swap(w.col(pc));
    std::swap(row_id[step], row_id[pr]);
    chosen.push_back(row_id[step]);
    for (Index i = step + 1; i < m; ++i) {
      const Scalar f = w(i, step) / w(step, step);
      w.row(i).tail(n - step) -= f * w.row(step).tail(n - step);
    }
  }
  return chosen;
}

template <typename Derived>
Index matrix_rank(const Eigen::MatrixBase<Derived>& a, double rel_tol = kRankTolerance) {
  return static_cast<Index>(independent_rows(a, rel_tol).size());
}

namespace detail {
template <typename Derived>
MatrixX<typename Derived::Scalar> row_space_projector(const Eigen::MatrixBase<Derived>& a,
                                                      Index& rank) {
  using Scalar = typename Derived::Scalar;
  const std::vector<Index> rows = independent_rows(a);
  rank = static_cast<Index>(rows.size());
  const Index n = a.cols();
  if (rank == 0) return MatrixX<Scalar>::Zero(n, n);
  MatrixX<Scalar> b(rank, n);
  for (Index i = 0; i < rank; ++i) b.row(i) = a.row(rows[i]);
  const MatrixX<Scalar> gram = b * b.transpose();
  MatrixX<Scalar> p = b.transpose() * gram.llt().solve(b);
  return (p + p.transpose()) / Scalar(2);
}
}  // namespace detail

/// Projector onto ker(A), computed as I − Bᵀ(BBᵀ)⁻¹B for a row basis B.
template <typename Derived>
Projector<typename Derived::Scalar> kernel_projector(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  if (a.size() == 0 || a.isZero(0)) throw PreconditionError("kernel_projector: A must be nonzero");
  Index rank = 0;
  MatrixX<Scalar> p = detail::row_space_projector(a, rank);
  MatrixX<Scalar> k = MatrixX<Scalar>::Identity(a.cols(), a.cols()) - p;
  return {std::move(k), ProjectorKind::kernel, rank};
}

/// Projector onto the row space of A, the orthogonal complement of ker(A).
template <typename Derived>
Projector<typename Derived::Scalar> image_projector(const Eigen::MatrixBase<Derived>& a) {
  if (a.size() == 0 || a.isZero(0)) throw PreconditionError("image_projector: A must be nonzero");
  Index rank = 0;
  auto p = detail::row_space_projector(a, rank);
  return {std::move(p), ProjectorKind::image, rank};
}

/// max{aᵀz : zᵀRz ≤ 1}, which equals √(aᵀR⁻¹a).
template <typename Scalar, typename Derived>
Scalar ellipsoid_width(const SymPosDef<Scalar>& r, const Eigen::MatrixBase<Derived>& a) {
  if (a.size() != r.dim()) throw PreconditionError("ellipsoid_width: dimension mismatch");
  return r.dual_norm(a);
}

/// Determinant of R restricted to the hyperplane a⊥, i.e. det(WᵀRW) for any
/// orthonormal basis W of a⊥. Uses the identity det(R)·aᵀR⁻¹a.
template <typename Scalar, typename Derived>
Scalar projected_determinant(const SymPosDef<Scalar>& r, const Eigen::MatrixBase<Derived>& a) {
  if (a.size() != r.dim()) throw PreconditionError("projected_determinant: dimension mismatch");
  if (std::abs(a.norm() - Scalar(1)) > Scalar(1e-12))
    throw PreconditionError("projected_determinant: direction must be a unit vector");
  const Scalar w = r.dual_norm(a);
  return r.det() * w * w;
}

/// Orthonormal basis of a⊥ ⊂ ℝʳ as the last r−1 columns of the Householder
/// reflector that maps a to a multiple of e₁. Returns an r×0 matrix when r=1.
template <typename Derived>
MatrixX<typename Derived::Scalar> orthocomplement_basis(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  const Index r = a.size();
  if (r == 0) throw PreconditionError("orthocomplement_basis: empty vector");
  if (std::abs(a.norm() - Scalar(1)) > Scalar(1e-12))
    throw PreconditionError("orthocomplement_basis: direction must be a unit vector");
  if (r == 1) return MatrixX<Scalar>(1, 0);
  VectorX<Scalar> v = a;
  v(0) += (a(0) >= Scalar(0) ? Scalar(1) : Scalar(-1));
  const Scalar vv = v.squaredNorm();
  MatrixX<Scalar> h = MatrixX<Scalar>::Identity(r, r) - (Scalar(2) / vv) * v * v.transpose();
  return h.rightCols(r - 1);
}

/// Columns of A scaled to unit Euclidean length; zero columns stay zero.
template <typename Derived>
MatrixX<typename Derived::Scalar> normalize_columns(const Eigen::MatrixBase<Derived>& a) {
  MatrixX<typename Derived::Scalar> out = a;
  for (Index j = 0; j < out.cols(); ++j) {
    const auto nrm = out.col(j).norm();
    if (nrm > 0) out.col(j) /= nrm;
  }
  return out;
}

/// Orthonormal basis (m×rank) of the column space of A, from a
/// column-pivoted Householder QR using the shared rank threshold.
template <typename Derived>
MatrixX<typename Derived::Scalar> column_space_basis(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  const Index rank = matrix_rank(a);
  Eigen::ColPivHouseholderQR<MatrixX<Scalar>> qr(a);
  MatrixX<Scalar> q = qr.householderQ() * MatrixX<Scalar>::Identity(a.rows(), rank);
  return q;
}

}  // namespace conic
