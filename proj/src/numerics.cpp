#include "liecurv/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <limits>

#include "liecurv/random.hpp"

namespace liecurv {

namespace {

// Shared rank decision: `sv` sorted descending, values are singular values.
// Returns (rank, gap, smallest_kept, largest_discarded).
struct RankDecision {
  Eigen::Index rank;
  double gap;
  double smallest_kept;
  double largest_discarded;
};

RankDecision decide_rank(const Eigen::VectorXd& sv, double tol,
                         const RankPolicy& policy) {
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > tol) ++rank;

  RankDecision d;
  d.rank = rank;
  d.smallest_kept = rank > 0 ? sv(rank - 1) : 0.0;
  d.largest_discarded = rank < sv.size() ? sv(rank) : 0.0;
  if (rank == sv.size() || d.largest_discarded == 0.0) {
    d.gap = std::numeric_limits<double>::infinity();
  } else if (rank == 0) {
    // Everything is numerically zero; nothing kept, no gap to certify.
    d.gap = std::numeric_limits<double>::infinity();
  } else {
    d.gap = d.smallest_kept / d.largest_discarded;
  }
  if (std::isfinite(d.gap) && d.gap < policy.min_gap_ratio) {
    throw AmbiguousRankError(static_cast<std::size_t>(rank),
                             static_cast<std::size_t>(rank + 1), d.gap);
  }
  return d;
}

NullspaceResult from_svd(const Eigen::VectorXd& sv, const Eigen::MatrixXd& V,
                         Eigen::Index rows, Eigen::Index cols,
                         const RankPolicy& policy) {
  const double sigma_max = sv.size() > 0 ? sv(0) : 0.0;
  const RankDecision d =
      decide_rank(sv, policy.threshold(sigma_max, rows, cols), policy);
  NullspaceResult r;
  r.rank = d.rank;
  r.cols = cols;
  r.sv_gap = d.gap;
  r.sigma_max = sv.size() > 0 ? sv(0) : 0.0;
  r.smallest_kept = d.smallest_kept;
  r.largest_discarded = d.largest_discarded;
  r.basis = V.rightCols(cols - d.rank);
  return r;
}

}  // namespace

NullspaceResult nullspace_from_singular_values(const Eigen::VectorXd& sv,
                                               const Eigen::MatrixXd& V,
                                               Eigen::Index rows,
                                               Eigen::Index cols,
                                               const RankPolicy& policy) {
  return from_svd(sv, V, rows, cols, policy);
}

NullspaceResult nullspace_from_qr_factor(const Eigen::MatrixXd& R,
                                         Eigen::Index rows,
                                         const RankPolicy& policy) {
  // Four dense reflectors are enough to leave no exact zero pattern for
  // the SVD's deflation stage to trip on.
  auto rng = seeded_engine(0x6d1877u);
  Eigen::MatrixXd M = R;
  for (int k = 0; k < 4; ++k) {
    Eigen::VectorXd u = random_gaussian(M.rows(), rng);
    u.normalize();
    M -= 2.0 * u * (u.transpose() * M);
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  return from_svd(svd.singularValues(), svd.matrixV(), rows, R.cols(), policy);
}

NullspaceResult rank_and_nullspace(const Eigen::MatrixXd& A,
                                   const RankPolicy& policy) {
  const Eigen::Index rows = A.rows();
  const Eigen::Index cols = A.cols();
  if (cols == 0) return NullspaceResult{};

  if (rows == 0) {
    NullspaceResult r;
    r.cols = cols;
    r.basis = Eigen::MatrixXd::Identity(cols, cols);
    return r;
  }

  if (rows > 2 * cols) {
    // Householder reduction first; R keeps the singular values and right
    // singular vectors of A.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    Eigen::MatrixXd R = qr.matrixQR()
                            .topRows(cols)
                            .template triangularView<Eigen::Upper>();
    return nullspace_from_qr_factor(R, rows, policy);
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  return from_svd(svd.singularValues(), svd.matrixV(), rows, cols, policy);
}

NullspaceResult rank_and_nullspace_gram(const Eigen::MatrixXd& gram,
                                        Eigen::Index rows,
                                        const RankPolicy& policy,
                                        bool want_vectors) {
  const Eigen::Index cols = gram.cols();
  if (gram.rows() != cols) throw InputError("gram matrix must be square");
  if (cols == 0) return NullspaceResult{};

  // Eigenvalues-only first: when the matrix turns out to have full column
  // rank (the common case for restricted systems) the expensive eigenvector
  // accumulation is never needed.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.compute(gram, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericalError("symmetric eigensolver failed on gram matrix");
  }

  // Ascending eigenvalues; clamp tiny negatives caused by roundoff.
  Eigen::VectorXd sv(cols);
  for (Eigen::Index i = 0; i < cols; ++i) {
    const double ev = es.eigenvalues()(cols - 1 - i);
    sv(i) = ev > 0.0 ? std::sqrt(ev) : 0.0;
  }

  // The normal equations square the conditioning, so the policy threshold is
  // taken in eigenvalue space and pulled back through the square root: the
  // Gram noise floor sits near lambda_max * rows * eps, far above the square
  // of the dense cut. Rank decisions and the gap guard then act on the
  // square-rooted spectrum.
  const double lambda_max = sv(0) * sv(0);
  const double tol =
      std::sqrt(policy.threshold(lambda_max, rows, cols));
  const RankDecision d = decide_rank(sv, tol, policy);
  NullspaceResult r;
  r.rank = d.rank;
  r.cols = cols;
  r.sv_gap = d.gap;
  r.sigma_max = sv(0);
  r.smallest_kept = d.smallest_kept;
  r.largest_discarded = d.largest_discarded;
  const Eigen::Index nullity = cols - d.rank;
  if (want_vectors && nullity > 0) {
    es.compute(gram, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) {
      throw NumericalError("symmetric eigensolver failed on gram matrix");
    }
    // Eigenvectors come ascending, so the nullspace sits in the leading
    // columns; reverse them so the ordering matches the dense path
    // (direction of smallest singular value last).
    r.basis.resize(cols, nullity);
    for (Eigen::Index j = 0; j < nullity; ++j) {
      r.basis.col(j) = es.eigenvectors().col(nullity - 1 - j);
    }
  } else {
    r.basis.resize(cols, want_vectors ? nullity : 0);
  }
  return r;
}

Eigen::Index rank_of(const Eigen::MatrixXd& A, const RankPolicy& policy) {
  if (A.cols() == 0 || A.rows() == 0) return 0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A);
  const double tol =
      policy.threshold(svd.singularValues()(0), A.rows(), A.cols());
  return decide_rank(svd.singularValues(), tol, policy).rank;
}

Eigen::Index rank_of(const Eigen::MatrixXcd& A, const RankPolicy& policy) {
  if (A.cols() == 0 || A.rows() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
  const double tol =
      policy.threshold(svd.singularValues()(0), A.rows(), A.cols());
  return decide_rank(svd.singularValues(), tol, policy).rank;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> sym_eig(const Eigen::MatrixXd& M,
                                                    double symmetry_tol) {
  if (M.rows() != M.cols()) throw InputError("sym_eig: matrix must be square");
  const double scale = std::max(1.0, M.norm());
  const double asym = (M - M.transpose()).norm();
  if (asym > symmetry_tol * scale) {
    throw NumericalError("sym_eig: matrix is not symmetric, residual " +
                         std::to_string(asym / scale));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (M + M.transpose().eval()));
  if (es.info() != Eigen::Success) {
    throw NumericalError("symmetric eigensolver failed");
  }
  const Eigen::Index n = M.rows();
  Eigen::VectorXd vals(n);
  Eigen::MatrixXd vecs(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    vals(i) = es.eigenvalues()(n - 1 - i);
    vecs.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  return {vals, vecs};
}

std::pair<Eigen::VectorXcd, Eigen::MatrixXcd> complex_eig(const Eigen::MatrixXcd& M) {
  if (M.rows() != M.cols()) throw InputError("complex_eig: matrix must be square");
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M, true);
  if (es.info() != Eigen::Success) {
    throw NumericalError("complex eigensolver failed");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

}  // namespace liecurv
