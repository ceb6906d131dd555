#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>

#include "liecurv/errors.hpp"

namespace liecurv {

// Rank decisions are always taken against an explicit policy; there is no
// hidden default epsilon anywhere else in the library.
struct RankPolicy {
  // Singular values below rel_threshold_scale * sigma_max * max(rows, cols)
  // are treated as zero.
  double rel_threshold_scale = std::ldexp(1.0, -46);
  // The ratio (smallest kept sigma) / (largest discarded sigma) must be at
  // least this large, otherwise the rank is ambiguous and an error is thrown.
  double min_gap_ratio = 1e3;
  // Systems with more rows than this are routed to the Gram path by default.
  std::size_t gram_row_cutoff = 100000;

  double threshold(double sigma_max, Eigen::Index rows, Eigen::Index cols) const {
    return rel_threshold_scale * sigma_max *
           static_cast<double>(std::max(rows, cols));
  }
};

struct NullspaceResult {
  Eigen::Index rank = 0;
  Eigen::Index cols = 0;
  // Ratio sigma_rank / sigma_{rank+1}; +inf when nothing was discarded.
  double sv_gap = std::numeric_limits<double>::infinity();
  double sigma_max = 0.0;
  double smallest_kept = 0.0;
  double largest_discarded = 0.0;
  // Orthonormal nullspace basis, one column per nullspace direction.
  // Empty (0 columns) when the matrix has full column rank, or when the
  // caller asked for the dimension only.
  Eigen::MatrixXd basis;

  Eigen::Index nullity() const { return cols - rank; }
};

// Dense path: singular value decomposition of A. Tall matrices are reduced
// by a Householder QR first; the SVD of the triangular factor has the same
// singular values and right singular vectors.
NullspaceResult rank_and_nullspace(const Eigen::MatrixXd& A,
                                   const RankPolicy& policy = {});

// Gram path: interprets `gram` as A^T A for a matrix with `rows` rows and
// takes rank decisions on the square roots of its eigenvalues. The policy
// threshold is applied in eigenvalue space (the normal equations square the
// conditioning); the gap guard acts on the square-rooted spectrum. With
// want_vectors=false only the rank, gap and spectrum summary are computed.
NullspaceResult rank_and_nullspace_gram(const Eigen::MatrixXd& gram,
                                        Eigen::Index rows,
                                        const RankPolicy& policy = {},
                                        bool want_vectors = true);

// Rank decision and nullspace extraction from a precomputed SVD, with the
// policy threshold based on the true row count (useful when the SVD was
// taken of a QR factor with fewer rows than the original system).
NullspaceResult nullspace_from_singular_values(const Eigen::VectorXd& sv,
                                               const Eigen::MatrixXd& V,
                                               Eigen::Index rows,
                                               Eigen::Index cols,
                                               const RankPolicy& policy = {});

// Nullspace of a system given its square QR factor R and the original row
// count. R is scrambled by a fixed orthogonal transform before the SVD:
// Eigen 3.4's divide-and-conquer SVD mishandles deflation on exactly
// triangular inputs (wrong singular values, occasional out-of-bounds
// access), and left-orthogonal mixing removes the structure without
// touching the singular values or right vectors.
NullspaceResult nullspace_from_qr_factor(const Eigen::MatrixXd& R,
                                         Eigen::Index rows,
                                         const RankPolicy& policy = {});

Eigen::Index rank_of(const Eigen::MatrixXd& A, const RankPolicy& policy = {});
Eigen::Index rank_of(const Eigen::MatrixXcd& A, const RankPolicy& policy = {});

// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending.
// Throws NumericalError if ||M - M^T|| exceeds symmetry_tol * ||M||.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> sym_eig(const Eigen::MatrixXd& M,
                                                    double symmetry_tol = 1e-10);

// Eigendecomposition of a general complex matrix (unit-norm eigenvectors,
// order as produced by the solver, which is deterministic).
std::pair<Eigen::VectorXcd, Eigen::MatrixXcd> complex_eig(const Eigen::MatrixXcd& M);

// Accumulates A^T A from a stream of rows given in sparse form.
// Accumulation order is the row stream order, so results are bitwise
// reproducible for a fixed stream.
class GramAccumulator {
 public:
  explicit GramAccumulator(Eigen::Index cols)
      : gram_(Eigen::MatrixXd::Zero(cols, cols)), rows_(0) {}

  void add_row(std::span<const Eigen::Index> cols, std::span<const double> vals) {
    for (std::size_t a = 0; a < cols.size(); ++a) {
      const double va = vals[a];
      double* col = gram_.col(cols[a]).data();
      for (std::size_t b = 0; b < cols.size(); ++b) {
        col[cols[b]] += vals[b] * va;
      }
    }
    ++rows_;
  }

  Eigen::Index rows_seen() const { return rows_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  Eigen::MatrixXd take_gram() { return std::move(gram_); }

 private:
  Eigen::MatrixXd gram_;
  Eigen::Index rows_;
};

}  // namespace liecurv
