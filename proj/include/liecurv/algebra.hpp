#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "liecurv/errors.hpp"

namespace liecurv {

enum class Family { su, so, sp, g2 };

std::string family_name(Family f);

struct AlgebraId {
  Family family;
  int l;

  std::string name() const;
};

// Parses names like "su3", "so7", "sp2", "g2".
std::optional<AlgebraId> parse_algebra_name(std::string_view name);

struct BuildOptions {
  // Largest algebra dimension the builder accepts.
  int dim_cap = 64;
  // Construction-time invariant tolerances; violation means a bug in the
  // construction and throws NumericalError.
  double jacobi_tol = 1e-12;
  double orthonormality_tol = 1e-10;
  double antisymmetry_tol = 1e-12;
  // When false, residuals are still measured and recorded but violations do
  // not throw. Used by consumers that want to report failures themselves.
  bool enforce_invariants = true;
};

// Residuals measured on the finished structure tensor.
struct ToleranceReport {
  double jacobi = 0.0;
  double orthonormality = 0.0;
  double total_antisymmetry = 0.0;
};

// A compact simple Lie algebra presented by its structure tensor in a basis
// orthonormal with respect to minus the Killing form. The tensor is totally
// antisymmetric; each ad(e_i) is skew and the family {ad(e_i)} is
// orthonormal under <A,B> = tr(A B^T).
class LieAlgebra {
 public:
  Family family() const { return family_; }
  int rank_param() const { return l_; }
  AlgebraId id() const { return {family_, l_}; }
  int dim() const { return static_cast<int>(ad_.size()); }

  // Structure constant c_{ijk} defined by [e_i, e_j] = sum_k c_{ijk} e_k.
  double c(int i, int j, int k) const { return ad_[i](k, j); }

  const Eigen::MatrixXd& ad_basis(int i) const { return ad_[i]; }

  // Defining-representation matrices of the orthonormal basis. Empty for
  // algebras reconstructed from a serialized tensor.
  bool has_raw_basis() const { return !raw_basis_.empty(); }
  const std::vector<Eigen::MatrixXcd>& raw_basis() const { return raw_basis_; }

  // Coordinates of a defining-representation matrix in the orthonormal
  // basis (least squares in the Frobenius inner product).
  Eigen::VectorXd coordinates_of(const Eigen::MatrixXcd& raw) const;

  const ToleranceReport& tolerance_report() const { return tolerances_; }

  // Construction key: only the factory functions can mint one.
  struct Private {
    explicit Private() = default;
  };

  LieAlgebra(Private, Family family, int l, std::vector<Eigen::MatrixXd> ad,
             std::vector<Eigen::MatrixXcd> raw_basis,
             ToleranceReport tolerances)
      : family_(family),
        l_(l),
        ad_(std::move(ad)),
        raw_basis_(std::move(raw_basis)),
        tolerances_(tolerances) {}

 private:
  Family family_;
  int l_;
  std::vector<Eigen::MatrixXd> ad_;
  std::vector<Eigen::MatrixXcd> raw_basis_;
  ToleranceReport tolerances_;
};

// Builds su(l) (l >= 2), so(l) (l >= 3, l != 4), sp(l) (l >= 1) or g2 from
// its fixed raw basis, orthonormalizing with modified Gram-Schmidt against
// minus the Killing form. Deterministic.
LieAlgebra build_algebra(Family family, int l, const BuildOptions& opts = {});
LieAlgebra build_algebra(const AlgebraId& id, const BuildOptions& opts = {});
LieAlgebra build_algebra(std::string_view name, const BuildOptions& opts = {});

// Transports the structure tensor to the rotated basis f_a = sum_i Q_{ia} e_i
// (Q orthogonal). The result is again orthonormal.
LieAlgebra rotate_basis(const LieAlgebra& g, const Eigen::MatrixXd& Q,
                        const BuildOptions& opts = {});

// Measured residuals of the defining identities, for report generation:
// jacobi, orthonormality (of {ad_i} under the operator inner product),
// total antisymmetry, and the Casimir identity sum_i ad_i^2 = -id.
ToleranceReport measure_tolerances(const LieAlgebra& g);
double casimir_residual(const LieAlgebra& g);

Eigen::VectorXd bracket(const LieAlgebra& g, const Eigen::VectorXd& X,
                        const Eigen::VectorXd& Y);
Eigen::MatrixXd ad(const LieAlgebra& g, const Eigen::VectorXd& X);
Eigen::MatrixXcd ad(const LieAlgebra& g, const Eigen::VectorXcd& X);
double killing(const LieAlgebra& g, const Eigen::VectorXd& X,
               const Eigen::VectorXd& Y);

// Rank-two wedge operator (X ^ Y)Z = <X,Z> Y - <Y,Z> X as a matrix,
// entries (X ^ Y)_{pq} = X_q Y_p - Y_q X_p.
Eigen::MatrixXd wedge(const Eigen::VectorXd& X, const Eigen::VectorXd& Y);

// Coboundary of a linear operator A on g:
// del(A) = -1/2 sum_i [A e_i, e_i]. Satisfies del(ad(X)) = X/2 and
// del(X ^ Y) = [X, Y]; its kernel is the orthogonal complement of ad(g).
Eigen::VectorXd coboundary(const LieAlgebra& g, const Eigen::MatrixXd& A);

// Orthogonal projection of A onto span{ad(e_i)} in <A,B> = tr(A B^T);
// returns (projection, residual part).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> project_ad(const LieAlgebra& g,
                                                       const Eigen::MatrixXd& A);

// Serialized structure tensor, lossless (shortest round-trip doubles):
// {schema_version, family, l, n, c, tolerance_report}.
nlohmann::json to_json(const LieAlgebra& g);
LieAlgebra algebra_from_json(const nlohmann::json& j,
                             const BuildOptions& opts = {});

}  // namespace liecurv
