#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "liecurv/algebra.hpp"
#include "liecurv/numerics.hpp"

namespace liecurv {

inline constexpr std::uint64_t kDefaultSeed = 2026;

// Rank of the algebra (dimension of a maximal torus).
int algebra_rank(Family family, int l);

// Smallest rank attained by ad(X) on the complexification for X != 0,
// from the classification (low-dimensional isomorphisms included).
int reference_min_rank(Family family, int l);

// Simultaneous diagonalization data for the adjoint action of a maximal
// torus. Roots are the joint eigenvalue tuples; they come in +- pairs and
// are purely imaginary in a compact basis.
struct RootDatum {
  Eigen::MatrixXd cartan;         // dim x rank, orthonormal, pairwise commuting
  Eigen::MatrixXcd root_vectors;  // dim x root_count, unit complex columns
  Eigen::MatrixXcd roots;         // rank x root_count, alpha_a(H_b)
  std::uint64_t seed = kDefaultSeed;

  int rank() const { return static_cast<int>(cartan.cols()); }
  int root_count() const { return static_cast<int>(roots.cols()); }
};

// Maximal torus: the standard block-diagonal choice when the defining
// representation is available, otherwise (and for g2) the centralizer of a
// seeded random regular element, re-orthonormalized deterministically.
Eigen::MatrixXd cartan_subalgebra(const LieAlgebra& g,
                                  std::uint64_t seed = kDefaultSeed);

// Joint eigendecomposition of ad over the torus, via a seeded random
// integer combination of the torus basis. Retries with a reseeded draw if
// the combination fails to be regular; root tuples are matched with
// absolute tolerance 1e-7.
RootDatum root_decomposition(const LieAlgebra& g,
                             std::uint64_t seed = kDefaultSeed);

// Index (and vector) of the lexicographically largest root with respect to
// the ordered torus basis. For the ordering induced by a regular element
// this is the highest root, whose adjoint is nilpotent of order 3.
int highest_root_index(const RootDatum& rd);
Eigen::VectorXcd highest_root_vector(const RootDatum& rd);

struct MinRankResult {
  int dim = 0;
  int cartan_rank = 0;
  int expected_cartan_rank = 0;
  int computed = 0;        // rank of ad(X) at the highest root vector
  int expected = 0;        // reference value from the classification
  int square_rank = 0;     // rank of ad(X)^2
  double cube_residual = 0.0;  // ||ad(X)^3||, zero for a highest root
};

// Realizes the minimal nonzero adjoint rank of the complexification at the
// highest root vector and compares against the classification.
MinRankResult min_adjoint_rank(const LieAlgebra& g,
                               std::uint64_t seed = kDefaultSeed,
                               const RankPolicy& policy = {});

}  // namespace liecurv
