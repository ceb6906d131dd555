#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <complex>

#include "liecurv/algebra.hpp"
#include "liecurv/numerics.hpp"
#include "liecurv/random.hpp"
#include "liecurv/roots.hpp"

using namespace liecurv;

TEST_CASE("rank and minimal adjoint rank reference tables") {
  CHECK(algebra_rank(Family::su, 3) == 2);
  CHECK(algebra_rank(Family::su, 5) == 4);
  CHECK(algebra_rank(Family::so, 7) == 3);
  CHECK(algebra_rank(Family::so, 6) == 3);
  CHECK(algebra_rank(Family::sp, 2) == 2);
  CHECK(algebra_rank(Family::g2, 2) == 2);

  CHECK(reference_min_rank(Family::su, 2) == 2);
  CHECK(reference_min_rank(Family::su, 4) == 6);
  CHECK(reference_min_rank(Family::so, 7) == 8);
  CHECK(reference_min_rank(Family::so, 3) == 2);   // isomorphic to su(2)
  CHECK(reference_min_rank(Family::so, 5) == 4);   // isomorphic to sp(2)
  CHECK(reference_min_rank(Family::so, 6) == 6);   // isomorphic to su(4)
  CHECK(reference_min_rank(Family::sp, 3) == 6);
  CHECK(reference_min_rank(Family::g2, 2) == 6);
}

TEST_CASE("torus dimension, orthonormality and commutativity") {
  for (const char* name : {"su3", "so7", "sp2", "g2"}) {
    CAPTURE(name);
    const LieAlgebra g = build_algebra(name);
    const Eigen::MatrixXd cartan = cartan_subalgebra(g);
    CHECK(cartan.cols() == algebra_rank(g.family(), g.rank_param()));
    const Eigen::MatrixXd gram = cartan.transpose() * cartan;
    CHECK((gram - Eigen::MatrixXd::Identity(cartan.cols(), cartan.cols()))
              .norm() < 1e-12);
    for (Eigen::Index a = 0; a < cartan.cols(); ++a) {
      for (Eigen::Index b = a + 1; b < cartan.cols(); ++b) {
        CHECK(bracket(g, cartan.col(a), cartan.col(b)).norm() < 1e-12);
      }
    }
  }
}

TEST_CASE("root decomposition produces paired imaginary roots") {
  const LieAlgebra g = build_algebra("su3");
  const RootDatum rd = root_decomposition(g);
  CHECK(rd.rank() == 2);
  REQUIRE(rd.root_count() == 6);

  // Purely imaginary tuples summing to zero.
  CHECK(rd.roots.real().cwiseAbs().maxCoeff() < 1e-9);
  CHECK(rd.roots.rowwise().sum().cwiseAbs().maxCoeff() < 1e-8);

  // Joint eigenvector relation, rechecked from scratch.
  for (int idx = 0; idx < rd.root_count(); ++idx) {
    const Eigen::VectorXcd v = rd.root_vectors.col(idx);
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
    for (int a = 0; a < rd.rank(); ++a) {
      const Eigen::MatrixXcd ad_h =
          ad(g, Eigen::VectorXd(rd.cartan.col(a)))
              .cast<std::complex<double>>();
      CHECK((ad_h * v - rd.roots(a, idx) * v).norm() < 1e-8);
    }
  }

  // Lexicographically decreasing ordering.
  for (int i = 0; i + 1 < rd.root_count(); ++i) {
    double first_diff = 0.0;
    for (int a = 0; a < rd.rank(); ++a) {
      const double d = rd.roots(a, i).imag() - rd.roots(a, i + 1).imag();
      if (std::abs(d) > 1e-7) {
        first_diff = d;
        break;
      }
    }
    CHECK(first_diff >= 0.0);
  }
}

TEST_CASE("root counts across families") {
  for (const char* name : {"su2", "sp2", "g2", "so6"}) {
    CAPTURE(name);
    const LieAlgebra g = build_algebra(name);
    const RootDatum rd = root_decomposition(g);
    CHECK(rd.root_count() ==
          g.dim() - algebra_rank(g.family(), g.rank_param()));
  }
}

TEST_CASE("root decomposition is reproducible for a fixed seed") {
  const LieAlgebra g = build_algebra("sp2");
  const RootDatum a = root_decomposition(g, 42);
  const RootDatum b = root_decomposition(g, 42);
  CHECK(a.roots == b.roots);
  CHECK(a.root_vectors == b.root_vectors);
  // A different seed permutes nothing structurally: same root set.
  const RootDatum c = root_decomposition(g, 43);
  CHECK(c.root_count() == a.root_count());
}

TEST_CASE("highest root vector is nilpotent of order three") {
  for (const char* name : {"su3", "sp2", "g2"}) {
    CAPTURE(name);
    const LieAlgebra g = build_algebra(name);
    const RootDatum rd = root_decomposition(g);
    const Eigen::VectorXcd x = highest_root_vector(rd);
    const Eigen::MatrixXcd m = ad(g, x);
    CHECK((m * m * m).norm() < 1e-8);
    CHECK(rank_of(Eigen::MatrixXcd(m * m)) <= 2);
  }
}

TEST_CASE("minimal adjoint rank matches the classification") {
  for (const char* name :
       {"su2", "su3", "su4", "so5", "so7", "sp2", "sp3", "g2", "so3", "so6"}) {
    CAPTURE(name);
    const LieAlgebra g = build_algebra(name);
    const MinRankResult r = min_adjoint_rank(g);
    CHECK(r.cartan_rank == r.expected_cartan_rank);
    CHECK(r.computed == r.expected);
    CHECK(r.cube_residual < 1e-8);
    CHECK(r.square_rank <= 2);
  }
}

// In su(l) a second family realizes the same minimal rank: the adjoint of
// V = i diag(-l+1, 1, ..., 1) also has rank 2(l-1).
TEST_CASE("traceless projector direction realizes the same minimal rank") {
  for (int l : {3, 4, 5}) {
    CAPTURE(l);
    const LieAlgebra g = build_algebra(Family::su, l);
    Eigen::MatrixXcd v = Eigen::MatrixXcd::Identity(l, l);
    v *= std::complex<double>(0.0, 1.0);
    v(0, 0) = std::complex<double>(0.0, -(l - 1.0));
    const Eigen::VectorXd coords = g.coordinates_of(v);
    CHECK(rank_of(ad(g, coords)) == 2 * (l - 1));
  }
}

TEST_CASE("minimal rank is invariant under an orthogonal change of basis") {
  const LieAlgebra g = build_algebra("su3");
  std::mt19937_64 rng = seeded_engine(97);
  const LieAlgebra rotated = rotate_basis(g, random_orthogonal(g.dim(), rng));
  const MinRankResult r = min_adjoint_rank(rotated);
  CHECK(r.cartan_rank == 2);
  CHECK(r.computed == 4);
}

TEST_CASE("centralizer torus path works without a defining representation") {
  // Round-tripping through the serialized tensor drops the representation
  // matrices, forcing the centralizer construction of the torus.
  const LieAlgebra g = algebra_from_json(to_json(build_algebra("su3")));
  REQUIRE(!g.has_raw_basis());
  const MinRankResult r = min_adjoint_rank(g);
  CHECK(r.cartan_rank == 2);
  CHECK(r.computed == 4);
  CHECK(r.square_rank == 1);
}
