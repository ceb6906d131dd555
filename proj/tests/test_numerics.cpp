#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <random>

#include "liecurv/numerics.hpp"
#include "liecurv/random.hpp"
#include "test_support.hpp"

using namespace liecurv;

TEST_CASE("identity matrix has full rank and empty nullspace") {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(5, 5);
  const NullspaceResult r = rank_and_nullspace(a);
  CHECK(r.rank == 5);
  CHECK(r.nullity() == 0);
  CHECK(r.sv_gap == std::numeric_limits<double>::infinity());
  CHECK(r.sigma_max == doctest::Approx(1.0));
}

TEST_CASE("duplicated column yields the expected nullspace direction") {
  std::mt19937_64 rng = seeded_engine(7);
  Eigen::MatrixXd a = random_gaussian_matrix(6, 3, rng);
  a.col(2) = a.col(1);
  const NullspaceResult r = rank_and_nullspace(a);
  REQUIRE(r.rank == 2);
  REQUIRE(r.nullity() == 1);
  Eigen::VectorXd expected(3);
  expected << 0.0, 1.0, -1.0;
  expected /= expected.norm();
  const double overlap = std::abs(r.basis.col(0).dot(expected));
  CHECK(overlap == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((a * r.basis).norm() < 1e-12 * a.norm());
}

TEST_CASE("rank of a random low-rank product matches its construction") {
  std::mt19937_64 rng = seeded_engine(11);
  const Eigen::MatrixXd left = random_gaussian_matrix(100, 30, rng);
  const Eigen::MatrixXd right = random_gaussian_matrix(30, 40, rng);
  const Eigen::MatrixXd a = left * right;

  const NullspaceResult r = rank_and_nullspace(a);
  CHECK(r.rank == 30);
  CHECK(r.nullity() == 10);
  CHECK(r.sv_gap > 1e3);
  CHECK(testsupport::elimination_rank(a) == 30);
  // Nullspace basis is orthonormal and annihilated by the matrix.
  const Eigen::MatrixXd gram = r.basis.transpose() * r.basis;
  CHECK((gram - Eigen::MatrixXd::Identity(10, 10)).norm() < 1e-12);
  CHECK((a * r.basis).norm() < 1e-10 * a.norm());
}

TEST_CASE("tall systems route through QR and agree with the direct SVD") {
  std::mt19937_64 rng = seeded_engine(13);
  const Eigen::MatrixXd left = random_gaussian_matrix(300, 12, rng);
  const Eigen::MatrixXd right = random_gaussian_matrix(12, 20, rng);
  const Eigen::MatrixXd a = left * right;  // 300 x 20, rank 12

  const NullspaceResult tall = rank_and_nullspace(a);
  Eigen::BDCSVD<Eigen::MatrixXd> direct(a, Eigen::ComputeFullV);
  CHECK(tall.rank == 12);
  CHECK(tall.nullity() == 8);
  CHECK(tall.sigma_max ==
        doctest::Approx(direct.singularValues()(0)).epsilon(1e-12));
  CHECK(tall.smallest_kept ==
        doctest::Approx(direct.singularValues()(11)).epsilon(1e-10));
  CHECK((a * tall.basis).norm() < 1e-10 * a.norm());
}

TEST_CASE("gram path agrees with the dense path") {
  std::mt19937_64 rng = seeded_engine(17);
  const Eigen::MatrixXd left = random_gaussian_matrix(250, 18, rng);
  const Eigen::MatrixXd right = random_gaussian_matrix(18, 25, rng);
  const Eigen::MatrixXd a = left * right;

  const NullspaceResult dense = rank_and_nullspace(a);

  GramAccumulator acc(a.cols());
  std::vector<Eigen::Index> cols(a.cols());
  std::vector<double> vals(a.cols());
  for (Eigen::Index i = 0; i < a.cols(); ++i) cols[i] = i;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index i = 0; i < a.cols(); ++i) vals[i] = a(r, i);
    acc.add_row(cols, vals);
  }
  CHECK((acc.gram() - a.transpose() * a).norm() < 1e-10 * a.norm() * a.norm());

  const NullspaceResult gram = rank_and_nullspace_gram(acc.gram(), a.rows());
  CHECK(gram.rank == dense.rank);
  CHECK(gram.nullity() == dense.nullity());
  CHECK(gram.sigma_max == doctest::Approx(dense.sigma_max).epsilon(1e-10));
  // Same subspace: projection of one basis onto the other is an isometry.
  const Eigen::MatrixXd overlap = dense.basis.transpose() * gram.basis;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(overlap);
  CHECK(svd.singularValues().minCoeff() > 1.0 - 1e-8);

  const NullspaceResult lazy =
      rank_and_nullspace_gram(acc.gram(), a.rows(), RankPolicy{}, false);
  CHECK(lazy.rank == dense.rank);
  CHECK(lazy.basis.size() == 0);
}

TEST_CASE("ambiguous singular-value gap raises a typed error") {
  Eigen::VectorXd diag(4);
  // Threshold is sigma_max * max(m,n) * 2^-46 ~ 5.7e-14; 1e-13 is kept,
  // 4e-14 is discarded, and their ratio is far below min_gap_ratio.
  diag << 1.0, 1.0, 1e-13, 4e-14;
  const Eigen::MatrixXd a = diag.asDiagonal();
  CHECK_THROWS_AS(rank_and_nullspace(a), AmbiguousRankError);
  try {
    rank_and_nullspace(a);
  } catch (const AmbiguousRankError& e) {
    CHECK(e.rank_lo() + 1 == e.rank_hi());
    CHECK(e.gap() < 1e3);
  }
}

TEST_CASE("rank policy threshold scales with sigma_max and the larger side") {
  RankPolicy policy;
  CHECK(policy.threshold(2.0, 10, 4) ==
        doctest::Approx(2.0 * 10 * std::ldexp(1.0, -46)));
}

TEST_CASE("sym_eig sorts descending and reconstructs") {
  Eigen::MatrixXd m(3, 3);
  m << 3, 0, 0, 0, 1, 0, 0, 0, 2;
  const auto [vals, vecs] = sym_eig(m);
  CHECK(vals(0) == doctest::Approx(3.0));
  CHECK(vals(1) == doctest::Approx(2.0));
  CHECK(vals(2) == doctest::Approx(1.0));

  std::mt19937_64 rng = seeded_engine(23);
  const Eigen::MatrixXd base = random_gaussian_matrix(12, 12, rng);
  const Eigen::MatrixXd sym = base + base.transpose();
  const auto [w, v] = sym_eig(sym);
  CHECK((v * w.asDiagonal() * v.transpose() - sym).norm() < 1e-12 * sym.norm());
  for (int i = 0; i + 1 < w.size(); ++i) CHECK(w(i) >= w(i + 1));
}

TEST_CASE("sym_eig rejects asymmetric input") {
  Eigen::MatrixXd m(2, 2);
  m << 0, 1, -1, 0;
  CHECK_THROWS_AS(sym_eig(m), NumericalError);
}

TEST_CASE("complex_eig reproduces a known spectrum") {
  Eigen::MatrixXcd m(2, 2);
  m << 0.0, 1.0, -1.0, 0.0;  // eigenvalues +-i
  const auto [vals, vecs] = complex_eig(m);
  std::vector<double> ims = {vals(0).imag(), vals(1).imag()};
  std::sort(ims.begin(), ims.end());
  CHECK(ims[0] == doctest::Approx(-1.0));
  CHECK(ims[1] == doctest::Approx(1.0));
  CHECK((m * vecs - vecs * vals.asDiagonal()).norm() < 1e-12);
}
