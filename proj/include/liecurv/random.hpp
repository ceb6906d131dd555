#pragma once

#include <Eigen/Dense>
#include <Eigen/QR>
#include <cstdint>
#include <random>

namespace liecurv {

// All randomness in the library flows through explicitly seeded engines so
// repeated runs are reproducible.
inline std::mt19937_64 seeded_engine(std::uint64_t seed) {
  return std::mt19937_64{seed};
}

inline Eigen::VectorXd random_gaussian(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

inline Eigen::MatrixXd random_gaussian_matrix(Eigen::Index rows,
                                              Eigen::Index cols,
                                              std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

// Haar-ish orthogonal matrix: QR of a Gaussian matrix with the sign of the
// R diagonal fixed, so the result is a deterministic function of the draw.
inline Eigen::MatrixXd random_orthogonal(Eigen::Index n, std::mt19937_64& rng) {
  const Eigen::MatrixXd a = random_gaussian_matrix(n, n, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

inline Eigen::MatrixXd random_skew(Eigen::Index n, std::mt19937_64& rng) {
  const Eigen::MatrixXd a = random_gaussian_matrix(n, n, rng);
  return 0.5 * (a - a.transpose());
}

}  // namespace liecurv
