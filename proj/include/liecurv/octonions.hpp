#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace liecurv {

// Product of two octonion basis elements: e_i * e_j = sign * e_{index}.
struct BasisProduct {
  int index;
  int sign;
};

// Index 0 is the real unit; 1..7 are the imaginary units. Built by the
// Cayley-Dickson doubling of the quaternions, so the table is alternative
// and norm-multiplicative.
using OctonionTable = std::array<std::array<BasisProduct, 8>, 8>;

const OctonionTable& octonion_table();

// Multiply two octonions given as coefficient vectors of length 8.
Eigen::VectorXd octonion_multiply(const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& y);

// Linear constraints on a 7x7 matrix D acting on the imaginary units,
// extended by D(1) = 0, expressing the Leibniz rule
// D(e_i e_j) = D(e_i) e_j + e_i D(e_j) for all i, j in 1..7.
// One row per (i, j, component); 392 rows, 49 columns, column-major layout
// col(m, s) = 7*s + m for the entry D_{ms}.
Eigen::MatrixXd derivation_constraint_matrix();

// Orthonormal basis (Frobenius inner product) of the derivation algebra,
// obtained as the nullspace of the constraint matrix. 14 skew 7x7 matrices
// in a deterministic order.
std::vector<Eigen::MatrixXd> octonion_derivation_basis();

}  // namespace liecurv
