#include "liecurv/octonions.hpp"

#include "liecurv/numerics.hpp"

namespace liecurv {

namespace {

struct QuaternionTable {
  std::array<std::array<BasisProduct, 4>, 4> t;
};

QuaternionTable quaternion_table() {
  QuaternionTable q{};
  for (int i = 0; i < 4; ++i) {
    q.t[0][i] = {i, 1};
    q.t[i][0] = {i, 1};
  }
  for (int i = 1; i < 4; ++i) q.t[i][i] = {0, -1};
  q.t[1][2] = {3, 1};
  q.t[2][1] = {3, -1};
  q.t[2][3] = {1, 1};
  q.t[3][2] = {1, -1};
  q.t[3][1] = {2, 1};
  q.t[1][3] = {2, -1};
  return q;
}

int conj_sign(int i) { return i == 0 ? 1 : -1; }

OctonionTable build_octonion_table() {
  const QuaternionTable q = quaternion_table();
  OctonionTable o{};
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      // Cayley-Dickson doubling on pairs: (a,b)(c,d) = (ac - conj(d) b,
      // d a + b conj(c)). Basis elements occupy one slot each.
      if (i < 4 && j < 4) {
        o[i][j] = q.t[i][j];
      } else if (i < 4 && j >= 4) {
        const BasisProduct p = q.t[j - 4][i];
        o[i][j] = {p.index + 4, p.sign};
      } else if (i >= 4 && j < 4) {
        const BasisProduct p = q.t[i - 4][j];
        o[i][j] = {p.index + 4, p.sign * conj_sign(j)};
      } else {
        const BasisProduct p = q.t[j - 4][i - 4];
        o[i][j] = {p.index, -p.sign * conj_sign(j - 4)};
      }
    }
  }
  return o;
}

}  // namespace

const OctonionTable& octonion_table() {
  static const OctonionTable table = build_octonion_table();
  return table;
}

Eigen::VectorXd octonion_multiply(const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& y) {
  const OctonionTable& t = octonion_table();
  Eigen::VectorXd z = Eigen::VectorXd::Zero(8);
  for (int i = 0; i < 8; ++i) {
    if (x(i) == 0.0) continue;
    for (int j = 0; j < 8; ++j) {
      const BasisProduct p = t[i][j];
      z(p.index) += p.sign * x(i) * y(j);
    }
  }
  return z;
}

Eigen::MatrixXd derivation_constraint_matrix() {
  const OctonionTable& t = octonion_table();
  // Unknowns: D_{ms}, m,s in 1..7 stored 0-based at column 7*(s-1)+(m-1).
  const auto col = [](int m, int s) { return 7 * (s - 1) + (m - 1); };

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(392, 49);
  int row = 0;
  for (int i = 1; i <= 7; ++i) {
    for (int j = 1; j <= 7; ++j) {
      for (int m = 0; m <= 7; ++m, ++row) {
        // Component m of D(e_i e_j) - D(e_i) e_j - e_i D(e_j).
        const BasisProduct prod = t[i][j];
        if (m >= 1 && prod.index >= 1) {
          A(row, col(m, prod.index)) += prod.sign;
        }
        for (int p = 1; p <= 7; ++p) {
          if (t[p][j].index == m) A(row, col(p, i)) -= t[p][j].sign;
        }
        for (int q = 1; q <= 7; ++q) {
          if (t[i][q].index == m) A(row, col(q, j)) -= t[i][q].sign;
        }
      }
    }
  }
  return A;
}

std::vector<Eigen::MatrixXd> octonion_derivation_basis() {
  const Eigen::MatrixXd A = derivation_constraint_matrix();
  const NullspaceResult ns = rank_and_nullspace(A);
  if (ns.nullity() != 14) {
    throw NumericalError("octonion derivation space has dimension " +
                         std::to_string(ns.nullity()) + ", expected 14");
  }
  std::vector<Eigen::MatrixXd> basis;
  basis.reserve(14);
  for (Eigen::Index k = 0; k < 14; ++k) {
    Eigen::VectorXd v = ns.basis.col(k);
    basis.emplace_back(Eigen::Map<const Eigen::MatrixXd>(v.data(), 7, 7));
  }
  return basis;
}

}  // namespace liecurv
