#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "liecurv/algebra.hpp"
#include "liecurv/numerics.hpp"

namespace liecurv {

// Column layout of the linear system. Unknowns are K (one skew matrix per
// basis vector, upper-triangle storage) followed by Phi (one vector per
// basis pair i<j). Total n^2 (n-1) columns.
struct UnknownLayout {
  int n = 0;

  Eigen::Index pair_count() const {
    return static_cast<Eigen::Index>(n) * (n - 1) / 2;
  }
  Eigen::Index k_cols() const { return n * pair_count(); }
  Eigen::Index phi_cols() const { return pair_count() * n; }
  Eigen::Index total_cols() const { return k_cols() + phi_cols(); }

  // Lexicographic index of the pair (a, b), a < b.
  Eigen::Index pair_index(int a, int b) const {
    return static_cast<Eigen::Index>(a) * (2 * n - a - 1) / 2 + (b - a - 1);
  }

  // Entry (a, b), a < b, of the skew matrix K_z.
  Eigen::Index k_col(int z, int a, int b) const {
    return static_cast<Eigen::Index>(z) * pair_count() + pair_index(a, b);
  }

  // Component m of Phi(e_a, e_b), a < b.
  Eigen::Index phi_col(int a, int b, int m) const {
    return k_cols() + pair_index(a, b) * n + m;
  }
};

// Reads the K_z block of an unknown vector as a full skew matrix.
Eigen::MatrixXd decode_k(const UnknownLayout& layout, const Eigen::VectorXd& v,
                         int z);
// Reads Phi(e_i, e_j) for any i != j (antisymmetric in the pair).
Eigen::VectorXd decode_phi(const UnknownLayout& layout,
                           const Eigen::VectorXd& v, int i, int j);

enum class RowKind { operator_entry, cycle, restriction };

struct RowProvenance {
  RowKind kind;
  // Triple (i < j < k) for operator_entry and cycle rows; for restriction
  // rows i = z (the K slot) and j = w (the adjoint direction).
  int i = -1, j = -1, k = -1;
  // Operator entry position p < q, meaningful for operator_entry rows.
  int p = -1, q = -1;
};

struct AssemblyOptions {
  bool restricted = false;
  // Test hook: dropping the cycle rows must strictly enlarge the nullspace.
  bool include_cycle_rows = true;
};

// The linear system expressing, for every basis triple (e_i, e_j, e_k) with
// i < j < k, the cyclic operator identity
//   sum_cyc( [ad([e_i,e_j]), K_k] + ad([K_i e_j - K_j e_i, e_k])
//            + Phi(e_i,e_j) ^ e_k ) = 0
// (upper-triangle entries only; the operator is skew) together with the
// cyclic scalar identity sum_cyc <Phi(e_i,e_j), e_k> = 0, and optionally
// the restriction rows <K_z, ad(e_w)> = 0 for all z, w. Rows are generated
// on demand in a fixed order, so the system never needs to be stored.
class BianchiSystem {
 public:
  BianchiSystem(const LieAlgebra& g, const AssemblyOptions& opts = {});

  const LieAlgebra& algebra() const { return g_; }
  const UnknownLayout& layout() const { return layout_; }
  bool restricted() const { return opts_.restricted; }

  Eigen::Index rows() const;
  Eigen::Index cols() const { return layout_.total_cols(); }
  Eigen::Index triple_count() const;
  Eigen::Index rows_per_triple() const;

  RowProvenance provenance(Eigen::Index row) const;

  using RowCallback = std::function<void(
      Eigen::Index row, std::span<const Eigen::Index> cols,
      std::span<const double> vals)>;

  // Streams every nonempty row in index order. Entries are sorted by
  // column; exact zeros produced by cancellation are dropped. Row indices
  // are slot numbers under the fixed layout, so an operator entry that is
  // identically zero for a sparse structure tensor skips its slot and no
  // all-zero row is ever delivered.
  void for_each_row(const RowCallback& fn) const;
  // Streams the rows generated by triples [triple_begin, triple_end) plus,
  // when the full triple range is covered, the restriction rows.
  void for_each_row_in_triples(Eigen::Index triple_begin,
                               Eigen::Index triple_end,
                               const RowCallback& fn) const;

  Eigen::MatrixXd dense() const;

  // Euclidean residual ||A v|| / ||v||.
  double residual(const Eigen::VectorXd& v) const;

  // Sparse triplet export: layout header followed by `row col value` lines.
  void write_triplets(std::ostream& out) const;

 private:
  LieAlgebra g_;
  AssemblyOptions opts_;
  UnknownLayout layout_;
  std::vector<Eigen::MatrixXd> ad_bracket_;  // ad([e_t, e_z]) at t*n+z
  std::vector<std::pair<int, int>> pairs_;   // lexicographic (a, b), a < b
  std::vector<std::array<int, 3>> triples_;  // lexicographic (i, j, k)
};

BianchiSystem assemble_system(const LieAlgebra& g,
                              const AssemblyOptions& opts = {});

struct SolutionClassification {
  double phi_norm = 0.0;
  double k_ad_residual = 0.0;
};

// Norm of the Phi block and of the component of the K block orthogonal to
// Hom(g, ad(g)).
SolutionClassification classify_solution(const LieAlgebra& g,
                                         const UnknownLayout& layout,
                                         const Eigen::VectorXd& v);

// The known solution family K_z = ad(A e_z), Phi = 0 as an unknown vector.
Eigen::VectorXd inject_adjoint_family(const LieAlgebra& g,
                                      const Eigen::MatrixXd& A);

enum class NullspacePath { automatic, dense, gram };

struct NullspaceOptions {
  RankPolicy policy;
  NullspacePath path = NullspacePath::automatic;
  int threads = 1;
  // Residual guard for computed basis vectors, relative to sigma_max.
  double residual_tol = 1e-8;
  // Dense systems larger than this many entries are decomposed by a
  // row-streamed QR whose triangular factor feeds the SVD, keeping the
  // dense path O(cols^2) in memory.
  Eigen::Index dense_entry_cap = 100000000;
};

struct NullspaceReport {
  std::string algebra;
  bool restricted = false;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  int dimension = 0;
  double sv_gap = 0.0;
  double sigma_max = 0.0;
  std::string path;  // "dense" or "gram"
  Eigen::MatrixXd basis;
  std::vector<SolutionClassification> classification;
  double max_phi_norm = 0.0;
  double max_k_ad_residual = 0.0;
  double max_residual = 0.0;
  double wall_time_s = 0.0;
};

// Rank-revealing solve of the assembled system under the policy. Ambiguous
// rank decisions throw AmbiguousRankError; they are never resolved
// silently.
NullspaceReport system_nullspace(const BianchiSystem& sys,
                                 const NullspaceOptions& opts = {});

struct VerifyOptions {
  NullspaceOptions nullspace;
  double classification_tol = 1e-8;
};

struct PropositionReport {
  std::string algebra;
  int n = 0;
  bool hypothesis_satisfied = false;  // requires dim g > 4
  int expected_unrestricted = 0;      // n^2
  int expected_restricted = 0;
  NullspaceReport unrestricted;
  NullspaceReport restricted;
  bool pass = false;
  std::string status;  // "pass", "fail" or "outside hypothesis"
};

// Runs both assemblies and compares against the expected dimensions
// (n^2 and 0) with vanishing classifications. For dim g <= 4 the report is
// computed but labeled "outside hypothesis" and no pass/fail is asserted.
PropositionReport verify_proposition(const LieAlgebra& g,
                                     const VerifyOptions& opts = {});

}  // namespace liecurv
