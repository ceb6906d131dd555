#include "liecurv/bianchi.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <thread>

#include "liecurv/errors.hpp"

namespace liecurv {

namespace {

// Sparse row under construction. Columns are stamped on first touch so a
// row costs O(entries) to reset, not O(total columns).
class RowScratch {
 public:
  explicit RowScratch(Eigen::Index cols)
      : coef_(cols, 0.0), stamp_(cols, 0), current_(0) {
    touched_.reserve(64);
  }

  void begin() {
    ++current_;
    touched_.clear();
  }

  void add(Eigen::Index col, double val) {
    if (val == 0.0) return;
    if (stamp_[col] != current_) {
      stamp_[col] = current_;
      coef_[col] = 0.0;
      touched_.push_back(col);
    }
    coef_[col] += val;
  }

  // Sorted column/value spans; exact zeros from cancellation are dropped.
  void finish(std::vector<Eigen::Index>& cols, std::vector<double>& vals) {
    std::sort(touched_.begin(), touched_.end());
    cols.clear();
    vals.clear();
    for (Eigen::Index c : touched_) {
      if (coef_[c] != 0.0) {
        cols.push_back(c);
        vals.push_back(coef_[c]);
      }
    }
  }

 private:
  std::vector<double> coef_;
  std::vector<Eigen::Index> touched_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t current_;
};

}  // namespace

Eigen::MatrixXd decode_k(const UnknownLayout& layout, const Eigen::VectorXd& v,
                         int z) {
  const int n = layout.n;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const double x = v(layout.k_col(z, a, b));
      K(a, b) = x;
      K(b, a) = -x;
    }
  }
  return K;
}

Eigen::VectorXd decode_phi(const UnknownLayout& layout,
                           const Eigen::VectorXd& v, int i, int j) {
  const int n = layout.n;
  if (i == j) return Eigen::VectorXd::Zero(n);
  const double sign = i < j ? 1.0 : -1.0;
  const int a = std::min(i, j), b = std::max(i, j);
  return sign * v.segment(layout.phi_col(a, b, 0), n);
}

BianchiSystem::BianchiSystem(const LieAlgebra& g, const AssemblyOptions& opts)
    : g_(g), opts_(opts) {
  const int n = g.dim();
  if (n < 3) {
    throw InputError("system needs dim >= 3, got " + std::to_string(n));
  }
  layout_.n = n;

  // ad([e_t, e_z]) for every ordered pair; [e_t, e_z] is column z of ad_t.
  ad_bracket_.reserve(static_cast<std::size_t>(n) * n);
  for (int t = 0; t < n; ++t) {
    for (int z = 0; z < n; ++z) {
      ad_bracket_.push_back(ad(g_, Eigen::VectorXd(g_.ad_basis(t).col(z))));
    }
  }

  pairs_.reserve(layout_.pair_count());
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) pairs_.push_back({a, b});

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) triples_.push_back({i, j, k});
}

Eigen::Index BianchiSystem::triple_count() const {
  return static_cast<Eigen::Index>(triples_.size());
}

Eigen::Index BianchiSystem::rows_per_triple() const {
  return layout_.pair_count() + (opts_.include_cycle_rows ? 1 : 0);
}

Eigen::Index BianchiSystem::rows() const {
  const int n = layout_.n;
  return triple_count() * rows_per_triple() +
         (opts_.restricted ? static_cast<Eigen::Index>(n) * n : 0);
}

RowProvenance BianchiSystem::provenance(Eigen::Index row) const {
  const Eigen::Index rpt = rows_per_triple();
  const Eigen::Index triple_rows = triple_count() * rpt;
  RowProvenance p{};
  if (row < triple_rows) {
    const auto& tr = triples_[static_cast<std::size_t>(row / rpt)];
    p.i = tr[0];
    p.j = tr[1];
    p.k = tr[2];
    const Eigen::Index within = row % rpt;
    if (within < layout_.pair_count()) {
      p.kind = RowKind::operator_entry;
      const auto& pq = pairs_[static_cast<std::size_t>(within)];
      p.p = pq.first;
      p.q = pq.second;
    } else {
      p.kind = RowKind::cycle;
    }
    return p;
  }
  const Eigen::Index idx = row - triple_rows;
  p.kind = RowKind::restriction;
  p.i = static_cast<int>(idx / layout_.n);  // K slot z
  p.j = static_cast<int>(idx % layout_.n);  // adjoint direction w
  return p;
}

void BianchiSystem::for_each_row_in_triples(Eigen::Index triple_begin,
                                            Eigen::Index triple_end,
                                            const RowCallback& fn) const {
  const int n = layout_.n;
  const Eigen::Index rpt = rows_per_triple();

  RowScratch scratch(layout_.total_cols());
  std::vector<Eigen::Index> cols;
  std::vector<double> vals;
  cols.reserve(64);
  vals.reserve(64);

  // K_z(r, c) contribution; the matrix is skew with upper-triangle storage.
  const auto add_k = [&](int z, int r, int c, double val) {
    if (r == c) return;
    if (r < c) {
      scratch.add(layout_.k_col(z, r, c), val);
    } else {
      scratch.add(layout_.k_col(z, c, r), -val);
    }
  };
  // Component m of Phi(e_a, e_b); antisymmetric in the pair.
  const auto add_phi = [&](int a, int b, int m, double val) {
    if (a < b) {
      scratch.add(layout_.phi_col(a, b, m), val);
    } else {
      scratch.add(layout_.phi_col(b, a, m), -val);
    }
  };

  Eigen::Index row = triple_begin * rpt;
  for (Eigen::Index t = triple_begin; t < triple_end; ++t) {
    const auto& tr = triples_[static_cast<std::size_t>(t)];
    const int cyc[3][3] = {{tr[0], tr[1], tr[2]},
                           {tr[1], tr[2], tr[0]},
                           {tr[2], tr[0], tr[1]}};
    for (const auto& pq : pairs_) {
      const int p = pq.first, q = pq.second;
      scratch.begin();
      for (const auto& abz : cyc) {
        const int a = abz[0], b = abz[1], z = abz[2];
        // [ad([e_a, e_b]), K_z] entry (p, q).
        const Eigen::MatrixXd& W = ad_bracket_[a * n + b];
        for (int r = 0; r < n; ++r) {
          add_k(z, r, q, W(p, r));
          add_k(z, p, r, -W(r, q));
        }
        // ad([K_a e_b - K_b e_a, e_z]) entry (p, q).
        for (int s = 0; s < n; ++s) {
          const double val = ad_bracket_[s * n + z](p, q);
          add_k(a, s, b, val);
          add_k(b, s, a, -val);
        }
        // (Phi(e_a, e_b) ^ e_z) entry (p, q) = Phi_q d_pz - d_qz Phi_p.
        if (z == p) add_phi(a, b, q, 1.0);
        if (z == q) add_phi(a, b, p, -1.0);
      }
      scratch.finish(cols, vals);
      // Sparse structure tensors leave some operator entries identically
      // zero; those row slots keep their index but are never delivered.
      if (!cols.empty()) fn(row, cols, vals);
      ++row;
    }
    if (opts_.include_cycle_rows) {
      scratch.begin();
      add_phi(tr[0], tr[1], tr[2], 1.0);
      add_phi(tr[1], tr[2], tr[0], 1.0);
      add_phi(tr[2], tr[0], tr[1], 1.0);
      scratch.finish(cols, vals);
      fn(row, cols, vals);
      ++row;
    }
  }

  // The block that closes the triple range also carries the restriction
  // rows <K_z, ad(e_w)> = 0.
  if (opts_.restricted && triple_end == triple_count()) {
    Eigen::Index rrow = triple_count() * rpt;
    for (int z = 0; z < n; ++z) {
      for (int w = 0; w < n; ++w) {
        scratch.begin();
        const Eigen::MatrixXd& aw = g_.ad_basis(w);
        for (int a = 0; a < n; ++a) {
          for (int b = a + 1; b < n; ++b) {
            scratch.add(layout_.k_col(z, a, b), 2.0 * aw(a, b));
          }
        }
        scratch.finish(cols, vals);
        fn(rrow++, cols, vals);
      }
    }
  }
}

void BianchiSystem::for_each_row(const RowCallback& fn) const {
  for_each_row_in_triples(0, triple_count(), fn);
}

Eigen::MatrixXd BianchiSystem::dense() const {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows(), cols());
  for_each_row([&](Eigen::Index row, std::span<const Eigen::Index> cs,
                   std::span<const double> vs) {
    for (std::size_t e = 0; e < cs.size(); ++e) A(row, cs[e]) = vs[e];
  });
  return A;
}

double BianchiSystem::residual(const Eigen::VectorXd& v) const {
  if (v.size() != cols()) {
    throw InputError("residual: vector length does not match system columns");
  }
  const double vn = v.norm();
  if (vn == 0.0) return 0.0;
  double sq = 0.0;
  for_each_row([&](Eigen::Index, std::span<const Eigen::Index> cs,
                   std::span<const double> vs) {
    double dot = 0.0;
    for (std::size_t e = 0; e < cs.size(); ++e) dot += vs[e] * v(cs[e]);
    sq += dot * dot;
  });
  return std::sqrt(sq) / vn;
}

void BianchiSystem::write_triplets(std::ostream& out) const {
  out << "# bianchi-system algebra=" << g_.id().name() << " n=" << layout_.n
      << " restricted=" << (opts_.restricted ? 1 : 0) << " rows=" << rows()
      << " cols=" << cols() << " k_cols=" << layout_.k_cols()
      << " phi_cols=" << layout_.phi_cols() << "\n";
  std::ostringstream line;
  line.precision(17);
  for_each_row([&](Eigen::Index row, std::span<const Eigen::Index> cs,
                   std::span<const double> vs) {
    for (std::size_t e = 0; e < cs.size(); ++e) {
      line.str("");
      line << row << " " << cs[e] << " " << vs[e] << "\n";
      out << line.str();
    }
  });
}

BianchiSystem assemble_system(const LieAlgebra& g,
                              const AssemblyOptions& opts) {
  const ToleranceReport& tol = g.tolerance_report();
  if (tol.orthonormality > 1e-8 || tol.jacobi > 1e-8) {
    throw InputError(
        "structure tensor residuals too large for assembly (orthonormality " +
        std::to_string(tol.orthonormality) + ", jacobi " +
        std::to_string(tol.jacobi) + ")");
  }
  return BianchiSystem(g, opts);
}

SolutionClassification classify_solution(const LieAlgebra& g,
                                         const UnknownLayout& layout,
                                         const Eigen::VectorXd& v) {
  SolutionClassification c;
  c.phi_norm = v.tail(layout.phi_cols()).norm();
  double sq = 0.0;
  for (int z = 0; z < layout.n; ++z) {
    const Eigen::MatrixXd K = decode_k(layout, v, z);
    sq += project_ad(g, K).second.squaredNorm();
  }
  c.k_ad_residual = std::sqrt(sq);
  return c;
}

Eigen::VectorXd inject_adjoint_family(const LieAlgebra& g,
                                      const Eigen::MatrixXd& A) {
  const int n = g.dim();
  if (A.rows() != n || A.cols() != n) {
    throw InputError("inject_adjoint_family: A must be dim x dim");
  }
  UnknownLayout layout;
  layout.n = n;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(layout.total_cols());
  for (int z = 0; z < n; ++z) {
    const Eigen::MatrixXd Kz = ad(g, Eigen::VectorXd(A.col(z)));
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) v(layout.k_col(z, a, b)) = Kz(a, b);
  }
  return v;
}

namespace {

NullspaceResult streamed_qr_nullspace(const BianchiSystem& sys,
                                      const RankPolicy& policy) {
  const Eigen::Index cols = sys.cols();
  const Eigen::Index block = 4 * cols;
  Eigen::MatrixXd buf = Eigen::MatrixXd::Zero(cols + block, cols);
  Eigen::Index filled = 0;

  const auto compact = [&]() {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(buf.topRows(filled));
    const Eigen::Index keep = std::min(filled, cols);
    Eigen::MatrixXd R = qr.matrixQR()
                            .topRows(keep)
                            .template triangularView<Eigen::Upper>();
    buf.setZero();
    buf.topRows(keep) = R;
    filled = keep;
  };

  sys.for_each_row([&](Eigen::Index, std::span<const Eigen::Index> cs,
                       std::span<const double> vs) {
    if (filled == buf.rows()) compact();
    buf.row(filled).setZero();
    for (std::size_t e = 0; e < cs.size(); ++e) buf(filled, cs[e]) = vs[e];
    ++filled;
  });
  if (filled > cols) compact();

  return nullspace_from_qr_factor(buf.topRows(std::min(filled, cols)),
                                  sys.rows(), policy);
}

NullspaceResult gram_nullspace(const BianchiSystem& sys,
                               const NullspaceOptions& opts) {
  const Eigen::Index cols = sys.cols();
  const Eigen::Index T = sys.triple_count();

  // One accumulator per worker; cap workers so the extra Gram copies stay
  // within ~3.5 GB.
  int workers = std::max(1, opts.threads);
  const double per_acc = static_cast<double>(cols) * cols * 8.0;
  while (workers > 1 && per_acc * workers > 3.5e9) --workers;
  workers = static_cast<int>(
      std::min<Eigen::Index>(workers, std::max<Eigen::Index>(T, 1)));

  std::vector<GramAccumulator> parts;
  parts.reserve(workers);
  for (int w = 0; w < workers; ++w) parts.emplace_back(cols);

  if (workers == 1) {
    sys.for_each_row([&](Eigen::Index, std::span<const Eigen::Index> cs,
                         std::span<const double> vs) {
      parts[0].add_row(cs, vs);
    });
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      const Eigen::Index tb = T * w / workers;
      const Eigen::Index te = T * (w + 1) / workers;
      pool.emplace_back([&sys, &parts, w, tb, te]() {
        sys.for_each_row_in_triples(
            tb, te,
            [&parts, w](Eigen::Index, std::span<const Eigen::Index> cs,
                        std::span<const double> vs) {
              parts[w].add_row(cs, vs);
            });
      });
    }
    for (auto& th : pool) th.join();
  }

  // Merge in block order so the float sums are independent of scheduling.
  Eigen::MatrixXd gram = parts[0].take_gram();
  for (int w = 1; w < workers; ++w) gram += parts[w].gram();
  return rank_and_nullspace_gram(gram, sys.rows(), opts.policy, true);
}

}  // namespace

NullspaceReport system_nullspace(const BianchiSystem& sys,
                                 const NullspaceOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();

  NullspaceReport rep;
  rep.algebra = sys.algebra().id().name();
  rep.restricted = sys.restricted();
  rep.rows = sys.rows();
  rep.cols = sys.cols();

  NullspacePath path = opts.path;
  if (path == NullspacePath::automatic) {
    path = rep.rows > static_cast<Eigen::Index>(opts.policy.gram_row_cutoff)
               ? NullspacePath::gram
               : NullspacePath::dense;
  }

  NullspaceResult res;
  if (path == NullspacePath::gram) {
    rep.path = "gram";
    res = gram_nullspace(sys, opts);
  } else {
    rep.path = "dense";
    if (rep.rows * rep.cols <= opts.dense_entry_cap) {
      res = rank_and_nullspace(sys.dense(), opts.policy);
    } else {
      res = streamed_qr_nullspace(sys, opts.policy);
    }
  }

  rep.dimension = static_cast<int>(res.nullity());
  rep.sv_gap = res.sv_gap;
  rep.sigma_max = res.sigma_max;
  rep.basis = std::move(res.basis);

  if (rep.dimension > 0) {
    const UnknownLayout& layout = sys.layout();
    rep.classification.reserve(rep.dimension);
    for (int c = 0; c < rep.dimension; ++c) {
      const SolutionClassification cls =
          classify_solution(sys.algebra(), layout, rep.basis.col(c));
      rep.max_phi_norm = std::max(rep.max_phi_norm, cls.phi_norm);
      rep.max_k_ad_residual = std::max(rep.max_k_ad_residual, cls.k_ad_residual);
      rep.classification.push_back(cls);
    }

    // One streaming pass bounds ||A v|| for every basis column at once.
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(rep.dimension);
    sys.for_each_row([&](Eigen::Index, std::span<const Eigen::Index> cs,
                         std::span<const double> vs) {
      for (int c = 0; c < rep.dimension; ++c) {
        double dot = 0.0;
        for (std::size_t e = 0; e < cs.size(); ++e)
          dot += vs[e] * rep.basis(cs[e], c);
        sq(c) += dot * dot;
      }
    });
    rep.max_residual = std::sqrt(sq.maxCoeff());
    if (rep.max_residual > opts.residual_tol * rep.sigma_max) {
      throw NumericalError("nullspace residual " +
                           std::to_string(rep.max_residual) +
                           " exceeds tolerance for " + rep.algebra);
    }
  }

  rep.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

PropositionReport verify_proposition(const LieAlgebra& g,
                                     const VerifyOptions& opts) {
  PropositionReport rep;
  rep.algebra = g.id().name();
  rep.n = g.dim();
  rep.hypothesis_satisfied = rep.n > 4;
  rep.expected_unrestricted = rep.n * rep.n;
  rep.expected_restricted = 0;

  AssemblyOptions unres;
  unres.restricted = false;
  rep.unrestricted = system_nullspace(assemble_system(g, unres),
                                      opts.nullspace);

  AssemblyOptions restr;
  restr.restricted = true;
  rep.restricted = system_nullspace(assemble_system(g, restr), opts.nullspace);

  const bool dims_match =
      rep.unrestricted.dimension == rep.expected_unrestricted &&
      rep.restricted.dimension == rep.expected_restricted;
  const bool adjoint_only =
      rep.unrestricted.max_phi_norm <= opts.classification_tol &&
      rep.unrestricted.max_k_ad_residual <= opts.classification_tol;

  if (!rep.hypothesis_satisfied) {
    rep.pass = false;
    rep.status = "outside hypothesis";
  } else {
    rep.pass = dims_match && adjoint_only;
    rep.status = rep.pass ? "pass" : "fail";
  }
  return rep;
}

}  // namespace liecurv
