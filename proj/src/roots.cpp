#include "liecurv/roots.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "liecurv/random.hpp"

namespace liecurv {

namespace {

using Cplx = std::complex<double>;

constexpr double kRootMatchTol = 1e-7;
constexpr double kEigenResidualTol = 1e-8;

Eigen::MatrixXd orthonormalize_columns(Eigen::MatrixXd m) {
  for (Eigen::Index a = 0; a < m.cols(); ++a) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index b = 0; b < a; ++b) {
        m.col(a) -= m.col(b).dot(m.col(a)) * m.col(b);
      }
    }
    const double norm = m.col(a).norm();
    if (norm < 1e-12) {
      throw NumericalError("torus candidates are linearly dependent");
    }
    m.col(a) /= norm;
  }
  return m;
}

void check_torus(const LieAlgebra& g, const Eigen::MatrixXd& cartan) {
  for (Eigen::Index a = 0; a < cartan.cols(); ++a) {
    for (Eigen::Index b = a + 1; b < cartan.cols(); ++b) {
      if (bracket(g, cartan.col(a), cartan.col(b)).norm() > 1e-10) {
        throw NumericalError("torus basis does not commute");
      }
    }
  }
}

// Centralizer of a seeded random element; for a regular element this is a
// maximal torus. Used for g2 and for algebras without a defining
// representation.
Eigen::MatrixXd cartan_by_centralizer(const LieAlgebra& g, int rank,
                                      std::uint64_t seed) {
  for (int attempt = 0; attempt < 16; ++attempt) {
    std::mt19937_64 rng = seeded_engine(seed + 1000003ull * attempt);
    const Eigen::VectorXd x = random_gaussian(g.dim(), rng);
    NullspaceResult kernel;
    try {
      kernel = rank_and_nullspace(ad(g, x));
    } catch (const AmbiguousRankError&) {
      continue;
    }
    if (kernel.nullity() != rank) continue;
    Eigen::MatrixXd cartan = kernel.basis;
    bool commutes = true;
    for (Eigen::Index a = 0; a < cartan.cols() && commutes; ++a) {
      for (Eigen::Index b = a + 1; b < cartan.cols(); ++b) {
        if (bracket(g, cartan.col(a), cartan.col(b)).norm() > 1e-10) {
          commutes = false;
          break;
        }
      }
    }
    if (commutes) return orthonormalize_columns(std::move(cartan));
  }
  throw NumericalError("failed to find a regular centralizer torus");
}

Eigen::MatrixXd cartan_from_defining_rep(const LieAlgebra& g) {
  const Cplx im(0.0, 1.0);
  const int l = g.rank_param();
  std::vector<Eigen::MatrixXcd> h;
  switch (g.family()) {
    case Family::su: {
      for (int j = 0; j + 1 < l; ++j) {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(l, l);
        m(j, j) = im;
        m(j + 1, j + 1) = -im;
        h.push_back(m);
      }
      break;
    }
    case Family::so: {
      for (int a = 0; 2 * a + 1 < l; ++a) {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(l, l);
        m(2 * a, 2 * a + 1) = 1.0;
        m(2 * a + 1, 2 * a) = -1.0;
        h.push_back(m);
      }
      break;
    }
    case Family::sp: {
      for (int j = 0; j < l; ++j) {
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(l, l);
        a(j, j) = im;
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2 * l, 2 * l);
        m.topLeftCorner(l, l) = a;
        m.bottomRightCorner(l, l) = a.conjugate();
        h.push_back(m);
      }
      break;
    }
    case Family::g2:
      throw NumericalError("g2 torus must come from the centralizer path");
  }
  Eigen::MatrixXd cartan(g.dim(), static_cast<Eigen::Index>(h.size()));
  for (std::size_t a = 0; a < h.size(); ++a) {
    cartan.col(static_cast<Eigen::Index>(a)) = g.coordinates_of(h[a]);
  }
  return orthonormalize_columns(std::move(cartan));
}

// Tolerant lexicographic comparison on the imaginary parts of two root
// tuples: a < b if the first component differing by more than tol is
// smaller.
bool lex_less(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b, double tol) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double da = a(i).imag(), db = b(i).imag();
    if (std::abs(da - db) > tol) return da < db;
  }
  return false;
}

}  // namespace

int algebra_rank(Family family, int l) {
  switch (family) {
    case Family::su:
      return l - 1;
    case Family::so:
      return l / 2;
    case Family::sp:
      return l;
    case Family::g2:
      return 2;
  }
  return 0;
}

int reference_min_rank(Family family, int l) {
  switch (family) {
    case Family::su:
      return 2 * (l - 1);
    case Family::so:
      return l == 3 ? 2 : 2 * (l - 3);
    case Family::sp:
      return 2 * l;
    case Family::g2:
      return 6;
  }
  return 0;
}

Eigen::MatrixXd cartan_subalgebra(const LieAlgebra& g, std::uint64_t seed) {
  const int rank = algebra_rank(g.family(), g.rank_param());
  Eigen::MatrixXd cartan;
  if (g.has_raw_basis() && g.family() != Family::g2) {
    cartan = cartan_from_defining_rep(g);
    if (cartan.cols() != rank) {
      throw NumericalError("torus from defining representation has wrong size");
    }
  } else {
    cartan = cartan_by_centralizer(g, rank, seed);
  }
  check_torus(g, cartan);
  return cartan;
}

RootDatum root_decomposition(const LieAlgebra& g, std::uint64_t seed) {
  const Eigen::MatrixXd cartan = cartan_subalgebra(g, seed);
  const int rank = static_cast<int>(cartan.cols());
  const int n = g.dim();
  const int expected_roots = n - rank;

  std::vector<Eigen::MatrixXcd> ad_h;
  ad_h.reserve(rank);
  for (int a = 0; a < rank; ++a) {
    ad_h.push_back(ad(g, Eigen::VectorXd(cartan.col(a))).cast<Cplx>());
  }

  std::string last_failure = "no attempts made";
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::mt19937_64 rng = seeded_engine(seed + 17ull * attempt + 1);
    std::uniform_int_distribution<int> coeff(1, 97);
    Eigen::VectorXd h = Eigen::VectorXd::Zero(n);
    for (int a = 0; a < rank; ++a) h += coeff(rng) * cartan.col(a);

    const auto [vals, vecs] = complex_eig(ad(g, h).cast<Cplx>());
    const double scale = vals.cwiseAbs().maxCoeff();

    std::vector<int> nonzero;
    for (int s = 0; s < n; ++s) {
      if (std::abs(vals(s)) > 1e-8 * scale) nonzero.push_back(s);
    }
    if (static_cast<int>(nonzero.size()) != expected_roots) {
      last_failure = "kernel of the combined torus element has dimension " +
                     std::to_string(n - nonzero.size());
      continue;
    }

    Eigen::MatrixXcd root_vectors(n, expected_roots);
    Eigen::MatrixXcd roots(rank, expected_roots);
    bool clean = true;
    for (int idx = 0; idx < expected_roots && clean; ++idx) {
      Eigen::VectorXcd v = vecs.col(nonzero[idx]);
      v /= v.norm();
      for (int a = 0; a < rank; ++a) {
        const Cplx alpha = v.dot(ad_h[a] * v);  // conjugate-linear in v
        roots(a, idx) = alpha;
        if ((ad_h[a] * v - alpha * v).norm() > kEigenResidualTol) {
          last_failure = "joint eigenvector residual too large";
          clean = false;
          break;
        }
      }
      // Deterministic phase: largest component made real positive.
      int imax = 0;
      for (int i = 1; i < n; ++i) {
        if (std::abs(v(i)) > std::abs(v(imax))) imax = i;
      }
      v *= std::conj(v(imax)) / std::abs(v(imax));
      root_vectors.col(idx) = v;
    }
    if (!clean) continue;

    // Distinctness and +- pairing under the matching tolerance.
    bool paired = true;
    for (int i = 0; i < expected_roots && paired; ++i) {
      int negatives = 0;
      for (int j = 0; j < expected_roots; ++j) {
        if (i != j &&
            (roots.col(i) - roots.col(j)).cwiseAbs().maxCoeff() < kRootMatchTol) {
          last_failure = "coinciding root tuples (non-regular element)";
          paired = false;
          break;
        }
        if ((roots.col(i) + roots.col(j)).cwiseAbs().maxCoeff() < kRootMatchTol) {
          ++negatives;
        }
      }
      if (paired && negatives != 1) {
        last_failure = "roots do not come in unique +- pairs";
        paired = false;
      }
    }
    if (!paired) continue;

    // Canonical order: lexicographically decreasing tuples.
    std::vector<int> order(expected_roots);
    for (int i = 0; i < expected_roots; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return lex_less(roots.col(b), roots.col(a), kRootMatchTol);
    });

    RootDatum rd;
    rd.cartan = cartan;
    rd.seed = seed;
    rd.root_vectors.resize(n, expected_roots);
    rd.roots.resize(rank, expected_roots);
    for (int i = 0; i < expected_roots; ++i) {
      rd.root_vectors.col(i) = root_vectors.col(order[i]);
      rd.roots.col(i) = roots.col(order[i]);
    }
    return rd;
  }
  throw NumericalError("root decomposition failed after 8 attempts: " +
                       last_failure);
}

int highest_root_index(const RootDatum& rd) {
  if (rd.root_count() == 0) throw InputError("empty root datum");
  // Roots are sorted lexicographically decreasing.
  return 0;
}

Eigen::VectorXcd highest_root_vector(const RootDatum& rd) {
  return rd.root_vectors.col(highest_root_index(rd));
}

MinRankResult min_adjoint_rank(const LieAlgebra& g, std::uint64_t seed,
                               const RankPolicy& policy) {
  const RootDatum rd = root_decomposition(g, seed);
  const Eigen::VectorXcd x = highest_root_vector(rd);
  const Eigen::MatrixXcd m = ad(g, x);

  MinRankResult r;
  r.dim = g.dim();
  r.cartan_rank = rd.rank();
  r.expected_cartan_rank = algebra_rank(g.family(), g.rank_param());
  r.computed = static_cast<int>(rank_of(m, policy));
  r.expected = reference_min_rank(g.family(), g.rank_param());
  const Eigen::MatrixXcd m2 = m * m;
  r.square_rank = static_cast<int>(rank_of(m2, policy));
  r.cube_residual = (m2 * m).norm();
  return r;
}

}  // namespace liecurv
