#include "liecurv/algebra.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cctype>
#include <cmath>
#include <complex>

#include "liecurv/octonions.hpp"

namespace liecurv {

namespace {

using Cplx = std::complex<double>;

std::vector<Eigen::MatrixXcd> raw_basis_su(int l) {
  std::vector<Eigen::MatrixXcd> basis;
  basis.reserve(static_cast<std::size_t>(l) * l - 1);
  const Cplx im(0.0, 1.0);
  for (int j = 0; j + 1 < l; ++j) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(l, l);
    m(j, j) = im;
    m(j + 1, j + 1) = -im;
    basis.push_back(m);
  }
  for (int j = 0; j < l; ++j) {
    for (int k = j + 1; k < l; ++k) {
      Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(l, l);
      m(j, k) = 1.0;
      m(k, j) = -1.0;
      basis.push_back(m);
      m(j, k) = im;
      m(k, j) = im;
      basis.push_back(m);
    }
  }
  return basis;
}

std::vector<Eigen::MatrixXcd> raw_basis_so(int l) {
  std::vector<Eigen::MatrixXcd> basis;
  basis.reserve(static_cast<std::size_t>(l) * (l - 1) / 2);
  for (int j = 0; j < l; ++j) {
    for (int k = j + 1; k < l; ++k) {
      Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(l, l);
      m(j, k) = 1.0;
      m(k, j) = -1.0;
      basis.push_back(m);
    }
  }
  return basis;
}

// sp(l) inside u(2l): blocks [[A, B], [-conj(B), conj(A)]] with A
// anti-Hermitian and B symmetric.
Eigen::MatrixXcd sp_embed(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
  const Eigen::Index l = A.rows();
  Eigen::MatrixXcd m(2 * l, 2 * l);
  m.topLeftCorner(l, l) = A;
  m.topRightCorner(l, l) = B;
  m.bottomLeftCorner(l, l) = -B.conjugate();
  m.bottomRightCorner(l, l) = A.conjugate();
  return m;
}

std::vector<Eigen::MatrixXcd> raw_basis_sp(int l) {
  std::vector<Eigen::MatrixXcd> basis;
  basis.reserve(static_cast<std::size_t>(l) * (2 * l + 1));
  const Cplx im(0.0, 1.0);
  const Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(l, l);

  for (int j = 0; j < l; ++j) {
    Eigen::MatrixXcd a = zero;
    a(j, j) = im;
    basis.push_back(sp_embed(a, zero));
  }
  for (int j = 0; j < l; ++j) {
    for (int k = j + 1; k < l; ++k) {
      Eigen::MatrixXcd a = zero;
      a(j, k) = 1.0;
      a(k, j) = -1.0;
      basis.push_back(sp_embed(a, zero));
      a(j, k) = im;
      a(k, j) = im;
      basis.push_back(sp_embed(a, zero));
    }
  }
  for (int pass = 0; pass < 2; ++pass) {
    const Cplx unit = pass == 0 ? Cplx(1.0, 0.0) : im;
    for (int j = 0; j < l; ++j) {
      Eigen::MatrixXcd b = zero;
      b(j, j) = unit;
      basis.push_back(sp_embed(zero, b));
    }
    for (int j = 0; j < l; ++j) {
      for (int k = j + 1; k < l; ++k) {
        Eigen::MatrixXcd b = zero;
        b(j, k) = unit;
        b(k, j) = unit;
        basis.push_back(sp_embed(zero, b));
      }
    }
  }
  return basis;
}

std::vector<Eigen::MatrixXcd> raw_basis_g2() {
  std::vector<Eigen::MatrixXcd> basis;
  basis.reserve(14);
  for (const Eigen::MatrixXd& d : octonion_derivation_basis()) {
    basis.push_back(d.cast<Cplx>());
  }
  return basis;
}

int expected_dim(Family family, int l) {
  switch (family) {
    case Family::su:
      return l * l - 1;
    case Family::so:
      return l * (l - 1) / 2;
    case Family::sp:
      return l * (2 * l + 1);
    case Family::g2:
      return 14;
  }
  return 0;
}

double frob_inner(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return a.cwiseProduct(b.conjugate()).sum().real();
}

// Structure tensor of the raw basis: brackets resolved by a Gram solve in
// the Frobenius inner product. Returns adraw[i](k, j) = c_{ijk}.
std::vector<Eigen::MatrixXd> raw_structure_tensor(
    const std::vector<Eigen::MatrixXcd>& raw) {
  const int n = static_cast<int>(raw.size());
  Eigen::MatrixXd gram(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      gram(i, j) = gram(j, i) = frob_inner(raw[i], raw[j]);
    }
  }
  Eigen::LDLT<Eigen::MatrixXd> factor(gram);
  if (factor.info() != Eigen::Success) {
    throw NumericalError("raw basis Gram matrix is not positive definite");
  }

  std::vector<Eigen::MatrixXd> adraw(n, Eigen::MatrixXd::Zero(n, n));
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Eigen::MatrixXcd com = raw[i] * raw[j] - raw[j] * raw[i];
      for (int k = 0; k < n; ++k) rhs(k) = frob_inner(com, raw[k]);
      const Eigen::VectorXd u = factor.solve(rhs);

      Eigen::MatrixXcd recon = Eigen::MatrixXcd::Zero(com.rows(), com.cols());
      for (int k = 0; k < n; ++k) recon += u(k) * raw[k];
      const double scale = std::max(1.0, com.norm());
      if ((com - recon).norm() > 1e-10 * scale) {
        throw NumericalError("raw basis does not close under the bracket");
      }
      for (int k = 0; k < n; ++k) {
        adraw[i](k, j) = u(k);
        adraw[j](k, i) = -u(k);
      }
    }
  }
  return adraw;
}

Eigen::MatrixXd killing_matrix(const std::vector<Eigen::MatrixXd>& adraw) {
  const int n = static_cast<int>(adraw.size());
  Eigen::MatrixXd b(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      b(i, j) = b(j, i) = (adraw[i] * adraw[j]).trace();
    }
  }
  return b;
}

// Modified Gram-Schmidt in the fixed raw order against the inner product
// <x, y> = -x^T B y, with one re-orthogonalization pass. Rows of T are the
// coordinates of the orthonormal basis in the raw basis.
Eigen::MatrixXd gram_schmidt_rows(const Eigen::MatrixXd& minus_b) {
  const Eigen::Index n = minus_b.rows();
  Eigen::MatrixXd t = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    Eigen::VectorXd v = t.row(a);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index b = 0; b < a; ++b) {
        const Eigen::VectorXd w = t.row(b);
        v -= (w.dot(minus_b * v)) * w;
      }
    }
    const double norm2 = v.dot(minus_b * v);
    if (!(norm2 > 0.0)) {
      throw NumericalError(
          "minus the Killing form is not positive definite; the input is not "
          "a compact basis");
    }
    t.row(a) = v / std::sqrt(norm2);
  }
  return t;
}

ToleranceReport measure(const std::vector<Eigen::MatrixXd>& ads) {
  const int n = static_cast<int>(ads.size());
  ToleranceReport rep;
  for (int i = 0; i < n; ++i) {
    rep.total_antisymmetry = std::max(
        rep.total_antisymmetry,
        (ads[i] + ads[i].transpose()).cwiseAbs().maxCoeff());
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        rep.total_antisymmetry = std::max(
            rep.total_antisymmetry, std::abs(ads[i](k, j) + ads[j](k, i)));
      }
    }
  }
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      const double g = ads[a].cwiseProduct(ads[b]).sum();
      rep.orthonormality =
          std::max(rep.orthonormality, std::abs(g - (a == b ? 1.0 : 0.0)));
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Eigen::MatrixXd resid = ads[i] * ads[j] - ads[j] * ads[i];
      for (int k = 0; k < n; ++k) resid -= ads[i](k, j) * ads[k];
      rep.jacobi = std::max(rep.jacobi, resid.cwiseAbs().maxCoeff());
    }
  }
  return rep;
}

void enforce(const ToleranceReport& rep, const BuildOptions& opts) {
  if (!opts.enforce_invariants) return;
  if (rep.jacobi > opts.jacobi_tol) {
    throw NumericalError("Jacobi residual " + std::to_string(rep.jacobi) +
                         " exceeds tolerance");
  }
  if (rep.orthonormality > opts.orthonormality_tol) {
    throw NumericalError("orthonormality residual " +
                         std::to_string(rep.orthonormality) +
                         " exceeds tolerance");
  }
  if (rep.total_antisymmetry > opts.antisymmetry_tol) {
    throw NumericalError("antisymmetry residual " +
                         std::to_string(rep.total_antisymmetry) +
                         " exceeds tolerance");
  }
}

LieAlgebra finish(Family family, int l, std::vector<Eigen::MatrixXd> ads,
                  std::vector<Eigen::MatrixXcd> raw, const BuildOptions& opts) {
  const ToleranceReport rep = measure(ads);
  enforce(rep, opts);
  return LieAlgebra(LieAlgebra::Private{}, family, l, std::move(ads),
                    std::move(raw), rep);
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::su:
      return "su";
    case Family::so:
      return "so";
    case Family::sp:
      return "sp";
    case Family::g2:
      return "g2";
  }
  return "?";
}

std::string AlgebraId::name() const {
  if (family == Family::g2) return "g2";
  return family_name(family) + std::to_string(l);
}

std::optional<AlgebraId> parse_algebra_name(std::string_view name) {
  std::string s;
  for (char ch : name) {
    if (ch == '(' || ch == ')' || ch == ' ') continue;
    s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  if (s == "g2") return AlgebraId{Family::g2, 2};
  Family family;
  if (s.rfind("su", 0) == 0) {
    family = Family::su;
  } else if (s.rfind("so", 0) == 0) {
    family = Family::so;
  } else if (s.rfind("sp", 0) == 0) {
    family = Family::sp;
  } else {
    return std::nullopt;
  }
  const std::string digits = s.substr(2);
  if (digits.empty()) return std::nullopt;
  int l = 0;
  for (char ch : digits) {
    if (!std::isdigit(static_cast<unsigned char>(ch))) return std::nullopt;
    l = 10 * l + (ch - '0');
    if (l > 1000) return std::nullopt;
  }
  return AlgebraId{family, l};
}

Eigen::VectorXd LieAlgebra::coordinates_of(const Eigen::MatrixXcd& raw) const {
  if (!has_raw_basis()) {
    throw InputError("algebra has no defining-representation basis");
  }
  const int n = dim();
  Eigen::MatrixXd gram(n, n);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      gram(i, j) = gram(j, i) = frob_inner(raw_basis_[i], raw_basis_[j]);
    }
    rhs(i) = frob_inner(raw, raw_basis_[i]);
  }
  return Eigen::LDLT<Eigen::MatrixXd>(gram).solve(rhs);
}

LieAlgebra build_algebra(Family family, int l, const BuildOptions& opts) {
  switch (family) {
    case Family::su:
      if (l < 2) throw UnsupportedAlgebraError("su(l) requires l >= 2");
      break;
    case Family::so:
      if (l < 3 || l == 4) {
        throw UnsupportedAlgebraError(
            "so(l) requires l >= 3, l != 4 (so(4) is not simple)");
      }
      break;
    case Family::sp:
      if (l < 1) throw UnsupportedAlgebraError("sp(l) requires l >= 1");
      break;
    case Family::g2:
      l = 2;
      break;
  }
  const int n = expected_dim(family, l);
  if (n > opts.dim_cap) {
    throw UnsupportedAlgebraError(
        "algebra dimension " + std::to_string(n) + " exceeds cap " +
        std::to_string(opts.dim_cap));
  }

  std::vector<Eigen::MatrixXcd> raw;
  switch (family) {
    case Family::su:
      raw = raw_basis_su(l);
      break;
    case Family::so:
      raw = raw_basis_so(l);
      break;
    case Family::sp:
      raw = raw_basis_sp(l);
      break;
    case Family::g2:
      raw = raw_basis_g2();
      break;
  }
  if (static_cast<int>(raw.size()) != n) {
    throw NumericalError("raw basis has unexpected size");
  }

  const std::vector<Eigen::MatrixXd> adraw = raw_structure_tensor(raw);
  const Eigen::MatrixXd minus_b = -killing_matrix(adraw);
  const Eigen::MatrixXd t = gram_schmidt_rows(minus_b);
  const Eigen::MatrixXd tinv = t.inverse();

  // c'_{abc} = sum_{ijk} T_{ai} T_{bj} c_{ijk} (T^{-1})_{kc}, i.e.
  // ad'_a = T^{-T} (sum_i T_{ai} ad_i) T^T.
  std::vector<Eigen::MatrixXd> ads(n, Eigen::MatrixXd::Zero(n, n));
  for (int a = 0; a < n; ++a) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      if (t(a, i) != 0.0) m += t(a, i) * adraw[i];
    }
    ads[a] = tinv.transpose() * m * t.transpose();
  }

  std::vector<Eigen::MatrixXcd> raw_ortho(n);
  for (int a = 0; a < n; ++a) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(raw[0].rows(), raw[0].cols());
    for (int i = 0; i < n; ++i) {
      if (t(a, i) != 0.0) m += t(a, i) * raw[i];
    }
    raw_ortho[a] = m;
  }

  return finish(family, l, std::move(ads), std::move(raw_ortho), opts);
}

LieAlgebra build_algebra(const AlgebraId& id, const BuildOptions& opts) {
  return build_algebra(id.family, id.l, opts);
}

LieAlgebra build_algebra(std::string_view name, const BuildOptions& opts) {
  const std::optional<AlgebraId> id = parse_algebra_name(name);
  if (!id) throw InputError("unknown algebra name: " + std::string(name));
  return build_algebra(*id, opts);
}

LieAlgebra rotate_basis(const LieAlgebra& g, const Eigen::MatrixXd& Q,
                        const BuildOptions& opts) {
  const int n = g.dim();
  if (Q.rows() != n || Q.cols() != n) {
    throw InputError("rotation matrix has wrong size");
  }
  if ((Q.transpose() * Q - Eigen::MatrixXd::Identity(n, n)).norm() > 1e-10) {
    throw InputError("rotation matrix is not orthogonal");
  }

  std::vector<Eigen::MatrixXd> ads(n);
  for (int a = 0; a < n; ++a) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) m += Q(i, a) * g.ad_basis(i);
    ads[a] = Q.transpose() * m * Q;
  }

  std::vector<Eigen::MatrixXcd> raw;
  if (g.has_raw_basis()) {
    raw.resize(n);
    for (int a = 0; a < n; ++a) {
      Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(g.raw_basis()[0].rows(),
                                                  g.raw_basis()[0].cols());
      for (int i = 0; i < n; ++i) m += Q(i, a) * g.raw_basis()[i];
      raw[a] = m;
    }
  }
  return finish(g.family(), g.rank_param(), std::move(ads), std::move(raw),
                opts);
}

ToleranceReport measure_tolerances(const LieAlgebra& g) {
  std::vector<Eigen::MatrixXd> ads;
  ads.reserve(g.dim());
  for (int i = 0; i < g.dim(); ++i) ads.push_back(g.ad_basis(i));
  return measure(ads);
}

double casimir_residual(const LieAlgebra& g) {
  const int n = g.dim();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i) sum += g.ad_basis(i) * g.ad_basis(i);
  return sum.cwiseAbs().maxCoeff();
}

Eigen::VectorXd bracket(const LieAlgebra& g, const Eigen::VectorXd& X,
                        const Eigen::VectorXd& Y) {
  return ad(g, X) * Y;
}

Eigen::MatrixXd ad(const LieAlgebra& g, const Eigen::VectorXd& X) {
  const int n = g.dim();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (X(i) != 0.0) m += X(i) * g.ad_basis(i);
  }
  return m;
}

Eigen::MatrixXcd ad(const LieAlgebra& g, const Eigen::VectorXcd& X) {
  const int n = g.dim();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (X(i) != 0.0) m += X(i) * g.ad_basis(i);
  }
  return m;
}

double killing(const LieAlgebra& g, const Eigen::VectorXd& X,
               const Eigen::VectorXd& Y) {
  return (ad(g, X) * ad(g, Y)).trace();
}

Eigen::MatrixXd wedge(const Eigen::VectorXd& X, const Eigen::VectorXd& Y) {
  return Y * X.transpose() - X * Y.transpose();
}

Eigen::VectorXd coboundary(const LieAlgebra& g, const Eigen::MatrixXd& A) {
  const int n = g.dim();
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  // -1/2 sum_i [A e_i, e_i] = 1/2 sum_i ad(e_i) (A e_i).
  for (int i = 0; i < n; ++i) d += g.ad_basis(i) * A.col(i);
  return 0.5 * d;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> project_ad(const LieAlgebra& g,
                                                       const Eigen::MatrixXd& A) {
  const int n = g.dim();
  Eigen::MatrixXd proj = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    proj += A.cwiseProduct(g.ad_basis(i)).sum() * g.ad_basis(i);
  }
  return {proj, A - proj};
}

nlohmann::json to_json(const LieAlgebra& g) {
  const int n = g.dim();
  std::vector<double> c(static_cast<std::size_t>(n) * n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        c[(static_cast<std::size_t>(i) * n + j) * n + k] = g.c(i, j, k);
      }
    }
  }
  const ToleranceReport& rep = g.tolerance_report();
  return nlohmann::json{
      {"schema_version", 1},
      {"kind", "lie-algebra"},
      {"family", family_name(g.family())},
      {"l", g.rank_param()},
      {"n", n},
      {"c", c},
      {"tolerance_report",
       {{"jacobi", rep.jacobi},
        {"orthonormality", rep.orthonormality},
        {"total_antisymmetry", rep.total_antisymmetry}}},
  };
}

LieAlgebra algebra_from_json(const nlohmann::json& j, const BuildOptions& opts) {
  if (!j.is_object() || !j.contains("n") || !j.contains("c") ||
      !j.contains("family") || !j.contains("l")) {
    throw InputError("algebra document missing required fields");
  }
  if (j.value("kind", "lie-algebra") != "lie-algebra") {
    throw InputError("document kind is not lie-algebra");
  }
  const int n = j.at("n").get<int>();
  if (n < 1 || n > 4096) throw InputError("algebra dimension out of range");
  const auto& c = j.at("c");
  if (!c.is_array() ||
      c.size() != static_cast<std::size_t>(n) * n * n) {
    throw InputError("structure tensor has wrong length");
  }
  const std::string fam = j.at("family").get<std::string>();
  Family family;
  if (fam == "su") {
    family = Family::su;
  } else if (fam == "so") {
    family = Family::so;
  } else if (fam == "sp") {
    family = Family::sp;
  } else if (fam == "g2") {
    family = Family::g2;
  } else {
    throw InputError("unknown family in algebra document: " + fam);
  }
  const AlgebraId id{family, j.at("l").get<int>()};

  std::vector<Eigen::MatrixXd> ads(n, Eigen::MatrixXd::Zero(n, n));
  for (int i = 0; i < n; ++i) {
    for (int jj = 0; jj < n; ++jj) {
      for (int k = 0; k < n; ++k) {
        ads[i](k, jj) =
            c[(static_cast<std::size_t>(i) * n + jj) * n + k].get<double>();
      }
    }
  }
  return finish(id.family, id.l, std::move(ads), {}, opts);
}

}  // namespace liecurv
