#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "liecurv/errors.hpp"
#include "liecurv/geometry.hpp"
#include "liecurv/random.hpp"

using namespace liecurv;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Default family member used throughout: n = 5, lambda = 1, epsilon = +1,
// a = b = 1, and the single twist entry D_12 = 1.
MetricParams twisted_params() {
  MetricParams p = default_metric_params(5);
  p.D(0, 1) = 1.0;
  p.D(1, 0) = -1.0;
  return p;
}

// Fourth-order central difference of a matrix-valued map.
template <typename F>
MatrixXd central_diff(const F& fn, const VectorXd& pt, int coord, double h) {
  VectorXd e = VectorXd::Zero(pt.size());
  e(coord) = 1.0;
  return (fn(pt - 2 * h * e) - 8 * fn(pt - h * e) + 8 * fn(pt + h * e) -
          fn(pt + 2 * h * e)) /
         (12 * h);
}

// Christoffels recomputed from finite differences of the metric alone.
std::vector<MatrixXd> fd_christoffels(const MetricParams& p,
                                      const VectorXd& pt, double h) {
  const int n = p.n;
  const auto metric = [&](const VectorXd& x) { return metric_at(p, x); };
  std::vector<MatrixXd> dg(n);
  for (int c = 0; c < n; ++c) dg[c] = central_diff(metric, pt, c, h);
  const MatrixXd gi = metric_at(p, pt).inverse();
  std::vector<MatrixXd> gamma(n, MatrixXd::Zero(n, n));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) {
        double s = 0.0;
        for (int d = 0; d < n; ++d) {
          s += gi(a, d) * (dg[b](d, c) + dg[c](d, b) - dg[d](b, c));
        }
        gamma[a](b, c) = 0.5 * s;
      }
    }
  }
  return gamma;
}

// Covariant curvature recomputed from finite differences of the analytic
// Christoffels plus the quadratic terms.
Tensor4 fd_riemann(const MetricParams& p, const VectorXd& pt, double h) {
  const int n = p.n;
  std::vector<std::vector<MatrixXd>> dgam(n);
  for (int c = 0; c < n; ++c) {
    VectorXd e = VectorXd::Zero(n);
    e(c) = 1.0;
    const auto gm2 = christoffels_at(p, pt - 2 * h * e);
    const auto gm1 = christoffels_at(p, pt - h * e);
    const auto gp1 = christoffels_at(p, pt + h * e);
    const auto gp2 = christoffels_at(p, pt + 2 * h * e);
    dgam[c].resize(n);
    for (int a = 0; a < n; ++a) {
      dgam[c][a] = (gm2[a] - 8 * gm1[a] + 8 * gp1[a] - gp2[a]) / (12 * h);
    }
  }
  const auto gamma = christoffels_at(p, pt);
  const MatrixXd g = metric_at(p, pt);
  Tensor4 r(n);
  for (int hh = 0; hh < n; ++hh) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          double low = 0.0;
          for (int a = 0; a < n; ++a) {
            double s = dgam[hh][a](i, j) - dgam[i][a](hh, j);
            for (int e = 0; e < n; ++e) {
              s += gamma[a](hh, e) * gamma[e](i, j) -
                   gamma[a](i, e) * gamma[e](hh, j);
            }
            low += g(k, a) * s;
          }
          r(hh, i, j, k) = low;
        }
      }
    }
  }
  return r;
}

double max_abs_diff(const Tensor4& a, const Tensor4& b) {
  const int n = a.dim();
  double dev = 0.0;
  for (int h = 0; h < n; ++h) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          dev = std::max(dev, std::abs(a(h, i, j, k) - b(h, i, j, k)));
        }
      }
    }
  }
  return dev;
}

}  // namespace

TEST_CASE("parameter validation rejects bad input") {
  CHECK_THROWS_AS(validate_params(default_metric_params(3)), InputError);

  MetricParams p = default_metric_params(5);
  p.lambda = 0.0;
  CHECK_THROWS_AS(validate_params(p), InputError);

  p = default_metric_params(5);
  p.epsilon = 2;
  CHECK_THROWS_AS(validate_params(p), InputError);

  p = default_metric_params(5);
  p.D(0, 1) = 1.0;  // missing the skew partner
  CHECK_THROWS_AS(validate_params(p), InputError);

  p = default_metric_params(5);
  p.D = MatrixXd::Zero(3, 3);
  CHECK_THROWS_AS(validate_params(p), InputError);

  p = default_metric_params(5);
  p.conformal_scale = -1.0;
  CHECK_THROWS_AS(validate_params(p), InputError);

  CHECK_NOTHROW(validate_params(twisted_params()));
  CHECK_THROWS_AS(metric_at(twisted_params(), VectorXd::Zero(4)), InputError);
}

TEST_CASE("metric matches the quadratic form") {
  const MetricParams p = twisted_params();
  const MatrixXd g = metric_at(p, VectorXd::Zero(5));
  // f(0,0) = 2, no twist contribution at the origin.
  CHECK(g(0, 0) == 4.0);
  for (int i = 1; i < 5; ++i) {
    CHECK(g(i, i) == 1.0);
    CHECK(g(0, i) == 0.0);
  }
  CHECK(g == g.transpose());

  // Away from the origin the first row carries the twist u = D x.
  VectorXd pt(5);
  pt << 0.1, 0.3, -0.5, 0.2, 0.7;
  const MatrixXd g2 = metric_at(p, pt);
  CHECK(g2 == g2.transpose());
  const VectorXd u = p.D * pt.tail(4);
  for (int i = 1; i < 5; ++i) CHECK(g2(0, i) == u(i - 1));
  const double f = profile_jet(p, pt(0), pt(1)).f;
  CHECK(g2(0, 0) == doctest::Approx(f * f + u.squaredNorm()).epsilon(1e-15));
}

TEST_CASE("metric determinant equals the squared profile") {
  for (MetricParams p : {twisted_params(), default_metric_params(5)}) {
    for (const AbFamily fam : {AbFamily::constant, AbFamily::sin_offset}) {
      p.family = fam;
      const auto pts = sample_domain_points(p, 25, 91);
      for (const VectorXd& pt : pts) {
        const MatrixXd g = metric_at(p, pt);
        const double f = profile_jet(p, pt(0), pt(1)).f;
        CHECK(g.determinant() ==
              doctest::Approx(f * f).epsilon(1e-11));
        // Positive definite as well.
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(g);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
      }
    }
  }
}

TEST_CASE("points below the profile floor are rejected") {
  MetricParams p = default_metric_params(5);
  p.epsilon = -1;  // f = cos(x1) + sin(x1) vanishes at x1 = -pi/4
  VectorXd bad = VectorXd::Zero(5);
  bad(1) = -std::acos(-1.0) / 4.0;
  CHECK_THROWS_AS(metric_at(p, bad), NumericalError);

  VectorXd good = VectorXd::Zero(5);
  CHECK_NOTHROW(metric_at(p, good));
}

TEST_CASE("frame is orthonormal with the w direction first") {
  MetricParams p = twisted_params();
  p.family = AbFamily::sin_offset;
  p.conformal_scale = 2.0;
  for (const VectorXd& pt : sample_domain_points(p, 10, 5)) {
    const MetricJet jet = metric_jet(p, pt);
    const MatrixXd e = orthonormal_frame(jet);
    const MatrixXd gram = e.transpose() * jet.g * e;
    CHECK((gram - MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-12);
    // Spatial frame vectors never pick up a w component.
    for (int i = 1; i < 5; ++i) CHECK(e(0, i) == 0.0);
    // Column 0 is the normalized w direction: positive w component.
    CHECK(e(0, 0) > 0.0);
  }
}

TEST_CASE("christoffels match finite differences of the metric") {
  MetricParams p = twisted_params();
  p.family = AbFamily::sin_offset;
  for (const VectorXd& pt : sample_domain_points(p, 20, 23)) {
    const auto analytic = christoffels_at(p, pt);
    const auto fd = fd_christoffels(p, pt, 1e-4);
    double dev = 0.0;
    for (int a = 0; a < 5; ++a) {
      dev = std::max(dev, (analytic[a] - fd[a]).cwiseAbs().maxCoeff());
    }
    CHECK(dev < 1e-5);
  }
}

TEST_CASE("coordinate curvature matches finite differences") {
  MetricParams p = twisted_params();
  p.family = AbFamily::sin_offset;
  for (const VectorXd& pt : sample_domain_points(p, 12, 29)) {
    const Tensor4 analytic = coordinate_riemann(p, pt);
    const Tensor4 fd = fd_riemann(p, pt, 1e-4);
    CHECK(max_abs_diff(analytic, fd) < 1e-5);
  }

  // Reference point of the default member, checked with a second stencil:
  // Richardson extrapolation of second-order central differences at steps
  // 1e-4 and 0.5e-4 reproduces the analytic metric partials, and the full
  // chain agrees at the same point.
  const MetricParams q = twisted_params();
  const VectorXd origin = VectorXd::Zero(5);
  const MetricJet jet = metric_jet(q, origin);
  const auto metric = [&](const VectorXd& x) { return metric_at(q, x); };
  for (int c = 0; c < 5; ++c) {
    VectorXd e = VectorXd::Zero(5);
    e(c) = 1.0;
    const auto second_order = [&](double h) {
      return MatrixXd((metric(origin + h * e) - metric(origin - h * e)) /
                      (2 * h));
    };
    const MatrixXd dg =
        (4.0 * second_order(0.5e-4) - second_order(1e-4)) / 3.0;
    CHECK((dg - jet.dg[c]).cwiseAbs().maxCoeff() < 1e-7);
  }
  const auto gamma_fd = fd_christoffels(q, origin, 1e-4);
  const auto gamma = christoffels_at(q, origin);
  for (int a = 0; a < 5; ++a) {
    CHECK((gamma_fd[a] - gamma[a]).cwiseAbs().maxCoeff() < 1e-5);
  }
  CHECK(max_abs_diff(coordinate_riemann(q, origin),
                     fd_riemann(q, origin, 1e-4)) < 1e-5);
}

TEST_CASE("curvature data satisfies the tensor identities") {
  MetricParams p = twisted_params();
  for (const AbFamily fam : {AbFamily::constant, AbFamily::sin_offset}) {
    p.family = fam;
    for (const VectorXd& pt : sample_domain_points(p, 6, 37)) {
      const CurvatureData c = curvature_at(p, pt);
      const double rnorm = c.riemann.norm();
      double anti1 = 0, anti2 = 0, pair = 0, bianchi = 0, trace = 0;
      for (int h = 0; h < 5; ++h) {
        for (int i = 0; i < 5; ++i) {
          for (int j = 0; j < 5; ++j) {
            for (int k = 0; k < 5; ++k) {
              anti1 = std::max(anti1, std::abs(c.riemann(h, i, j, k) +
                                               c.riemann(i, h, j, k)));
              anti2 = std::max(anti2, std::abs(c.riemann(h, i, j, k) +
                                               c.riemann(h, i, k, j)));
              pair = std::max(pair, std::abs(c.riemann(h, i, j, k) -
                                             c.riemann(j, k, h, i)));
              bianchi = std::max(
                  bianchi, std::abs(c.riemann(h, i, j, k) +
                                    c.riemann(h, j, k, i) +
                                    c.riemann(h, k, i, j)));
            }
          }
        }
      }
      for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
          double s = 0.0;
          for (int h = 0; h < 5; ++h) s += c.weyl(h, i, j, h);
          trace = std::max(trace, std::abs(s));
        }
      }
      CHECK(anti1 < 1e-12);
      CHECK(anti2 < 1e-12);
      CHECK(pair < 1e-12);
      CHECK(bianchi < 1e-7);
      CHECK(trace < 1e-7 * std::max(1.0, rnorm));
      // rho is symmetric and trace-adjusted from the Ricci operator.
      CHECK((c.rho - c.rho.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("zero twist gives the product model") {
  // epsilon = +1: model factor curvature kappa = -1.
  MetricParams p = default_metric_params(5);
  VectorXd pt(5);
  pt << 0.3, -0.2, 0.1, 0.4, -0.3;
  const CurvatureData c = curvature_at(p, pt);
  CHECK(c.riemann(0, 1, 1, 0) == doctest::Approx(-1.0).epsilon(1e-10));
  double outside = 0.0;
  for (int h = 0; h < 5; ++h) {
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        for (int k = 0; k < 5; ++k) {
          if (h > 1 || i > 1 || j > 1 || k > 1) {
            outside = std::max(outside, std::abs(c.riemann(h, i, j, k)));
          }
        }
      }
    }
  }
  CHECK(outside < 1e-12);
  // Ricci of the model under this sign convention: -kappa on the curved
  // block, zero on the flat one.
  CHECK(c.ricci(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(c.ricci(1, 1) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(c.ricci(2, 2)) < 1e-12);
  CHECK(c.scal == doctest::Approx(2.0).epsilon(1e-10));

  // epsilon = -1 flips the factor curvature to +1.
  MetricParams pm = default_metric_params(5);
  pm.epsilon = -1;
  VectorXd pt2(5);
  pt2 << 0.3, 0.2, 0.1, 0.4, -0.3;
  const CurvatureData c2 = curvature_at(pm, pt2);
  CHECK(c2.riemann(0, 1, 1, 0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(c2.ricci(0, 0) == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(c2.scal == doctest::Approx(-2.0).epsilon(1e-10));
}

TEST_CASE("curvature spectrum is the model spectrum everywhere") {
  const double kappa = curvature_model_constant(twisted_params());
  CHECK(kappa == -1.0);

  MetricParams p = twisted_params();
  std::vector<VectorXd> spectra;
  for (const VectorXd& pt : sample_domain_points(p, 20, 111)) {
    const VectorXd s = curvature_spectrum(p, pt);
    REQUIRE(s.size() == 10);
    CHECK(std::abs(s(0) - kappa) < 1e-6 * std::abs(kappa));
    CHECK(s.tail(9).cwiseAbs().maxCoeff() < 1e-6);
    spectra.push_back(s);
  }
  for (std::size_t i = 1; i < spectra.size(); ++i) {
    CHECK((spectra[i] - spectra[0]).cwiseAbs().maxCoeff() < 1e-6);
  }

  // A denser twist and the w-dependent profile do not move the spectrum.
  MetricParams pd = default_metric_params(5);
  auto rng = seeded_engine(2024);
  pd.D = 0.8 * random_skew(4, rng);
  pd.family = AbFamily::sin_offset;
  for (const VectorXd& pt : sample_domain_points(pd, 10, 13)) {
    const VectorXd s = curvature_spectrum(pd, pt);
    CHECK(std::abs(s(0) + 1.0) < 1e-6);
    CHECK(s.tail(9).cwiseAbs().maxCoeff() < 1e-6);
  }

  // Trigonometric profile: kappa = +lambda^2.
  MetricParams pt3 = twisted_params();
  pt3.epsilon = -1;
  pt3.lambda = 1.3;
  CHECK(curvature_model_constant(pt3) == doctest::Approx(1.69));
  for (const VectorXd& pt : sample_domain_points(pt3, 8, 55)) {
    const VectorXd s = curvature_spectrum(pt3, pt);
    CHECK(std::abs(s(0) - 1.69) < 1e-6);
    CHECK(s.tail(9).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("weyl homogeneity certificate") {
  const MetricParams p = twisted_params();

  // Identical points: deviation is exactly zero.
  const VectorXd origin = VectorXd::Zero(5);
  CHECK(weyl_homogeneity_certificate(p, {origin, origin}) == 0.0);

  CHECK_THROWS_AS(weyl_homogeneity_certificate(p, {origin}), InputError);

  const auto pts = sample_domain_points(p, 20, 77);
  CHECK(weyl_homogeneity_certificate(p, pts) < 1e-6);

  // Weyl homogeneity survives the w-dependent profile.
  MetricParams ps = p;
  ps.family = AbFamily::sin_offset;
  CHECK(weyl_homogeneity_certificate(ps, sample_domain_points(ps, 12, 78)) <
        1e-6);

  // Minimal dimension: the product model is not conformally flat, so the
  // certificate is well defined even with zero twist.
  const MetricParams p4 = default_metric_params(4);
  const auto pts4 = sample_domain_points(p4, 8, 79);
  const CurvatureData c4 = curvature_at(p4, pts4[0]);
  CHECK(curvature_operator(c4.weyl).norm() > 0.5);
  CHECK(weyl_homogeneity_certificate(p4, pts4) < 1e-6);
}

TEST_CASE("constant conformal rescaling is invisible to the certificate") {
  const MetricParams p = twisted_params();
  MetricParams ps = p;
  ps.conformal_scale = 3.0;
  const auto pts = sample_domain_points(p, 8, 17);
  const double c1 = weyl_homogeneity_certificate(p, pts);
  const double c3 = weyl_homogeneity_certificate(ps, pts);
  CHECK(std::abs(c1 - c3) < 1e-10);

  // Frame curvature scales by 1/scale^2, so the leading eigenvalue does too.
  const VectorXd s1 = curvature_spectrum(p, pts[0]);
  const VectorXd s3 = curvature_spectrum(ps, pts[0]);
  CHECK(s3(0) == doctest::Approx(s1(0) / 9.0).epsilon(1e-12));
  CHECK(curvature_model_constant(ps) == doctest::Approx(-1.0 / 9.0));
}

TEST_CASE("obstruction certifies the space is not symmetric") {
  const MetricParams p = twisted_params();
  const VectorXd origin = VectorXd::Zero(5);

  // kappa f^2 D_12 at the origin: (-1) * 4 * 1, exact in floating point.
  const ObstructionSample s = nabla_R_obstruction(p, origin, 2);
  CHECK(s.rhs == -4.0);
  CHECK(std::abs(s.lhs - s.rhs) < 1e-4 * std::abs(s.rhs));

  // Unused twist column: both sides vanish.
  const ObstructionSample s3 = nabla_R_obstruction(p, origin, 3);
  CHECK(std::abs(s3.lhs) < 1e-7);
  CHECK(std::abs(s3.rhs) < 1e-7);

  // Zero twist: the product metric is symmetric.
  const ObstructionSample s0 =
      nabla_R_obstruction(default_metric_params(5), origin, 2);
  CHECK(std::abs(s0.lhs) < 1e-7);
  CHECK(std::abs(s0.rhs) < 1e-7);

  CHECK_THROWS_AS(nabla_R_obstruction(p, origin, 1), InputError);
  CHECK_THROWS_AS(nabla_R_obstruction(p, origin, 5), InputError);

  for (const VectorXd& pt : sample_domain_points(p, 10, 101)) {
    const ObstructionSample sr = nabla_R_obstruction(p, pt, 2);
    CHECK(std::abs(sr.lhs - sr.rhs) <= 1e-4 * std::abs(sr.rhs));
    CHECK(std::abs(sr.lhs) >= 0.5 * std::abs(sr.rhs));
    CHECK(sr.rhs != 0.0);
  }

  // w-dependent profile: f(0,0) = 1 + 2 = 3, so the closed form is -9.
  MetricParams ps = p;
  ps.family = AbFamily::sin_offset;
  const ObstructionSample sw = nabla_R_obstruction(ps, origin, 2);
  CHECK(sw.rhs == -9.0);
  CHECK(std::abs(sw.lhs - sw.rhs) < 1e-4 * std::abs(sw.rhs));
}

TEST_CASE("domain sampler is deterministic and respects the floor") {
  MetricParams p = twisted_params();
  p.epsilon = -1;  // the trigonometric profile actually has a zero set
  const auto a = sample_domain_points(p, 30, 999);
  const auto b = sample_domain_points(p, 30, 999);
  REQUIRE(a.size() == 30);
  REQUIRE(b.size() == 30);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == b[i]);
    const double f = profile_jet(p, a[i](0), a[i](1)).f;
    CHECK(std::abs(f) >= p.f_floor + 0.05);
  }
  const auto c = sample_domain_points(p, 30, 1000);
  CHECK(a[0] != c[0]);
}
