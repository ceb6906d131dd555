#include "liecurv/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "liecurv/random.hpp"

namespace liecurv {

namespace {

// Copy of the params with an empty twist matrix replaced by zeros, after
// validation. Every public entry point funnels through here once.
MetricParams checked(const MetricParams& p) {
  validate_params(p);
  MetricParams q = p;
  if (q.D.size() == 0) q.D = Eigen::MatrixXd::Zero(q.n - 1, q.n - 1);
  return q;
}

MetricJet jet_unchecked(const MetricParams& q, const Eigen::VectorXd& point) {
  const int n = q.n;
  if (point.size() != n) {
    throw InputError("point has dimension " + std::to_string(point.size()) +
                     ", metric needs " + std::to_string(n));
  }
  const ProfileJet fj = profile_jet(q, point(0), point(1));
  if (std::abs(fj.f) < q.f_floor) {
    std::ostringstream msg;
    msg << "point outside the metric domain: |f| = " << std::abs(fj.f)
        << " is below the floor " << q.f_floor;
    throw NumericalError(msg.str());
  }

  const Eigen::VectorXd xs = point.tail(n - 1);
  const Eigen::VectorXd u = q.D * xs;
  const Eigen::VectorXd du = q.D * u;
  const double s2 = q.conformal_scale * q.conformal_scale;

  MetricJet jet;
  jet.fj = fj;

  jet.g = Eigen::MatrixXd::Identity(n, n);
  jet.g(0, 0) = fj.f * fj.f + u.squaredNorm();
  for (int i = 1; i < n; ++i) jet.g(0, i) = jet.g(i, 0) = u(i - 1);

  // Closed-form inverse of the unscaled block form; exact up to roundoff.
  const double inv_f2 = 1.0 / (fj.f * fj.f);
  Eigen::MatrixXd gi = Eigen::MatrixXd::Identity(n, n);
  gi(0, 0) = inv_f2;
  for (int i = 1; i < n; ++i) {
    gi(0, i) = gi(i, 0) = -u(i - 1) * inv_f2;
    for (int j = 1; j < n; ++j) gi(i, j) += u(i - 1) * u(j - 1) * inv_f2;
  }

  jet.dg.assign(n, Eigen::MatrixXd::Zero(n, n));
  jet.dg[0](0, 0) = 2.0 * fj.f * fj.fw;
  for (int k = 1; k < n; ++k) {
    jet.dg[k](0, 0) = -2.0 * du(k - 1) + (k == 1 ? 2.0 * fj.f * fj.fx : 0.0);
    for (int i = 1; i < n; ++i) {
      jet.dg[k](0, i) = jet.dg[k](i, 0) = q.D(i - 1, k - 1);
    }
  }

  // Second partials live entirely in g_00: the twist contributes D^T D and
  // the profile contributes only through w and x_1.
  jet.d2g.assign(n, std::vector<Eigen::MatrixXd>(n, Eigen::MatrixXd::Zero(n, n)));
  jet.d2g[0][0](0, 0) = 2.0 * (fj.fw * fj.fw + fj.f * fj.fww);
  jet.d2g[0][1](0, 0) = jet.d2g[1][0](0, 0) =
      2.0 * (fj.fw * fj.fx + fj.f * fj.fwx);
  const Eigen::MatrixXd dtd = q.D.transpose() * q.D;
  for (int k = 1; k < n; ++k) {
    for (int l = 1; l < n; ++l) {
      jet.d2g[k][l](0, 0) =
          2.0 * dtd(k - 1, l - 1) +
          (k == 1 && l == 1 ? 2.0 * (fj.fx * fj.fx + fj.f * fj.fxx) : 0.0);
    }
  }

  jet.g *= s2;
  jet.ginv = gi / s2;
  for (int c = 0; c < n; ++c) {
    jet.dg[c] *= s2;
    for (int d = 0; d < n; ++d) jet.d2g[c][d] *= s2;
  }
  return jet;
}

std::vector<Eigen::MatrixXd> christoffels_from_jet(const MetricJet& jet) {
  const int n = static_cast<int>(jet.g.rows());
  std::vector<Eigen::MatrixXd> gamma(n, Eigen::MatrixXd::Zero(n, n));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = b; c < n; ++c) {
        double s = 0.0;
        for (int d = 0; d < n; ++d) {
          s += jet.ginv(a, d) *
               (jet.dg[b](d, c) + jet.dg[c](d, b) - jet.dg[d](b, c));
        }
        gamma[a](b, c) = 0.5 * s;
        gamma[a](c, b) = gamma[a](b, c);
      }
    }
  }
  return gamma;
}

Tensor4 riemann_from_jet(const MetricJet& jet,
                         const std::vector<Eigen::MatrixXd>& gamma) {
  const int n = static_cast<int>(jet.g.rows());

  std::vector<Eigen::MatrixXd> dginv(n);
  for (int c = 0; c < n; ++c) dginv[c] = -jet.ginv * jet.dg[c] * jet.ginv;

  // dgamma[c][a](d, b) = partial_c Gamma^a_{db}
  std::vector<std::vector<Eigen::MatrixXd>> dgamma(
      n, std::vector<Eigen::MatrixXd>(n, Eigen::MatrixXd::Zero(n, n)));
  for (int c = 0; c < n; ++c) {
    for (int a = 0; a < n; ++a) {
      for (int d = 0; d < n; ++d) {
        for (int b = d; b < n; ++b) {
          double s = 0.0;
          for (int e = 0; e < n; ++e) {
            s += dginv[c](a, e) *
                     (jet.dg[d](e, b) + jet.dg[b](e, d) - jet.dg[e](d, b)) +
                 jet.ginv(a, e) * (jet.d2g[c][d](e, b) + jet.d2g[c][b](e, d) -
                                   jet.d2g[c][e](d, b));
          }
          dgamma[c][a](d, b) = 0.5 * s;
          dgamma[c][a](b, d) = dgamma[c][a](d, b);
        }
      }
    }
  }

  // R(d_c, d_d) d_b = Rup(a, b, c, d) d_a
  Tensor4 rup(n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) {
        for (int d = c + 1; d < n; ++d) {
          double s = dgamma[c][a](d, b) - dgamma[d][a](c, b);
          for (int e = 0; e < n; ++e) {
            s += gamma[a](c, e) * gamma[e](d, b) -
                 gamma[a](d, e) * gamma[e](c, b);
          }
          rup(a, b, c, d) = s;
          rup(a, b, d, c) = -s;
        }
      }
    }
  }

  // Fully covariant components, plane first: R(h,i,j,k) = <R(d_h,d_i)d_j, d_k>.
  Tensor4 r(n);
  for (int h = 0; h < n; ++h) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          double s = 0.0;
          for (int a = 0; a < n; ++a) s += jet.g(k, a) * rup(a, j, h, i);
          r(h, i, j, k) = s;
        }
      }
    }
  }
  return r;
}

// Pull all four slots of a covariant tensor back along the frame columns.
Tensor4 to_frame(const Tensor4& t, const Eigen::MatrixXd& e) {
  const int n = t.dim();
  Tensor4 cur = t;
  for (int slot = 0; slot < 4; ++slot) {
    Tensor4 next(n);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        for (int c = 0; c < n; ++c) {
          for (int d = 0; d < n; ++d) {
            double s = 0.0;
            switch (slot) {
              case 0:
                for (int p = 0; p < n; ++p) s += e(p, a) * cur(p, b, c, d);
                break;
              case 1:
                for (int p = 0; p < n; ++p) s += e(p, b) * cur(a, p, c, d);
                break;
              case 2:
                for (int p = 0; p < n; ++p) s += e(p, c) * cur(a, b, p, d);
                break;
              default:
                for (int p = 0; p < n; ++p) s += e(p, d) * cur(a, b, c, p);
                break;
            }
            next(a, b, c, d) = s;
          }
        }
      }
    }
    cur = next;
  }
  return cur;
}

CurvatureData curvature_from_jet(const MetricParams& q,
                                 const Eigen::VectorXd& point,
                                 const MetricJet& jet) {
  const int n = q.n;
  CurvatureData c;
  c.point = point;
  c.metric = jet.g;
  c.christoffel = christoffels_from_jet(jet);
  c.frame = orthonormal_frame(jet);
  c.riemann = to_frame(riemann_from_jet(jet, c.christoffel), c.frame);

  c.ricci = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int h = 0; h < n; ++h) s += c.riemann(h, i, h, j);
      c.ricci(i, j) = s;
    }
  }
  c.scal = c.ricci.trace();
  c.rho = c.ricci / (n - 2) -
          (c.scal / (2.0 * (n - 1) * (n - 2))) *
              Eigen::MatrixXd::Identity(n, n);

  // W = R - (rho X) ^ Y - X ^ (rho Y) in frame components.
  c.weyl = Tensor4(n);
  for (int h = 0; h < n; ++h) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          const double wedge = c.rho(h, j) * (i == k ? 1.0 : 0.0) -
                               (i == j ? 1.0 : 0.0) * c.rho(h, k) +
                               (h == j ? 1.0 : 0.0) * c.rho(i, k) -
                               c.rho(i, j) * (h == k ? 1.0 : 0.0);
          c.weyl(h, i, j, k) = c.riemann(h, i, j, k) - wedge;
        }
      }
    }
  }
  return c;
}

Eigen::VectorXd sorted_by_magnitude(const Eigen::VectorXd& v) {
  Eigen::VectorXd out = v;
  std::sort(out.begin(), out.end(), [](double a, double b) {
    const double ma = std::abs(a), mb = std::abs(b);
    if (ma != mb) return ma > mb;
    return a < b;
  });
  return out;
}

}  // namespace

MetricParams default_metric_params(int n) {
  MetricParams p;
  p.n = n;
  if (n >= 2) p.D = Eigen::MatrixXd::Zero(n - 1, n - 1);
  return p;
}

double curvature_model_constant(const MetricParams& p) {
  return -p.epsilon * p.lambda * p.lambda /
         (p.conformal_scale * p.conformal_scale);
}

void validate_params(const MetricParams& p) {
  if (p.n < 4) throw InputError("metric dimension must be at least 4");
  if (!(p.lambda > 0.0) || !std::isfinite(p.lambda)) {
    throw InputError("profile rate lambda must be positive");
  }
  if (p.epsilon != 1 && p.epsilon != -1) {
    throw InputError("epsilon must be +1 or -1");
  }
  if (!(p.conformal_scale > 0.0) || !std::isfinite(p.conformal_scale)) {
    throw InputError("conformal scale must be positive");
  }
  if (!(p.f_floor > 0.0)) throw InputError("profile floor must be positive");
  if (p.D.size() != 0) {
    if (p.D.rows() != p.n - 1 || p.D.cols() != p.n - 1) {
      throw InputError("twist matrix must be (n-1) x (n-1)");
    }
    const double skew_defect = (p.D + p.D.transpose()).cwiseAbs().maxCoeff();
    if (skew_defect > 1e-12 * std::max(1.0, p.D.cwiseAbs().maxCoeff())) {
      throw InputError("twist matrix must be skew-symmetric");
    }
  }
}

ProfileJet profile_jet(const MetricParams& p, double w, double x1) {
  double a = 1.0, da = 0.0, d2a = 0.0;
  double b = 1.0, db = 0.0, d2b = 0.0;
  if (p.family == AbFamily::sin_offset) {
    b = 2.0 + std::sin(w);
    db = std::cos(w);
    d2b = -std::sin(w);
  }
  const double la = p.lambda;
  ProfileJet j;
  if (p.epsilon > 0) {
    const double ep = std::exp(la * x1);
    const double em = std::exp(-la * x1);
    j.f = a * ep + b * em;
    j.fx = la * (a * ep - b * em);
    j.fw = da * ep + db * em;
    j.fwx = la * (da * ep - db * em);
    j.fww = d2a * ep + d2b * em;
  } else {
    const double cs = std::cos(la * x1);
    const double sn = std::sin(la * x1);
    j.f = a * cs + b * sn;
    j.fx = la * (-a * sn + b * cs);
    j.fw = da * cs + db * sn;
    j.fwx = la * (-da * sn + db * cs);
    j.fww = d2a * cs + d2b * sn;
  }
  j.fxx = p.epsilon * la * la * j.f;
  return j;
}

Eigen::MatrixXd metric_at(const MetricParams& p, const Eigen::VectorXd& point) {
  return jet_unchecked(checked(p), point).g;
}

MetricJet metric_jet(const MetricParams& p, const Eigen::VectorXd& point) {
  return jet_unchecked(checked(p), point);
}

std::vector<Eigen::MatrixXd> christoffels_at(const MetricParams& p,
                                             const Eigen::VectorXd& point) {
  return christoffels_from_jet(jet_unchecked(checked(p), point));
}

Tensor4 coordinate_riemann(const MetricParams& p,
                           const Eigen::VectorXd& point) {
  const MetricJet jet = jet_unchecked(checked(p), point);
  return riemann_from_jet(jet, christoffels_from_jet(jet));
}

Eigen::MatrixXd orthonormal_frame(const MetricJet& jet) {
  const int n = static_cast<int>(jet.g.rows());
  Eigen::MatrixXd frame(n, n);
  std::vector<Eigen::VectorXd> done;
  // Spatial directions first, d_w last; the d_w image lands in column 0.
  for (int t = 0; t < n; ++t) {
    const int coord = (t + 1) % n;
    Eigen::VectorXd v = Eigen::VectorXd::Unit(n, coord);
    for (const Eigen::VectorXd& e : done) v -= e * e.dot(jet.g * v);
    v /= std::sqrt(v.dot(jet.g * v));
    frame.col(coord == 0 ? 0 : coord) = v;
    done.push_back(v);
  }
  return frame;
}

CurvatureData curvature_at(const MetricParams& p,
                           const Eigen::VectorXd& point) {
  const MetricParams q = checked(p);
  return curvature_from_jet(q, point, jet_unchecked(q, point));
}

Eigen::MatrixXd curvature_operator(const Tensor4& frame_tensor) {
  const int n = frame_tensor.dim();
  const int pairs = n * (n - 1) / 2;
  Eigen::MatrixXd m(pairs, pairs);
  int row = 0;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b, ++row) {
      int col = 0;
      for (int c = 0; c < n; ++c) {
        for (int d = c + 1; d < n; ++d, ++col) {
          m(row, col) = frame_tensor(a, b, d, c);
        }
      }
    }
  }
  return m;
}

Eigen::VectorXd curvature_spectrum(const MetricParams& p,
                                   const Eigen::VectorXd& point) {
  const CurvatureData c = curvature_at(p, point);
  const Eigen::MatrixXd m = curvature_operator(c.riemann);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (m + m.transpose()));
  return sorted_by_magnitude(es.eigenvalues());
}

double weyl_homogeneity_certificate(
    const MetricParams& p, const std::vector<Eigen::VectorXd>& points) {
  const MetricParams q = checked(p);
  if (points.size() < 2) {
    throw InputError("the homogeneity certificate needs at least two points");
  }
  std::vector<Eigen::VectorXd> profiles;
  profiles.reserve(points.size());
  for (const Eigen::VectorXd& pt : points) {
    const CurvatureData c = curvature_from_jet(q, pt, jet_unchecked(q, pt));
    const Eigen::MatrixXd w = curvature_operator(c.weyl);
    const double wnorm = w.norm();
    const double rnorm = curvature_operator(c.riemann).norm();
    if (wnorm <= 1e-12 * std::max(1.0, rnorm)) {
      throw NumericalError(
          "Weyl tensor vanishes at a sample point; certificate undefined");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        0.5 * (w + w.transpose()));
    Eigen::VectorXd sv = es.eigenvalues().cwiseAbs() / wnorm;
    std::sort(sv.begin(), sv.end(), std::greater<double>());
    profiles.push_back(std::move(sv));
  }
  double dev = 0.0;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    for (std::size_t j = i + 1; j < profiles.size(); ++j) {
      dev = std::max(dev,
                     (profiles[i] - profiles[j]).lpNorm<Eigen::Infinity>());
    }
  }
  return dev;
}

ObstructionSample nabla_R_obstruction(const MetricParams& p,
                                      const Eigen::VectorXd& point, int i) {
  const MetricParams q = checked(p);
  if (i < 2 || i >= q.n) {
    throw InputError("obstruction index must lie in {2, ..., n-1}");
  }

  // Fourth-order central difference of the curvature component in w; the
  // truncation error ~ h^4 sits far below the 1e-4 comparison tolerance.
  const double h = 1e-3;
  const auto component = [&](double dw) {
    Eigen::VectorXd pt = point;
    pt(0) += dw;
    const MetricJet jet = jet_unchecked(q, pt);
    return riemann_from_jet(jet, christoffels_from_jet(jet))(0, 1, 0, i);
  };
  const double dr = (component(-2.0 * h) - 8.0 * component(-h) +
                     8.0 * component(h) - component(2.0 * h)) /
                    (12.0 * h);

  const MetricJet jet = jet_unchecked(q, point);
  const std::vector<Eigen::MatrixXd> gamma = christoffels_from_jet(jet);
  const Tensor4 r = riemann_from_jet(jet, gamma);
  double lhs = dr;
  for (int m = 0; m < q.n; ++m) {
    lhs -= gamma[m](0, 0) * r(m, 1, 0, i) + gamma[m](0, 1) * r(0, m, 0, i) +
           gamma[m](0, 0) * r(0, 1, m, i) + gamma[m](0, i) * r(0, 1, 0, m);
  }

  const double s2 = q.conformal_scale * q.conformal_scale;
  const double kappa0 = -q.epsilon * q.lambda * q.lambda;
  ObstructionSample out;
  out.lhs = lhs;
  out.rhs = s2 * kappa0 * jet.fj.f * jet.fj.f * q.D(0, i - 1);
  return out;
}

std::vector<Eigen::VectorXd> sample_domain_points(const MetricParams& p,
                                                  int count,
                                                  std::uint64_t seed,
                                                  double box,
                                                  int* rejected_out) {
  const MetricParams q = checked(p);
  if (count < 0) throw InputError("sample count must be nonnegative");
  if (!(box > 0.0)) throw InputError("sample box must be positive");
  auto rng = seeded_engine(seed);
  std::uniform_real_distribution<double> unif(-box, box);
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(static_cast<std::size_t>(count));
  int rejected = 0;
  long guard = 0;
  while (static_cast<int>(pts.size()) < count) {
    if (++guard > 10000L * std::max(count, 1)) {
      throw NumericalError(
          "domain sampling kept hitting the profile floor; shrink the box");
    }
    Eigen::VectorXd pt(q.n);
    for (int j = 0; j < q.n; ++j) pt(j) = unif(rng);
    if (std::abs(profile_jet(q, pt(0), pt(1)).f) >= q.f_floor + 0.05) {
      pts.push_back(std::move(pt));
    } else {
      ++rejected;
    }
  }
  if (rejected_out != nullptr) *rejected_out = rejected;
  return pts;
}

}  // namespace liecurv
