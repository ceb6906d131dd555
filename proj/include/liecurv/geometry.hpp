#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "liecurv/errors.hpp"

namespace liecurv {

// Scale functions a(w), b(w) for the twisted-product metric. Both families
// have closed-form derivatives, so everything downstream of the metric stays
// analytic up to second order.
enum class AbFamily {
  constant,    // a = 1, b = 1
  sin_offset,  // a = 1, b = 2 + sin w   (nonvanishing, w-dependent)
};

// Parameters of the metric family
//
//   ds^2 = (f(x_1, w) dw)^2 + sum_i (dx_i + sum_j D_ij x_j dw)^2
//
// on coordinates (w, x_1, ..., x_{n-1}), where D is a constant skew matrix
// and the profile solves f_xx = epsilon lambda^2 f in x_1:
//
//   f = a(w) e^{lambda x_1} + b(w) e^{-lambda x_1}      (epsilon = +1)
//   f = a(w) cos(lambda x_1) + b(w) sin(lambda x_1)     (epsilon = -1)
//
// Every member is curvature homogeneous with curvature operator spectrum
// {kappa, 0, ..., 0}, kappa = -epsilon lambda^2, yet generically is not
// conformal to any symmetric space.
struct MetricParams {
  int n = 5;              // manifold dimension, at least 4
  double lambda = 1.0;    // profile rate; kappa = -epsilon lambda^2
  int epsilon = +1;       // +1 exponential profile, -1 trigonometric
  Eigen::MatrixXd D;      // (n-1) x (n-1) skew twist; empty means zero
  AbFamily family = AbFamily::constant;
  double conformal_scale = 1.0;  // metric gets multiplied by scale^2
  double f_floor = 0.1;   // |f| below this puts a point outside the domain
};

// Zero-twist parameters of dimension n with the matrix sized correctly.
MetricParams default_metric_params(int n = 5);

// Curvature of the two-dimensional factor of the model space, for the
// scaled metric: -epsilon lambda^2 / conformal_scale^2.
double curvature_model_constant(const MetricParams& p);

// Throws InputError unless n >= 4, lambda > 0, epsilon = +-1, D is skew of
// size (n-1) x (n-1) (or empty), conformal_scale > 0, f_floor > 0.
void validate_params(const MetricParams& p);

// Profile value and partials at (w, x_1). fxx always equals
// epsilon lambda^2 f; it is carried explicitly so callers never rebuild
// family-specific formulas.
struct ProfileJet {
  double f = 0.0;
  double fw = 0.0, fx = 0.0;
  double fww = 0.0, fwx = 0.0, fxx = 0.0;
};
ProfileJet profile_jet(const MetricParams& p, double w, double x1);

// Metric with its analytic coordinate partials at one point. Only g_00 has
// nonvanishing second partials, but the jet is stored densely; n is small.
struct MetricJet {
  Eigen::MatrixXd g;
  Eigen::MatrixXd ginv;
  std::vector<Eigen::MatrixXd> dg;                 // dg[c] = partial_c g
  std::vector<std::vector<Eigen::MatrixXd>> d2g;   // d2g[c][d]
  ProfileJet fj;
};

// Throws NumericalError when |f| at the point is below the domain floor.
Eigen::MatrixXd metric_at(const MetricParams& p, const Eigen::VectorXd& point);
MetricJet metric_jet(const MetricParams& p, const Eigen::VectorXd& point);

// Dense rank-4 tensor with all four indices of range n.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int n)
      : n_(n),
        v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n) * n * n * n)) {}

  int dim() const { return n_; }
  double& operator()(int a, int b, int c, int d) { return v_[idx(a, b, c, d)]; }
  double operator()(int a, int b, int c, int d) const {
    return v_[idx(a, b, c, d)];
  }
  double norm() const { return v_.norm(); }

 private:
  Eigen::Index idx(int a, int b, int c, int d) const {
    return ((static_cast<Eigen::Index>(a) * n_ + b) * n_ + c) * n_ + d;
  }
  int n_ = 0;
  Eigen::VectorXd v_;
};

// christoffel[a](b, c) = Gamma^a_{bc}, from the analytic first partials.
std::vector<Eigen::MatrixXd> christoffels_at(const MetricParams& p,
                                             const Eigen::VectorXd& point);

// Fully covariant coordinate curvature R(d_h, d_i, d_j, d_k) with the
// convention R(X,Y) = nabla_X nabla_Y - nabla_Y nabla_X - nabla_{[X,Y]}
// and R(X,Y,Z,V) = <R(X,Y)Z, V>.
Tensor4 coordinate_riemann(const MetricParams& p, const Eigen::VectorXd& point);

// Orthonormal frame as columns of an n x n matrix of coordinate components.
// Gram-Schmidt runs over (d_1, ..., d_{n-1}, d_w); the normalized
// d_w-direction is then moved to column 0 so frame indices line up with the
// coordinate convention that w comes first.
Eigen::MatrixXd orthonormal_frame(const MetricJet& jet);

// Everything curvature-related at one point. riemann and weyl hold
// orthonormal-frame components; christoffel is coordinate-based.
struct CurvatureData {
  Eigen::VectorXd point;
  Eigen::MatrixXd metric;
  std::vector<Eigen::MatrixXd> christoffel;
  Eigen::MatrixXd frame;
  Tensor4 riemann;
  Eigen::MatrixXd ricci;  // Ric(i,j) = sum_h R(e_h, e_i, e_h, e_j)
  double scal = 0.0;
  Eigen::MatrixXd rho;    // Ric/(n-2) - scal/(2(n-1)(n-2)) id
  Tensor4 weyl;           // R minus the wedge terms built from rho
};
CurvatureData curvature_at(const MetricParams& p, const Eigen::VectorXd& point);

// Symmetric operator on 2-forms induced by a frame curvature tensor: rows
// and columns run over pairs (a<b) lexicographically and entry
// ((ab),(cd)) = T(a,b,d,c), so constant-curvature metrics map to kappa id.
Eigen::MatrixXd curvature_operator(const Tensor4& frame_tensor);

// Eigenvalues of curvature_operator of the frame curvature, sorted by
// decreasing magnitude. Equals {kappa, 0, ..., 0} on the whole family.
Eigen::VectorXd curvature_spectrum(const MetricParams& p,
                                   const Eigen::VectorXd& point);

// Max pairwise l_inf distance between the sorted singular-value profiles of
// W/||W|| (as operators on 2-forms) over the given points. Vanishes exactly
// when the normalized Weyl operator is orthogonally the same everywhere.
// Throws NumericalError if the Weyl tensor vanishes at a sample point.
double weyl_homogeneity_certificate(const MetricParams& p,
                                    const std::vector<Eigen::VectorXd>& points);

// Non-symmetry certificate nabla_0 R_{010i} = kappa f^2 D_{1i}. lhs is the
// coordinate covariant derivative, with the w-derivative of the curvature
// taken by fourth-order central differences and the connection corrections
// added analytically; rhs is the closed form. A nonzero value certifies
// that the metric is not locally symmetric. Requires 2 <= i <= n-1.
struct ObstructionSample {
  double lhs = 0.0;
  double rhs = 0.0;
};
ObstructionSample nabla_R_obstruction(const MetricParams& p,
                                      const Eigen::VectorXd& point, int i);

// Rejection-samples points with coordinates uniform in [-box, box] whose
// profile clears the domain floor with margin 0.05. Deterministic in seed.
// When rejected_out is non-null it receives the number of discarded draws.
std::vector<Eigen::VectorXd> sample_domain_points(const MetricParams& p,
                                                  int count,
                                                  std::uint64_t seed,
                                                  double box = 0.8,
                                                  int* rejected_out = nullptr);

}  // namespace liecurv
