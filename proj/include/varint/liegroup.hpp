#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "varint/numcore.hpp"

namespace varint {

/// A matrix Lie group together with its algebra basis and the maps needed by
/// the chart-based integrators. Group elements and algebra matrices are plain
/// dense matrices of size n x n; algebra coordinate vectors have length d.
struct MatrixGroupSpec {
  int n = 0;  // matrix size
  int d = 0;  // algebra dimension
  std::vector<Mat> basis;
  std::function<Mat(const Mat&)> exp;
  std::function<Mat(const Mat&)> log;
  Mat vee_pinv;  // d x n^2, left inverse of the vectorized basis

  Mat hat(const Vec& x) const;
  Vec vee(const Mat& m) const;
  Mat bracket(const Mat& a, const Mat& b) const { return a * b - b * a; }
  /// ad_xi as a d x d matrix in the chosen basis.
  Mat ad_matrix(const Vec& xi) const;
  /// Ad_g as a d x d matrix: coordinates of g hat(e_j) g^{-1}.
  Mat Ad_matrix(const Mat& g) const;
};

/// Generic dense matrix exponential / logarithm (scaling and squaring).
Mat matrix_exp(const Mat& a);
Mat matrix_log(const Mat& a);

/// Finalizes a spec whose basis is already set: computes vee_pinv and fills
/// exp/log with the generic dense versions if absent.
void finalize_group(MatrixGroupSpec& spec);

/// SO(3) with the standard hat map basis; Rodrigues exp and closed-form log.
MatrixGroupSpec so3();

/// R^k as the abelian group of (k+1)x(k+1) affine translation matrices.
MatrixGroupSpec rn(int k);

/// Chart at g0: xi = vee(log(g0^{-1} g)) and its inverse g0 exp(hat(xi)).
Vec group_chart(const MatrixGroupSpec& spec, const Mat& g0, const Mat& g);
Mat group_chart_inv(const MatrixGroupSpec& spec, const Mat& g0, const Vec& xi);

/// dexp_xi(eta) = sum_n ad_xi^n(eta) / (n+1)!, truncated at tol.
Vec dexp_apply(const MatrixGroupSpec& spec, const Vec& xi, const Vec& eta, double tol = 1e-14);

/// ddexp_xi(eta) = sum_n ad_xi^n(eta) / (n+2)!, truncated at tol.
Vec ddexp_apply(const MatrixGroupSpec& spec, const Vec& xi, const Vec& eta, double tol = 1e-14);

/// Directional derivative of the series in its subscript:
/// d/de dexp_{xi + e dxi}(u) at e = 0.
Vec dexp_param_deriv(const MatrixGroupSpec& spec, const Vec& xi, const Vec& dxi, const Vec& u,
                     double tol = 1e-14);

/// Cardinal interpolation of algebra controls: returns (xi(tau), dxi/dtau).
std::pair<Vec, Vec> lie_interpolant(const ControlTimes& times, const std::vector<Vec>& controls,
                                    double tau);

/// Galerkin scheme on a matrix group. lag acts on (g, gdot) as matrices; the
/// reduced path uses reduced_lag on the body velocity coordinates instead.
struct LieGalerkinScheme {
  MatrixGroupSpec group;
  std::function<double(const Mat&, const Mat&)> lag;
  std::function<double(const Vec&)> reduced_lag;
  ControlTimes times{{0.0, 1.0}};
  QuadratureRule quad;
  SolverConfig solver;
  double series_tol = 1e-14;
  double fd_step = 1e-6;  // chart-coordinate finite differences

  int order() const { return times.count() - 1; }
};

LieGalerkinScheme make_lie_galerkin(MatrixGroupSpec group,
                                    std::function<double(const Mat&, const Mat&)> lag, int s,
                                    SolverConfig solver = {});

/// Quadrature action over one segment. controls holds xi^0..xi^s with
/// xi^0 = 0; the curve is g(tau h) = g0 exp(hat(xi(tau))).
double lie_segment_action(const LieGalerkinScheme& scheme, const Mat& g0,
                          const std::vector<Vec>& controls, double h);

/// Gradient of the segment action with respect to xi^1..xi^{s-1}, by central
/// differences in the algebra coordinates.
Vec lie_internal_residual(const LieGalerkinScheme& scheme, const Mat& g0,
                          const std::vector<Vec>& controls, double h);

/// Solves the internal stationarity conditions given the endpoint coordinate
/// xi_s; returns the full control list including the fixed endpoints.
std::vector<Vec> solve_lie_internal(const LieGalerkinScheme& scheme, const Mat& g0,
                                    const Vec& xi_s, double h);

double lie_discrete_lagrangian(const LieGalerkinScheme& scheme, const Mat& g0, const Mat& g1,
                               double h);

/// Chart-coordinate endpoint derivatives of the discrete Lagrangian. The
/// perturbation is right translation by exp(eps hat(e_a)) at the endpoint,
/// so the components pair with body-frame algebra directions.
Vec lie_d1(const LieGalerkinScheme& scheme, const Mat& g0, const Mat& g1, double h);
Vec lie_d2(const LieGalerkinScheme& scheme, const Mat& g0, const Mat& g1, double h);

/// One step of the discrete Euler-Lagrange equation on the group.
Mat lie_del_step(const LieGalerkinScheme& scheme, const Mat& g0, const Mat& g1, double h);

/// Reduced discrete Lagrangian l_d(f) for a left-invariant system, computed
/// in the chart at the identity with reduced_lag on the body velocity.
double reduced_discrete_lagrangian(const LieGalerkinScheme& scheme, const Mat& f, double h);

/// Derivative of l_d along right-translated directions: mu_a = d/de
/// l_d(f exp(e hat(e_a))).
Vec reduced_momentum(const LieGalerkinScheme& scheme, const Mat& f, double h);

/// One step of the discrete Euler-Poincare equation with the convention
/// f_k = g_k^{-1} g_{k+1}.
Mat dep_step(const LieGalerkinScheme& scheme, const Mat& f_prev, double h);

/// g_{k+1} = g_k f_k.
std::vector<Mat> reconstruct(const Mat& g0, const std::vector<Mat>& fs);

}  // namespace varint
