#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "varint/numcore.hpp"

namespace varint {

using Cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;

/// mu_m(theta) = integral of x^m e^{i theta x} over [0,1]. Uses the upward
/// recursion for |theta| >= 0.5 and a Taylor series below that.
Cplx filon_moment(double theta, int m);

/// Filon weights b_i(i theta) = integral of l_i(x) e^{i theta x} over [0,1],
/// where l_i are the cardinal polynomials on the given points. At theta = 0
/// they reduce to the plain interpolatory quadrature weights.
CVec filon_weights(const std::vector<double>& points, double theta);

/// Q = h sum_i b_i(i h omega) f(c_i h), approximating the integral of
/// f(x) e^{i omega x} over [0, h].
Cplx filon_integrate(const std::function<double(double)>& f, double omega, double h,
                     const std::vector<double>& points);
Cplx filon_integrate(const std::function<Cplx(double)>& f, double omega, double h,
                     const std::vector<double>& points);

/// Trial curve q_c(t) = (sum_j p(j,c) t^j) (1 + a0_c sin wt + a1_c cos wt).
/// p is (degree+1) x dim; a0, a1 have one entry per component.
struct OscillatoryCurve {
  Mat p;
  double omega = 0.0;
  Vec a0, a1;
};

/// Value and exact time derivative of the trial curve.
std::pair<Vec, Vec> oscillatory_eval(const OscillatoryCurve& curve, double t);

/// Planar pendulum with a stiff spring. q = (a, theta) with a the spring
/// extension and theta the angle from the vertical.
struct StiffPendulum {
  double m = 1.0;
  double g = 9.81;
  double k = 10000.0;
  double l = 1.0;

  double epsilon() const { return std::sqrt(m * g / (k * l)); }
  double fast_frequency() const { return std::sqrt(k / m); }
};

LagrangianSystem pendulum_lagrangian(const StiffPendulum& sys);

/// Hamilton's equations right-hand side on (a, theta, p_a, p_theta).
Vec pendulum_hamilton_rhs(const StiffPendulum& sys, const Vec& state);

/// Classical 4th-order one-step reference integration of the Hamiltonian
/// system; returns states sampled every dt.
std::vector<Vec> pendulum_resolve(const StiffPendulum& sys, const Vec& state0, double t_end,
                                  double dt);

/// Dominant nonzero angular frequency of a uniformly sampled real signal,
/// found from the discrete Fourier magnitude peak with quadratic peak
/// interpolation. Throws SolverError when no peak stands out.
double estimate_frequency_from_samples(const std::vector<double>& samples, double dt);

/// Runs the resolved reference for t_resolve and returns the dominant
/// frequency of the spring-extension component.
double estimate_fast_frequency(const StiffPendulum& sys, const Vec& state0, double t_resolve,
                               double dt_fine);

struct MultiscaleScheme {
  LagrangianSystem system;
  int poly_degree = 1;
  bool oscillatory = true;
  bool solve_omega = true;
  int harmonics = 3;    // Filon harmonics of the integrand in phi = omega t
  int phi_samples = 32; // FFT samples per fast phase
  QuadratureRule quad;  // Lobatto nodes in [0,1]
  SolverConfig solver;
  double omega_floor = 1e-6;
  double fd_step = 1e-6;
};

MultiscaleScheme make_multiscale(LagrangianSystem system, int poly_degree, int quad_points,
                                 SolverConfig solver = {});

/// Action of one segment, integrating each harmonic of the Lagrangian in
/// phi = omega t with a Filon rule at that harmonic's frequency.
double multiscale_action(const MultiscaleScheme& scheme, const OscillatoryCurve& curve, double h);

struct MultiscaleStepResult {
  OscillatoryCurve params;
  Vec lambda_out;
  bool omega_collapsed = false;
};

/// Solves the stationarity conditions of the augmented action for one
/// segment: unknowns are the segment parameters and the outgoing continuity
/// multiplier; the incoming multiplier and start value are data.
MultiscaleStepResult multiscale_step(const MultiscaleScheme& scheme, const Vec& q_start,
                                     const Vec& lambda_in, const OscillatoryCurve& guess, double h);

struct MultiscaleRecord {
  double t = 0.0;
  Vec q;
  Vec qdot;
  double energy = 0.0;
};

/// Marches nseg segments from (q0, v0), seeding omega with omega0.
std::vector<MultiscaleRecord> multiscale_run(const MultiscaleScheme& scheme, const Vec& q0,
                                             const Vec& v0, double omega0, double h, int nseg);

/// One-dimensional elliptic model problem (a(x/eps) u')' = f with
/// homogeneous boundary values on [0,1].
struct MsfemProblem {
  std::function<double(double)> a;  // coefficient as a function of x/eps
  std::function<double(double)> f;
  double eps = 1.0;
  std::vector<double> nodes;
};

/// Closed-form solution evaluated with composite quadrature resolving eps.
double msfem_exact_u(const MsfemProblem& prob, double x);

/// Nodal values (including the zero boundary nodes) of the multiscale finite
/// element solution with the oscillatory shape functions.
Vec msfem_solve(const MsfemProblem& prob);

}  // namespace varint
