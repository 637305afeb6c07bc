#pragma once

#include <optional>
#include <vector>

#include "varint/numcore.hpp"

namespace varint {

/// Higher-order Galerkin variational integrator: each step interpolates the
/// configuration by a degree-s polynomial through control points at the
/// control times, the segment action is evaluated by quadrature, and the
/// internal control points are eliminated by stationarity.
struct GalerkinScheme {
  LagrangianSystem system;
  ControlTimes times;
  QuadratureRule quad;
  SolverConfig solver;

  int order() const { return times.degree(); }  // s
};

/// Galerkin scheme with control times at the Lobatto quadrature nodes.
GalerkinScheme make_galerkin(LagrangianSystem system, int s, SolverConfig solver = {});

/// Control points q^0 ... q^s of a single time segment of length h.
struct SegmentControls {
  std::vector<Vec> q;
  double h = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Vec> momenta;   // one per state
  std::vector<double> energies;  // p.v - L along the discrete flow
};

/// Quadrature value of the segment action at the given controls.
double segment_action(const GalerkinScheme& scheme, const SegmentControls& controls);

/// Gradient of the segment action with respect to one control point.
Vec segment_action_grad(const GalerkinScheme& scheme, const SegmentControls& controls, int nu);

/// Stacked gradients with respect to the internal control points (nu = 1..s-1).
Vec internal_residual(const GalerkinScheme& scheme, const SegmentControls& controls);

/// Solves the internal stationarity system with endpoints pinned to (q0, q1).
SegmentControls solve_internal(const GalerkinScheme& scheme, const Vec& q0, const Vec& q1,
                               double h, const std::optional<SegmentControls>& guess = {});

/// Discrete Lagrangian L_d(q0, q1; h): segment action at the solved controls.
double discrete_lagrangian(const GalerkinScheme& scheme, const Vec& q0, const Vec& q1, double h);

/// One discrete Euler-Lagrange step: returns q2 with
/// D2 L_d(q0, q1) + D1 L_d(q1, q2) = 0.
Vec del_step(const GalerkinScheme& scheme, const Vec& q_prev, const Vec& q_cur, double h,
             const std::optional<Vec>& guess = {});

/// Discrete Legendre transforms p0 = -D1 L_d, p1 = D2 L_d.
std::pair<Vec, Vec> discrete_momenta(const GalerkinScheme& scheme, const Vec& q0, const Vec& q1,
                                     double h);

Trajectory integrate(const GalerkinScheme& scheme, const Vec& q0, const Vec& q1, double h,
                     int nsteps);

}  // namespace varint
