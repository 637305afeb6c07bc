#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "varint/galerkin.hpp"
#include "varint/numcore.hpp"

namespace varint {

/// Symplectic-energy-momentum integrator: the step size is an unknown and
/// discrete energy equality is imposed between consecutive steps. order2
/// selects the midpoint-rule discrete Lagrangian; otherwise the Galerkin
/// quadrature form with internal control points is used.
struct SemScheme {
  LagrangianSystem system;
  bool order2 = true;
  int s = 2;  // Galerkin degree when order2 is false
  SolverConfig solver;
  double h_min = 1e-6;
  double h_max = 10.0;
};

struct SemStepRecord {
  Vec q;
  double h = 0.0;       // step taken from q to the next state
  double energy = 0.0;  // discrete energy of that step
  bool fallback = false;
};

double sem_discrete_lagrangian(const SemScheme& scheme, const Vec& q0, const Vec& q1, double h);

/// E_d = -D3 L_d.
double discrete_energy(const SemScheme& scheme, const Vec& q0, const Vec& q1, double h);

/// Partial derivatives of L_d with respect to the endpoints, h fixed.
Vec sem_d1(const SemScheme& scheme, const Vec& q0, const Vec& q1, double h);
Vec sem_d2(const SemScheme& scheme, const Vec& q0, const Vec& q1, double h);

struct SemStepResult {
  Vec q_next;
  double h_next = 0.0;
  bool fallback = false;
};

/// Solves the coupled momentum-matching and energy-equality system for
/// (q_next, h_next); falls back to energy-error minimization when the energy
/// equation is unsolvable.
SemStepResult sem_step(const SemScheme& scheme, const Vec& q_prev, const Vec& q_cur, double h_prev,
                       const std::optional<Vec>& guess = {});

/// Same step computed from the direct variational block with the multipliers
/// (lambda, omega) carried as unknowns. Used to validate the condensed form.
SemStepResult sem_step_direct(const SemScheme& scheme, const Vec& q_prev, const Vec& q_cur,
                              double h_prev);

/// Golden-section minimizer of (E_d - E_target)^2 over [h_min, h_max].
/// q_next_of_h maps a trial step size to the matching next configuration.
double energy_fallback(const SemScheme& scheme, const Vec& q_cur,
                       const std::function<Vec(double)>& q_next_of_h, double E_target);

/// Marches nsteps SEM steps; records one entry per accepted step.
std::vector<SemStepRecord> sem_run(const SemScheme& scheme, const Vec& q0, const Vec& q1,
                                   double h0, int nsteps);

}  // namespace varint
