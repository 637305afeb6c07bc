#include "varint/galerkin.hpp"

#include <cmath>

namespace varint {

namespace {

struct SegmentBasis {
  // l_nu(c_j) and l'_nu(c_j) tabulated per quadrature point.
  std::vector<std::vector<double>> val;  // [j][nu]
  std::vector<std::vector<double>> der;
};

SegmentBasis tabulate(const GalerkinScheme& scheme) {
  SegmentBasis b;
  const int nq = scheme.quad.size();
  const int nn = scheme.times.count();
  b.val.assign(nq, std::vector<double>(nn));
  b.der.assign(nq, std::vector<double>(nn));
  for (int j = 0; j < nq; ++j) {
    for (int nu = 0; nu < nn; ++nu) {
      b.val[j][nu] = cardinal_basis(scheme.times, nu, scheme.quad.points[j]);
      b.der[j][nu] = cardinal_basis_deriv(scheme.times, nu, scheme.quad.points[j]);
    }
  }
  return b;
}

void check_controls(const GalerkinScheme& scheme, const SegmentControls& c) {
  if (static_cast<int>(c.q.size()) != scheme.times.count()) {
    throw std::invalid_argument("SegmentControls: control count does not match scheme");
  }
  if (!(c.h > 0.0)) throw std::invalid_argument("SegmentControls: h must be positive");
  for (const Vec& qi : c.q) {
    if (qi.size() != scheme.system.dim) {
      throw std::invalid_argument("SegmentControls: dimension mismatch");
    }
  }
}

}  // namespace

GalerkinScheme make_galerkin(LagrangianSystem system, int s, SolverConfig solver) {
  if (s < 1) throw std::invalid_argument("make_galerkin: s must be >= 1");
  QuadratureRule quad = lobatto_rule(s + 1);
  ControlTimes times(quad.points);
  return GalerkinScheme{std::move(system), std::move(times), std::move(quad), solver};
}

double segment_action(const GalerkinScheme& scheme, const SegmentControls& controls) {
  check_controls(scheme, controls);
  const SegmentBasis basis = tabulate(scheme);
  const int nn = scheme.times.count();
  double action = 0.0;
  for (int j = 0; j < scheme.quad.size(); ++j) {
    Vec q = Vec::Zero(scheme.system.dim);
    Vec v = Vec::Zero(scheme.system.dim);
    for (int nu = 0; nu < nn; ++nu) {
      q += basis.val[j][nu] * controls.q[nu];
      v += basis.der[j][nu] * controls.q[nu];
    }
    v /= controls.h;
    action += scheme.quad.weights[j] * scheme.system.lag(q, v);
  }
  return controls.h * action;
}

Vec segment_action_grad(const GalerkinScheme& scheme, const SegmentControls& controls, int nu) {
  check_controls(scheme, controls);
  if (nu < 0 || nu > scheme.order()) throw std::out_of_range("segment_action_grad: bad index");
  const SegmentBasis basis = tabulate(scheme);
  const int nn = scheme.times.count();
  Vec grad = Vec::Zero(scheme.system.dim);
  for (int j = 0; j < scheme.quad.size(); ++j) {
    Vec q = Vec::Zero(scheme.system.dim);
    Vec v = Vec::Zero(scheme.system.dim);
    for (int mu = 0; mu < nn; ++mu) {
      q += basis.val[j][mu] * controls.q[mu];
      v += basis.der[j][mu] * controls.q[mu];
    }
    v /= controls.h;
    grad += scheme.quad.weights[j] *
            (controls.h * basis.val[j][nu] * scheme.system.grad_q(q, v) +
             basis.der[j][nu] * scheme.system.grad_v(q, v));
  }
  return grad;
}

Vec internal_residual(const GalerkinScheme& scheme, const SegmentControls& controls) {
  const int s = scheme.order();
  const int d = scheme.system.dim;
  Vec res(d * std::max(0, s - 1));
  for (int nu = 1; nu < s; ++nu) {
    res.segment((nu - 1) * d, d) = segment_action_grad(scheme, controls, nu);
  }
  return res;
}

SegmentControls solve_internal(const GalerkinScheme& scheme, const Vec& q0, const Vec& q1,
                               double h, const std::optional<SegmentControls>& guess) {
  if (!(h > 0.0)) throw std::invalid_argument("solve_internal: h must be positive");
  if (q0.size() != scheme.system.dim || q1.size() != scheme.system.dim) {
    throw std::invalid_argument("solve_internal: dimension mismatch");
  }
  const int s = scheme.order();
  const int d = scheme.system.dim;

  SegmentControls controls;
  controls.h = h;
  controls.q.resize(s + 1);
  controls.q[0] = q0;
  controls.q[s] = q1;
  for (int nu = 1; nu < s; ++nu) {
    const double t = scheme.times.node(nu);
    controls.q[nu] = (guess && static_cast<int>(guess->q.size()) == s + 1)
                         ? guess->q[nu]
                         : Vec((1.0 - t) * q0 + t * q1);
  }
  if (s == 1) return controls;

  auto pack = [&](const SegmentControls& c) {
    Vec x(d * (s - 1));
    for (int nu = 1; nu < s; ++nu) x.segment((nu - 1) * d, d) = c.q[nu];
    return x;
  };
  auto unpack = [&](const Vec& x) {
    SegmentControls c = controls;
    for (int nu = 1; nu < s; ++nu) c.q[nu] = x.segment((nu - 1) * d, d);
    return c;
  };

  ResidualFn res = [&](const Vec& x) { return internal_residual(scheme, unpack(x)); };
  const Vec solution = newton_solve(res, std::nullopt, pack(controls), scheme.solver);
  return unpack(solution);
}

double discrete_lagrangian(const GalerkinScheme& scheme, const Vec& q0, const Vec& q1, double h) {
  return segment_action(scheme, solve_internal(scheme, q0, q1, h));
}

namespace {

// D1/D2 of L_d by the envelope argument: the internal gradients vanish at the
// solved controls, so only the explicit endpoint dependence survives.
Vec d1_ld(const GalerkinScheme& scheme, const SegmentControls& solved) {
  return segment_action_grad(scheme, solved, 0);
}

Vec d2_ld(const GalerkinScheme& scheme, const SegmentControls& solved) {
  return segment_action_grad(scheme, solved, scheme.order());
}

}  // namespace

std::pair<Vec, Vec> discrete_momenta(const GalerkinScheme& scheme, const Vec& q0, const Vec& q1,
                                     double h) {
  const SegmentControls solved = solve_internal(scheme, q0, q1, h);
  return {-d1_ld(scheme, solved), d2_ld(scheme, solved)};
}

Vec del_step(const GalerkinScheme& scheme, const Vec& q_prev, const Vec& q_cur, double h,
             const std::optional<Vec>& guess) {
  const SegmentControls prev = solve_internal(scheme, q_prev, q_cur, h);
  const Vec p_cur = d2_ld(scheme, prev);

  // Warm start for the inner solve of each candidate segment.
  std::optional<SegmentControls> warm;
  ResidualFn res = [&](const Vec& q_next) {
    const SegmentControls next = solve_internal(scheme, q_cur, q_next, h, warm);
    warm = next;
    return Vec(p_cur + d1_ld(scheme, next));
  };
  const Vec start = guess ? *guess : Vec(2.0 * q_cur - q_prev);
  return newton_solve(res, std::nullopt, start, scheme.solver);
}

namespace {

// Velocity from momentum via the Legendre transform, for diagnostics.
Vec velocity_from_momentum(const LagrangianSystem& sys, const Vec& q, const Vec& p,
                           const Vec& v_guess, const SolverConfig& cfg) {
  ResidualFn res = [&](const Vec& v) { return Vec(sys.grad_v(q, v) - p); };
  SolverConfig relaxed = cfg;
  relaxed.tol = std::max(cfg.tol, 1e-11);
  return newton_solve(res, std::nullopt, v_guess, relaxed);
}

}  // namespace

Trajectory integrate(const GalerkinScheme& scheme, const Vec& q0, const Vec& q1, double h,
                     int nsteps) {
  if (nsteps < 1) throw std::invalid_argument("integrate: nsteps must be >= 1");
  Trajectory traj;
  traj.times.reserve(nsteps + 2);
  traj.states.reserve(nsteps + 2);

  Vec q_prev = q0, q_cur = q1;
  traj.times.push_back(0.0);
  traj.states.push_back(q_prev);
  traj.times.push_back(h);
  traj.states.push_back(q_cur);

  auto [p0, p1] = discrete_momenta(scheme, q_prev, q_cur, h);
  traj.momenta.push_back(p0);
  traj.momenta.push_back(p1);

  std::optional<Vec> guess;
  for (int k = 0; k < nsteps; ++k) {
    Vec q_next;
    try {
      q_next = del_step(scheme, q_prev, q_cur, h, guess);
    } catch (const SolverError& err) {
      throw SolverError("integrate: step " + std::to_string(k) + " failed: " + err.what(),
                        err.residual_norm());
    }
    guess = q_next + (q_next - q_cur);  // shift the warm start forward
    const auto [pa, pb] = discrete_momenta(scheme, q_cur, q_next, h);
    (void)pa;
    traj.momenta.push_back(pb);
    q_prev = q_cur;
    q_cur = q_next;
    traj.times.push_back(traj.times.back() + h);
    traj.states.push_back(q_cur);
  }

  traj.energies.reserve(traj.states.size());
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const Vec& q = traj.states[i];
    const Vec& p = traj.momenta[i];
    Vec v_guess;
    if (i + 1 < traj.states.size()) {
      v_guess = (traj.states[i + 1] - q) / h;
    } else {
      v_guess = (q - traj.states[i - 1]) / h;
    }
    const Vec v = velocity_from_momentum(scheme.system, q, p, v_guess, scheme.solver);
    traj.energies.push_back(p.dot(v) - scheme.system.lag(q, v));
  }
  return traj;
}

}  // namespace varint
