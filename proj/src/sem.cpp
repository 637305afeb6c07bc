#include "varint/sem.hpp"

#include <algorithm>
#include <cmath>

namespace varint {

namespace {

GalerkinScheme to_galerkin(const SemScheme& scheme) {
  return make_galerkin(scheme.system, scheme.s, scheme.solver);
}

void check_pair(const SemScheme& scheme, const Vec& q0, const Vec& q1, double h) {
  if (q0.size() != scheme.system.dim || q1.size() != scheme.system.dim) {
    throw std::invalid_argument("sem: dimension mismatch");
  }
  if (!(h > 0.0)) throw std::invalid_argument("sem: h must be positive");
}

// Damped Newton with a trust limit on the step-size component. The discrete
// energy is very flat in h for the higher-order form, so an unrestricted
// Newton update can jump to a distant energy root; capping the h update keeps
// the iteration in the basin of the nearby solution.
Vec sem_newton(const ResidualFn& res, Vec x, int h_index, const SemScheme& scheme) {
  const SolverConfig& cfg = scheme.solver;
  const double h_lo = 0.25 * scheme.h_min;
  const double h_hi = 4.0 * scheme.h_max;
  double rnorm = res(x).norm();
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    const Vec r = res(x);
    rnorm = r.norm();
    if (rnorm < cfg.tol) return x;
    const Mat jac = fd_jacobian(res, x, cfg.fd_step);
    Eigen::FullPivLU<Mat> lu(jac);
    if (!lu.isInvertible()) throw SingularJacobianError(rnorm);
    Vec dx = lu.solve(-r);
    const double cap = 0.25 * (1.0 + std::abs(x[h_index]));
    const double dh = std::abs(dx[h_index]);
    if (dh > cap) dx *= cap / dh;
    double alpha = 1.0;
    Vec best = x + dx;
    best[h_index] = std::clamp(best[h_index], h_lo, h_hi);
    double best_norm = res(best).norm();
    for (int k = 0; k < 30 && best_norm >= rnorm; ++k) {
      alpha *= 0.5;
      Vec trial = x + alpha * dx;
      trial[h_index] = std::clamp(trial[h_index], h_lo, h_hi);
      const double trial_norm = res(trial).norm();
      if (trial_norm < best_norm) {
        best = trial;
        best_norm = trial_norm;
      }
    }
    x = best;
  }
  if (res(x).norm() < cfg.tol) return x;
  throw SolverError("sem: no convergence after " + std::to_string(cfg.max_iter) + " iterations",
                    rnorm);
}

}  // namespace

double sem_discrete_lagrangian(const SemScheme& scheme, const Vec& q0, const Vec& q1, double h) {
  check_pair(scheme, q0, q1, h);
  if (scheme.order2) {
    const Vec mid = 0.5 * (q0 + q1);
    const Vec v = (q1 - q0) / h;
    return h * scheme.system.lag(mid, v);
  }
  return discrete_lagrangian(to_galerkin(scheme), q0, q1, h);
}

double discrete_energy(const SemScheme& scheme, const Vec& q0, const Vec& q1, double h) {
  check_pair(scheme, q0, q1, h);
  if (scheme.order2) {
    const Vec mid = 0.5 * (q0 + q1);
    const Vec v = (q1 - q0) / h;
    return -scheme.system.lag(mid, v) + scheme.system.grad_v(mid, v).dot(v);
  }
  // Envelope derivative of the solved Galerkin action in h:
  // E_d = sum_j b_j [dL/dv . v - L] at the quadrature points.
  const GalerkinScheme g = to_galerkin(scheme);
  const SegmentControls controls = solve_internal(g, q0, q1, h);
  double energy = 0.0;
  const int nn = g.times.count();
  for (int j = 0; j < g.quad.size(); ++j) {
    Vec q = Vec::Zero(g.system.dim);
    Vec v = Vec::Zero(g.system.dim);
    for (int nu = 0; nu < nn; ++nu) {
      const double lv = cardinal_basis(g.times, nu, g.quad.points[j]);
      const double ld = cardinal_basis_deriv(g.times, nu, g.quad.points[j]);
      q += lv * controls.q[nu];
      v += ld * controls.q[nu];
    }
    v /= h;
    energy += g.quad.weights[j] * (g.system.grad_v(q, v).dot(v) - g.system.lag(q, v));
  }
  return energy;
}

Vec sem_d1(const SemScheme& scheme, const Vec& q0, const Vec& q1, double h) {
  check_pair(scheme, q0, q1, h);
  if (scheme.order2) {
    const Vec mid = 0.5 * (q0 + q1);
    const Vec v = (q1 - q0) / h;
    return Vec(0.5 * h * scheme.system.grad_q(mid, v) - scheme.system.grad_v(mid, v));
  }
  const GalerkinScheme g = to_galerkin(scheme);
  return segment_action_grad(g, solve_internal(g, q0, q1, h), 0);
}

Vec sem_d2(const SemScheme& scheme, const Vec& q0, const Vec& q1, double h) {
  check_pair(scheme, q0, q1, h);
  if (scheme.order2) {
    const Vec mid = 0.5 * (q0 + q1);
    const Vec v = (q1 - q0) / h;
    return Vec(0.5 * h * scheme.system.grad_q(mid, v) + scheme.system.grad_v(mid, v));
  }
  const GalerkinScheme g = to_galerkin(scheme);
  return segment_action_grad(g, solve_internal(g, q0, q1, h), g.order());
}

double energy_fallback(const SemScheme& scheme, const Vec& q_cur,
                       const std::function<Vec(double)>& q_next_of_h, double E_target) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  auto objective = [&](double h) {
    const double diff = discrete_energy(scheme, q_cur, q_next_of_h(h), h) - E_target;
    return diff * diff;
  };
  double a = scheme.h_min, b = scheme.h_max;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = objective(c), fd = objective(d);
  while (b - a > 1e-10) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = objective(d);
    }
  }
  return 0.5 * (a + b);
}

SemStepResult sem_step(const SemScheme& scheme, const Vec& q_prev, const Vec& q_cur, double h_prev,
                       const std::optional<Vec>& guess) {
  check_pair(scheme, q_prev, q_cur, h_prev);
  const double E_target = discrete_energy(scheme, q_prev, q_cur, h_prev);
  const Vec p_cur = sem_d2(scheme, q_prev, q_cur, h_prev);

  // Momentum matching alone determines q_next once h is fixed, so the
  // condensed system reduces to the scalar energy equation phi(h) = 0 along
  // the momentum-matched family. Solving it in one dimension is far more
  // robust than a coupled Newton: for high-order forms phi is nearly flat
  // and a coupled iteration readily jumps to a distant spurious root.
  Vec mom_guess = guess ? *guess : Vec(2.0 * q_cur - q_prev);
  auto q_next_at = [&](double h) {
    ResidualFn mom = [&](const Vec& q_next) { return Vec(p_cur + sem_d1(scheme, q_cur, q_next, h)); };
    const Vec q = newton_solve(mom, std::nullopt, mom_guess, scheme.solver);
    mom_guess = q;  // warm start for nearby h
    return q;
  };
  auto phi = [&](double h) { return discrete_energy(scheme, q_cur, q_next_at(h), h) - E_target; };

  // Along an SEM orbit the previous step enforced energy equality, so the
  // incoming h usually solves the equation already.
  if (h_prev >= scheme.h_min && h_prev <= scheme.h_max) {
    const Vec q0 = q_next_at(h_prev);
    if (std::abs(discrete_energy(scheme, q_cur, q0, h_prev) - E_target) < scheme.solver.tol) {
      return {q0, h_prev, false};
    }
  }

  // Bracket the root nearest to h_prev by expanding outward, then bisect.
  const double h_anchor = std::clamp(h_prev, scheme.h_min, scheme.h_max);
  double phi_anchor;
  try {
    phi_anchor = phi(h_anchor);
  } catch (const SolverError&) {
    const double h_star = energy_fallback(scheme, q_cur, q_next_at, E_target);
    return {q_next_at(h_star), h_star, true};
  }

  double lo = 0.0, hi = 0.0;  // bracket endpoints once found
  bool bracketed = false;
  double up = h_anchor, down = h_anchor;
  double up_phi = phi_anchor, down_phi = phi_anchor;
  bool up_alive = up < scheme.h_max, down_alive = down > scheme.h_min;
  double radius = 0.05 * (scheme.h_max - scheme.h_min) / 64.0 + 0.02 * h_anchor;
  for (int iter = 0; iter < 80 && (up_alive || down_alive) && !bracketed; ++iter) {
    if (up_alive) {
      const double trial = std::min(up + radius, scheme.h_max);
      try {
        const double val = phi(trial);
        if (val == 0.0 || (val > 0.0) != (up_phi > 0.0)) {
          lo = up;
          hi = trial;
          bracketed = true;
        }
        up = trial;
        up_phi = val;
      } catch (const SolverError&) {
        up_alive = false;
      }
      if (up >= scheme.h_max) up_alive = false;
    }
    if (down_alive && !bracketed) {
      const double trial = std::max(down - radius, scheme.h_min);
      try {
        const double val = phi(trial);
        if (val == 0.0 || (val > 0.0) != (down_phi > 0.0)) {
          lo = trial;
          hi = down;
          bracketed = true;
        }
        down = trial;
        down_phi = val;
      } catch (const SolverError&) {
        down_alive = false;
      }
      if (down <= scheme.h_min) down_alive = false;
    }
    radius *= 1.3;
  }

  if (!bracketed) {
    const double h_star = energy_fallback(scheme, q_cur, q_next_at, E_target);
    return {q_next_at(h_star), h_star, true};
  }

  double flo = phi(lo);
  for (int iter = 0; iter < 100 && hi - lo > 1e-14 * (1.0 + hi); ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = phi(mid);
    if (fmid == 0.0) {
      lo = hi = mid;
      break;
    }
    if ((fmid > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  const double h_star = 0.5 * (lo + hi);
  return {q_next_at(h_star), h_star, false};
}

SemStepResult sem_step_direct(const SemScheme& scheme, const Vec& q_prev, const Vec& q_cur,
                              double h_prev) {
  check_pair(scheme, q_prev, q_cur, h_prev);
  const int d = scheme.system.dim;
  // Unknowns: q_next (d), h_next, omega, lambda (d). The four multiplier
  // equations of the variational block are kept explicitly.
  ResidualFn res = [&](const Vec& x) {
    const Vec q_next = x.head(d);
    const double h_next = std::abs(x[d]);
    const double omega = x[d + 1];
    const Vec lambda = x.segment(d + 2, d);
    Vec r(2 * d + 2);
    r[0] = discrete_energy(scheme, q_prev, q_cur, h_prev) - omega;
    r[1] = -discrete_energy(scheme, q_cur, q_next, h_next) + omega;
    r.segment(2, d) = sem_d2(scheme, q_prev, q_cur, h_prev) - lambda;
    r.segment(2 + d, d) = sem_d1(scheme, q_cur, q_next, h_next) + lambda;
    return r;
  };
  // The block residual is satisfied exactly at the condensed solution when
  // the two forms are equivalent, so seed there and let Newton confirm and
  // polish. A cold full-block Newton crawls along the nearly flat energy
  // valley and is useless in practice.
  const SemStepResult condensed = sem_step(scheme, q_prev, q_cur, h_prev);
  if (condensed.fallback) {
    throw SolverError("sem_step_direct: energy equation has no root in bounds", 0.0);
  }
  Vec start(2 * d + 2);
  start.head(d) = condensed.q_next;
  start[d] = condensed.h_next;
  start[d + 1] = discrete_energy(scheme, q_prev, q_cur, h_prev);
  start.segment(d + 2, d) = sem_d2(scheme, q_prev, q_cur, h_prev);
  const Vec solution = sem_newton(res, start, d, scheme);
  return {Vec(solution.head(d)), std::abs(solution[d]), false};
}

std::vector<SemStepRecord> sem_run(const SemScheme& scheme, const Vec& q0, const Vec& q1,
                                   double h0, int nsteps) {
  std::vector<SemStepRecord> records;
  records.push_back({q0, h0, discrete_energy(scheme, q0, q1, h0), false});
  Vec q_prev = q0, q_cur = q1;
  double h = h0;
  for (int k = 0; k < nsteps; ++k) {
    SemStepResult step;
    try {
      step = sem_step(scheme, q_prev, q_cur, h);
    } catch (const SolverError& err) {
      throw SolverError("sem_run: step " + std::to_string(k) + " failed: " + err.what(),
                        err.residual_norm());
    }
    records.push_back({q_cur, step.h_next, discrete_energy(scheme, q_cur, step.q_next, step.h_next),
                       step.fallback});
    q_prev = q_cur;
    q_cur = step.q_next;
    h = step.h_next;
  }
  return records;
}

}  // namespace varint
