#include "varint/multiscale.hpp"

#include <cmath>
#include <stdexcept>

namespace varint {

namespace {
constexpr double kThetaSwitch = 0.5;
constexpr Cplx kI{0.0, 1.0};
}  // namespace

Cplx filon_moment(double theta, int m) {
  if (m < 0) throw std::invalid_argument("filon_moment: m must be nonnegative");
  if (std::abs(theta) >= kThetaSwitch) {
    // mu_0 = (e^{i t} - 1)/(i t), mu_m = (e^{i t} - m mu_{m-1})/(i t).
    const Cplx eit = std::exp(kI * theta);
    Cplx mu = (eit - 1.0) / (kI * theta);
    for (int j = 1; j <= m; ++j) mu = (eit - static_cast<double>(j) * mu) / (kI * theta);
    return mu;
  }
  // mu_m = sum_n (i t)^n / (n! (m + n + 1)).
  Cplx term{1.0, 0.0};
  Cplx sum = term / static_cast<double>(m + 1);
  for (int n = 1; n <= 40; ++n) {
    term *= kI * theta / static_cast<double>(n);
    const Cplx add = term / static_cast<double>(m + n + 1);
    sum += add;
    if (std::abs(add) < 1e-17 * (1.0 + std::abs(sum))) break;
  }
  return sum;
}

CVec filon_weights(const std::vector<double>& points, double theta) {
  const int nu = static_cast<int>(points.size());
  if (nu < 1) throw std::invalid_argument("filon_weights: need at least one point");
  // Cardinal polynomial coefficients from the Vandermonde system: column i of
  // V^{-1} holds the monomial coefficients of l_i.
  Mat vand(nu, nu);
  for (int r = 0; r < nu; ++r) {
    double pw = 1.0;
    for (int c = 0; c < nu; ++c) {
      vand(r, c) = pw;
      pw *= points[r];
    }
  }
  const Mat coeff = vand.inverse();
  CVec moments(nu);
  for (int m = 0; m < nu; ++m) moments[m] = filon_moment(theta, m);
  CVec weights(nu);
  for (int i = 0; i < nu; ++i) {
    Cplx sum{0.0, 0.0};
    for (int m = 0; m < nu; ++m) sum += coeff(m, i) * moments[m];
    weights[i] = sum;
  }
  return weights;
}

Cplx filon_integrate(const std::function<Cplx(double)>& f, double omega, double h,
                     const std::vector<double>& points) {
  const CVec b = filon_weights(points, h * omega);
  Cplx sum{0.0, 0.0};
  for (std::size_t i = 0; i < points.size(); ++i) sum += b[static_cast<int>(i)] * f(points[i] * h);
  return h * sum;
}

Cplx filon_integrate(const std::function<double(double)>& f, double omega, double h,
                     const std::vector<double>& points) {
  return filon_integrate(std::function<Cplx(double)>([&f](double x) { return Cplx(f(x), 0.0); }),
                         omega, h, points);
}

std::pair<Vec, Vec> oscillatory_eval(const OscillatoryCurve& curve, double t) {
  const int dim = static_cast<int>(curve.p.cols());
  const int deg = static_cast<int>(curve.p.rows()) - 1;
  Vec q(dim), qdot(dim);
  const double s = std::sin(curve.omega * t), c = std::cos(curve.omega * t);
  for (int comp = 0; comp < dim; ++comp) {
    double poly = 0.0, dpoly = 0.0, pw = 1.0;
    for (int j = 0; j <= deg; ++j) {
      poly += curve.p(j, comp) * pw;
      if (j + 1 <= deg) dpoly += curve.p(j + 1, comp) * (j + 1) * pw;
      pw *= t;
    }
    const double osc = 1.0 + curve.a0[comp] * s + curve.a1[comp] * c;
    const double dosc = curve.omega * (curve.a0[comp] * c - curve.a1[comp] * s);
    q[comp] = poly * osc;
    qdot[comp] = dpoly * osc + poly * dosc;
  }
  return {q, qdot};
}

LagrangianSystem pendulum_lagrangian(const StiffPendulum& sys) {
  LagrangianSystem out;
  out.dim = 2;
  const double m = sys.m, g = sys.g, k = sys.k, l = sys.l;
  out.lag = [m, g, k, l](const Vec& q, const Vec& v) {
    const double a = q[0], th = q[1], ad = v[0], thd = v[1];
    const double r = l + a;
    return 0.5 * m * (ad * ad + r * r * thd * thd) + m * g * r * std::cos(th) - 0.5 * k * a * a;
  };
  out.dLdq = [m, g, k, l](const Vec& q, const Vec& v) {
    const double a = q[0], th = q[1], thd = v[1];
    const double r = l + a;
    Vec d(2);
    d[0] = m * r * thd * thd + m * g * std::cos(th) - k * a;
    d[1] = -m * g * r * std::sin(th);
    return d;
  };
  out.dLdv = [m, l](const Vec& q, const Vec& v) {
    const double r = l + q[0];
    Vec d(2);
    d[0] = m * v[0];
    d[1] = m * r * r * v[1];
    return d;
  };
  return out;
}

Vec pendulum_hamilton_rhs(const StiffPendulum& sys, const Vec& state) {
  const double a = state[0], th = state[1], pa = state[2], pth = state[3];
  const double r = sys.l + a;
  const double thd = pth / (sys.m * r * r);
  Vec rhs(4);
  rhs[0] = pa / sys.m;
  rhs[1] = thd;
  rhs[2] = -sys.k * a + sys.g * sys.m * std::cos(th) + sys.m * r * thd * thd;
  rhs[3] = -sys.g * sys.m * r * std::sin(th);
  return rhs;
}

std::vector<Vec> pendulum_resolve(const StiffPendulum& sys, const Vec& state0, double t_end,
                                  double dt) {
  std::vector<Vec> states{state0};
  Vec y = state0;
  const int nsteps = static_cast<int>(std::ceil(t_end / dt));
  for (int k = 0; k < nsteps; ++k) {
    const Vec k1 = pendulum_hamilton_rhs(sys, y);
    const Vec k2 = pendulum_hamilton_rhs(sys, Vec(y + 0.5 * dt * k1));
    const Vec k3 = pendulum_hamilton_rhs(sys, Vec(y + 0.5 * dt * k2));
    const Vec k4 = pendulum_hamilton_rhs(sys, Vec(y + dt * k3));
    y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    states.push_back(y);
  }
  return states;
}

double estimate_frequency_from_samples(const std::vector<double>& samples, double dt) {
  const int n = static_cast<int>(samples.size());
  if (n < 8) throw std::invalid_argument("estimate_frequency: too few samples");
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= n;
  const int half = n / 2;
  // Hann window against spectral leakage; the peak is then refined by
  // parabolic interpolation on the log magnitudes.
  std::vector<double> windowed(n);
  for (int j = 0; j < n; ++j) {
    windowed[j] = (samples[j] - mean) * 0.5 * (1.0 - std::cos(2.0 * M_PI * j / n));
  }
  std::vector<double> mag(half + 1, 0.0);
  for (int k = 1; k <= half; ++k) {
    Cplx acc{0.0, 0.0};
    for (int j = 0; j < n; ++j) {
      acc += windowed[j] * std::exp(-kI * (2.0 * M_PI * k * j / n));
    }
    mag[k] = std::abs(acc);
  }
  int peak = 1;
  double total = 0.0;
  for (int k = 1; k <= half; ++k) {
    total += mag[k];
    if (mag[k] > mag[peak]) peak = k;
  }
  const double baseline = (total - mag[peak]) / std::max(1, half - 1);
  if (mag[peak] < 10.0 * baseline + 1e-12) {
    throw SolverError("estimate_frequency: no dominant spectral peak", mag[peak]);
  }
  double delta = 0.0;
  if (peak > 1 && peak < half && mag[peak - 1] > 0.0 && mag[peak + 1] > 0.0) {
    const double lm = std::log(mag[peak - 1]), l0 = std::log(mag[peak]),
                 lp = std::log(mag[peak + 1]);
    const double denom = lm - 2.0 * l0 + lp;
    if (std::abs(denom) > 1e-300) delta = 0.5 * (lm - lp) / denom;
  }
  return 2.0 * M_PI * (peak + delta) / (n * dt);
}

double estimate_fast_frequency(const StiffPendulum& sys, const Vec& state0, double t_resolve,
                               double dt_fine) {
  const auto states = pendulum_resolve(sys, state0, t_resolve, dt_fine);
  std::vector<double> a_samples;
  a_samples.reserve(states.size());
  for (const auto& s : states) a_samples.push_back(s[0]);
  return estimate_frequency_from_samples(a_samples, dt_fine);
}

MultiscaleScheme make_multiscale(LagrangianSystem system, int poly_degree, int quad_points,
                                 SolverConfig solver) {
  if (poly_degree < 1) throw std::invalid_argument("make_multiscale: degree must be at least 1");
  // The stationarity residual is a finite-difference gradient of the segment
  // action, so its noise floor sits near 1e-10; don't demand more than that.
  if (solver.tol < 1e-9) solver.tol = 1e-9;
  MultiscaleScheme scheme;
  scheme.system = std::move(system);
  scheme.poly_degree = poly_degree;
  scheme.quad = lobatto_rule(quad_points);
  scheme.solver = solver;
  return scheme;
}

double multiscale_action(const MultiscaleScheme& scheme, const OscillatoryCurve& curve, double h) {
  if (!scheme.oscillatory) {
    double sum = 0.0;
    for (int i = 0; i < scheme.quad.size(); ++i) {
      const auto [q, qd] = oscillatory_eval(curve, scheme.quad.points[i] * h);
      sum += scheme.quad.weights[i] * scheme.system.lag(q, qd);
    }
    return h * sum;
  }
  // The integrand is smooth in t and 2pi-periodic in the fast phase
  // phi = omega t. Expand it in harmonics of phi at each quadrature node and
  // integrate each harmonic with a Filon rule at its own frequency.
  const int nq = scheme.quad.size();
  const int big_r = scheme.harmonics;
  const int big_m = scheme.phi_samples;
  const int dim = scheme.system.dim;
  const int deg = scheme.poly_degree;

  Eigen::MatrixXcd gr(big_r + 1, nq);
  for (int i = 0; i < nq; ++i) {
    const double t = scheme.quad.points[i] * h;
    std::vector<double> gvals(big_m);
    for (int m = 0; m < big_m; ++m) {
      const double phi = 2.0 * M_PI * m / big_m;
      const double s = std::sin(phi), c = std::cos(phi);
      Vec q(dim), qd(dim);
      for (int comp = 0; comp < dim; ++comp) {
        double poly = 0.0, dpoly = 0.0, pw = 1.0;
        for (int j = 0; j <= deg; ++j) {
          poly += curve.p(j, comp) * pw;
          if (j + 1 <= deg) dpoly += curve.p(j + 1, comp) * (j + 1) * pw;
          pw *= t;
        }
        const double osc = 1.0 + curve.a0[comp] * s + curve.a1[comp] * c;
        const double dosc = curve.omega * (curve.a0[comp] * c - curve.a1[comp] * s);
        q[comp] = poly * osc;
        qd[comp] = dpoly * osc + poly * dosc;
      }
      gvals[m] = scheme.system.lag(q, qd);
    }
    for (int r = 0; r <= big_r; ++r) {
      Cplx acc{0.0, 0.0};
      for (int m = 0; m < big_m; ++m) {
        acc += gvals[m] * std::exp(-kI * (2.0 * M_PI * r * m / big_m));
      }
      gr(r, i) = acc / static_cast<double>(big_m);
    }
  }

  double total = 0.0;
  for (int r = 0; r <= big_r; ++r) {
    const CVec b = filon_weights(scheme.quad.points, h * r * curve.omega);
    Cplx part{0.0, 0.0};
    for (int i = 0; i < nq; ++i) part += b[i] * gr(r, i);
    total += (r == 0 ? 1.0 : 2.0) * (h * part).real();
  }
  return total;
}

namespace {

struct Packing {
  int dim = 0, deg = 0;
  bool osc = false, with_omega = false;
  int size() const { return (deg + 1) * dim + (osc ? 2 * dim : 0) + (with_omega ? 1 : 0); }
};

Packing packing_of(const MultiscaleScheme& scheme) {
  return {scheme.system.dim, scheme.poly_degree, scheme.oscillatory,
          scheme.oscillatory && scheme.solve_omega};
}

Vec pack(const Packing& pk, const OscillatoryCurve& curve) {
  Vec z(pk.size());
  int at = 0;
  for (int j = 0; j <= pk.deg; ++j) {
    for (int c = 0; c < pk.dim; ++c) z[at++] = curve.p(j, c);
  }
  if (pk.osc) {
    for (int c = 0; c < pk.dim; ++c) z[at++] = curve.a0[c];
    for (int c = 0; c < pk.dim; ++c) z[at++] = curve.a1[c];
  }
  if (pk.with_omega) z[at++] = curve.omega;
  return z;
}

OscillatoryCurve unpack(const Packing& pk, const Vec& z, const OscillatoryCurve& base) {
  OscillatoryCurve curve;
  curve.p = Mat::Zero(pk.deg + 1, pk.dim);
  curve.a0 = Vec::Zero(pk.dim);
  curve.a1 = Vec::Zero(pk.dim);
  curve.omega = base.omega;
  int at = 0;
  for (int j = 0; j <= pk.deg; ++j) {
    for (int c = 0; c < pk.dim; ++c) curve.p(j, c) = z[at++];
  }
  if (pk.osc) {
    for (int c = 0; c < pk.dim; ++c) curve.a0[c] = z[at++];
    for (int c = 0; c < pk.dim; ++c) curve.a1[c] = z[at++];
  }
  if (pk.with_omega) curve.omega = z[at++];
  return curve;
}

}  // namespace

MultiscaleStepResult multiscale_step(const MultiscaleScheme& scheme, const Vec& q_start,
                                     const Vec& lambda_in, const OscillatoryCurve& guess,
                                     double h) {
  const Packing pk = packing_of(scheme);
  const int nz = pk.size();
  const int dim = pk.dim;
  if (q_start.size() != dim || lambda_in.size() != dim) {
    throw std::invalid_argument("multiscale_step: dimension mismatch");
  }

  // Augmented per-segment functional; its z-gradient plus the continuity
  // rows make up the residual.
  auto augmented = [&](const Vec& z, const Vec& lambda_out) {
    const OscillatoryCurve curve = unpack(pk, z, guess);
    const auto [q0, qd0] = oscillatory_eval(curve, 0.0);
    const auto [qh, qdh] = oscillatory_eval(curve, h);
    (void)qd0;
    (void)qdh;
    return multiscale_action(scheme, curve, h) + lambda_out.dot(qh) - lambda_in.dot(q0);
  };

  ResidualFn res = [&](const Vec& x) {
    Vec z = x.head(nz);
    const Vec lambda_out = x.tail(dim);
    Vec r(nz + dim);
    for (int i = 0; i < nz; ++i) {
      const double saved = z[i];
      const double eps = scheme.fd_step * (1.0 + std::abs(saved));
      z[i] = saved + eps;
      const double plus = augmented(z, lambda_out);
      z[i] = saved - eps;
      const double minus = augmented(z, lambda_out);
      z[i] = saved;
      r[i] = (plus - minus) / (2.0 * eps);
    }
    const OscillatoryCurve curve = unpack(pk, z, guess);
    r.tail(dim) = oscillatory_eval(curve, 0.0).first - q_start;
    return r;
  };

  Vec start(nz + dim);
  start.head(nz) = pack(pk, guess);
  start.tail(dim) = lambda_in;
  const Vec solution = newton_solve(res, std::nullopt, start, scheme.solver);

  MultiscaleStepResult out;
  out.params = unpack(pk, Vec(solution.head(nz)), guess);
  out.lambda_out = solution.tail(dim);
  out.omega_collapsed = scheme.oscillatory && scheme.solve_omega &&
                        std::abs(out.params.omega) < scheme.omega_floor * (1.0 + std::abs(guess.omega));
  return out;
}

std::vector<MultiscaleRecord> multiscale_run(const MultiscaleScheme& scheme, const Vec& q0,
                                             const Vec& v0, double omega0, double h, int nseg) {
  const Packing pk = packing_of(scheme);
  OscillatoryCurve guess;
  guess.p = Mat::Zero(pk.deg + 1, pk.dim);
  guess.p.row(0) = q0.transpose();
  if (pk.deg >= 1) guess.p.row(1) = v0.transpose();
  guess.a0 = Vec::Zero(pk.dim);
  guess.a1 = Vec::Zero(pk.dim);
  guess.omega = omega0;

  Vec q_start = q0;
  Vec lambda_in = -scheme.system.grad_v(q0, v0);
  std::vector<MultiscaleRecord> records;
  OscillatoryCurve last = guess;
  for (int seg = 0; seg < nseg; ++seg) {
    const auto step = multiscale_step(scheme, q_start, lambda_in, guess, h);
    last = step.params;
    const auto [qa, qda] = oscillatory_eval(last, 0.0);
    records.push_back({seg * h, qa, qda,
                       scheme.system.grad_v(qa, qda).dot(qda) - scheme.system.lag(qa, qda)});
    const auto [qb, qdb] = oscillatory_eval(last, h);
    q_start = qb;
    lambda_in = step.lambda_out;

    // Shifted guess for the next segment: restart the polynomial part at the
    // segment end and advance the oscillation phase by omega h.
    guess = last;
    guess.p.setZero();
    guess.p.row(0) = qb.transpose();
    if (pk.deg >= 1) {
      // Slow velocity estimate: polynomial derivative at the segment end.
      for (int c = 0; c < pk.dim; ++c) {
        double dpoly = 0.0, pw = 1.0;
        for (int j = 1; j <= pk.deg; ++j) {
          dpoly += last.p(j, c) * j * pw;
          pw *= h;
        }
        guess.p(1, c) = dpoly;
      }
    }
    const double ch = std::cos(last.omega * h), sh = std::sin(last.omega * h);
    guess.a0 = ch * last.a0 - sh * last.a1;
    guess.a1 = sh * last.a0 + ch * last.a1;
  }
  const auto [qf, qdf] = oscillatory_eval(last, h);
  records.push_back({nseg * h, qf, qdf,
                     scheme.system.grad_v(qf, qdf).dot(qdf) - scheme.system.lag(qf, qdf)});
  return records;
}

namespace {

// Composite Simpson with subinterval length at most max_step.
double simpson(const std::function<double(double)>& fun, double lo, double hi, double max_step) {
  if (hi <= lo) return 0.0;
  const int nsub = std::max(2, static_cast<int>(std::ceil((hi - lo) / max_step)));
  const double delta = (hi - lo) / nsub;
  double sum = 0.0;
  for (int j = 0; j < nsub; ++j) {
    const double a = lo + j * delta;
    sum += (delta / 6.0) * (fun(a) + 4.0 * fun(a + 0.5 * delta) + fun(a + delta));
  }
  return sum;
}

}  // namespace

double msfem_exact_u(const MsfemProblem& prob, double x) {
  const double fine = prob.eps / 80.0;
  const double smooth = 5e-4;
  auto bigf = [&](double y) { return simpson(prob.f, 0.0, y, smooth); };
  auto inv_a = [&](double y) { return 1.0 / prob.a(y / prob.eps); };
  auto f_over_a = [&](double y) { return bigf(y) * inv_a(y); };
  const double n_x = simpson(f_over_a, 0.0, x, fine);
  const double n_1 = simpson(f_over_a, 0.0, 1.0, fine);
  const double d_x = simpson(inv_a, 0.0, x, fine);
  const double d_1 = simpson(inv_a, 0.0, 1.0, fine);
  return n_x - (n_1 / d_1) * d_x;
}

Vec msfem_solve(const MsfemProblem& prob) {
  const int nel = static_cast<int>(prob.nodes.size()) - 1;
  if (nel < 2) throw std::invalid_argument("msfem_solve: need at least two elements");
  if (prob.nodes.front() != 0.0 || prob.nodes.back() != 1.0) {
    throw std::invalid_argument("msfem_solve: nodes must span [0,1]");
  }
  const double fine = prob.eps / 80.0;

  std::vector<double> conduct(nel);  // 1 / integral of 1/a over the element
  std::vector<double> load_left(nel, 0.0), load_right(nel, 0.0);
  for (int e = 0; e < nel; ++e) {
    const double lo = prob.nodes[e], hi = prob.nodes[e + 1];
    const int nsub = std::max(2, static_cast<int>(std::ceil((hi - lo) / fine)));
    const double delta = (hi - lo) / nsub;
    auto inv_a = [&](double y) {
      const double val = prob.a(y / prob.eps);
      if (!(val > 0.0)) throw std::domain_error("msfem_solve: coefficient not positive");
      return 1.0 / val;
    };
    // Cumulative integral of 1/a at nodes and midpoints of the fine grid.
    std::vector<double> cum(nsub + 1, 0.0), cum_mid(nsub, 0.0);
    for (int j = 0; j < nsub; ++j) {
      const double a = lo + j * delta;
      const double g0 = inv_a(a), gq = inv_a(a + 0.25 * delta), gm = inv_a(a + 0.5 * delta),
                   g1 = inv_a(a + delta);
      cum_mid[j] = cum[j] + (0.5 * delta / 6.0) * (g0 + 4.0 * gq + gm);
      cum[j + 1] = cum[j] + (delta / 6.0) * (g0 + 4.0 * gm + g1);
    }
    const double total = cum[nsub];
    conduct[e] = 1.0 / total;
    // Loads: integral of f times each shape over the element; the right
    // node's shape rises as cum/total, the left node's falls as 1 - cum/total.
    double lsum = 0.0, rsum = 0.0;
    for (int j = 0; j < nsub; ++j) {
      const double a = lo + j * delta;
      const double f0 = prob.f(a), fm = prob.f(a + 0.5 * delta), f1 = prob.f(a + delta);
      const double p0 = cum[j] / total, pm = cum_mid[j] / total, p1 = cum[j + 1] / total;
      rsum += (delta / 6.0) * (f0 * p0 + 4.0 * fm * pm + f1 * p1);
      lsum += (delta / 6.0) * (f0 * (1.0 - p0) + 4.0 * fm * (1.0 - pm) + f1 * (1.0 - p1));
    }
    load_left[e] = lsum;
    load_right[e] = rsum;
  }

  // Weak form of (a u')' = f with zero boundary values:
  // sum_e conduct_e (u_{e+1}-u_e)(w_{e+1}-w_e) = -integral f w.
  const int unknowns = nel - 1;
  Mat stiff = Mat::Zero(unknowns, unknowns);
  Vec rhs = Vec::Zero(unknowns);
  for (int i = 0; i < unknowns; ++i) {
    stiff(i, i) = conduct[i] + conduct[i + 1];
    if (i + 1 < unknowns) {
      stiff(i, i + 1) = -conduct[i + 1];
      stiff(i + 1, i) = -conduct[i + 1];
    }
    rhs[i] = -(load_right[i] + load_left[i + 1]);
  }
  const Vec interior = stiff.ldlt().solve(rhs);
  Vec nodal = Vec::Zero(nel + 1);
  nodal.segment(1, unknowns) = interior;
  return nodal;
}

}  // namespace varint
