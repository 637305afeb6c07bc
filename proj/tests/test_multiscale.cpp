#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "varint/galerkin.hpp"
#include "varint/models.hpp"
#include "varint/multiscale.hpp"

using namespace varint;

namespace {

// Fine composite Simpson oracle for complex oscillatory integrands.
Cplx simpson_oracle(const std::function<Cplx(double)>& f, double lo, double hi, int nsub) {
  const double delta = (hi - lo) / nsub;
  Cplx sum{0.0, 0.0};
  for (int j = 0; j < nsub; ++j) {
    const double a = lo + j * delta;
    sum += (delta / 6.0) * (f(a) + 4.0 * f(a + 0.5 * delta) + f(a + delta));
  }
  return sum;
}

Cplx moment_oracle(double theta, int m) {
  return simpson_oracle([theta, m](double x) { return std::pow(x, m) * std::exp(Cplx(0.0, theta * x)); },
                        0.0, 1.0, 50000);
}

double cardinal_poly(const std::vector<double>& pts, int i, double x) {
  double val = 1.0;
  for (std::size_t j = 0; j < pts.size(); ++j) {
    if (static_cast<int>(j) == i) continue;
    val *= (x - pts[j]) / (pts[i] - pts[j]);
  }
  return val;
}

}  // namespace

TEST_CASE("filon moments: closed forms and quadrature oracle") {
  CHECK(std::abs(filon_moment(0.0, 0) - Cplx(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(filon_moment(M_PI, 0) - Cplx(0.0, 2.0 / M_PI)) < 1e-14);

  std::mt19937 rng(13);
  std::uniform_real_distribution<double> theta_dist(-100.0, 100.0);
  for (int trial = 0; trial < 12; ++trial) {
    const double theta = theta_dist(rng);
    for (int m = 0; m <= 8; ++m) {
      CHECK(std::abs(filon_moment(theta, m) - moment_oracle(theta, m)) < 1e-12);
    }
  }
  // Continuity across the recursion/Taylor switch.
  for (int m = 0; m <= 5; ++m) {
    CHECK(std::abs(filon_moment(0.5 - 1e-9, m) - filon_moment(0.5 + 1e-9, m)) < 1e-8);
  }
}

TEST_CASE("filon weights: theta=0 reduction, partition sum, oracle") {
  for (int npts : {2, 3, 4, 5}) {
    const auto rule = lobatto_rule(npts);
    const CVec w = filon_weights(rule.points, 0.0);
    for (int i = 0; i < npts; ++i) {
      CHECK(std::abs(w[i] - Cplx(rule.weights[i], 0.0)) < 1e-13);
    }
  }

  std::mt19937 rng(29);
  std::uniform_real_distribution<double> theta_dist(-60.0, 60.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int npts = 2 + trial % 4;
    const auto rule = lobatto_rule(npts);
    const double theta = theta_dist(rng);
    const CVec w = filon_weights(rule.points, theta);
    Cplx sum{0.0, 0.0};
    for (int i = 0; i < npts; ++i) sum += w[i];
    CHECK(std::abs(sum - filon_moment(theta, 0)) < 1e-13);
    for (int i = 0; i < npts; ++i) {
      const Cplx direct = simpson_oracle(
          [&](double x) { return cardinal_poly(rule.points, i, x) * std::exp(Cplx(0.0, theta * x)); },
          0.0, 1.0, 50000);
      CHECK(std::abs(w[i] - direct) < 1e-11);
    }
  }

  const auto three = lobatto_rule(3);
  const CVec w10 = filon_weights(three.points, 10.0);
  for (int i = 0; i < 3; ++i) {
    const Cplx direct = simpson_oracle(
        [&](double x) { return cardinal_poly(three.points, i, x) * std::exp(Cplx(0.0, 10.0 * x)); },
        0.0, 1.0, 50000);
    CHECK(std::abs(w10[i] - direct) < 1e-12);
  }
}

TEST_CASE("filon integrate: constant exact, polynomial exactness, error slope") {
  const auto three = lobatto_rule(3);
  const double omega = 7.0, h = 0.8;
  const Cplx exact_const = (std::exp(Cplx(0.0, omega * h)) - 1.0) / Cplx(0.0, omega);
  CHECK(std::abs(filon_integrate(std::function<double(double)>([](double) { return 1.0; }), omega,
                                 h, three.points) -
                 exact_const) < 1e-13);

  // omega = 0: plain Lobatto exactness up to degree 2 nu - 3 = 3.
  const Cplx cubic = filon_integrate(
      std::function<double(double)>([](double x) { return x * x * x - 0.4 * x; }), 0.0, 1.0,
      three.points);
  CHECK(std::abs(cubic - Cplx(0.25 - 0.2, 0.0)) < 1e-13);

  // The rule interpolates f, so any f of degree < nu is integrated exactly
  // for every frequency.
  const Cplx linear = filon_integrate(std::function<double(double)>([](double x) { return x; }),
                                      50.0, 1.0, three.points);
  const Cplx linear_exact =
      simpson_oracle([](double x) { return x * std::exp(Cplx(0.0, 50.0 * x)); }, 0.0, 1.0, 50000);
  CHECK(std::abs(linear - linear_exact) < 1e-12);

  // f = sin x at omega = 200: halving h divides the error by about
  // 2^(nu - 1) = 4 in the regime h omega >> 1 with endpoint nodes.
  const double big_omega = 200.0;
  std::vector<double> errs;
  for (int level = 0; level < 3; ++level) {
    const double hh = 0.4 / (1 << level);
    const Cplx approx = filon_integrate(
        std::function<double(double)>([](double x) { return std::sin(x); }), big_omega, hh,
        three.points);
    const Cplx exact = simpson_oracle(
        [&](double x) { return std::sin(x) * std::exp(Cplx(0.0, big_omega * x)); }, 0.0, hh, 50000);
    errs.push_back(std::abs(approx - exact));
  }
  const double slope = 0.5 * (std::log2(errs[0] / errs[1]) + std::log2(errs[1] / errs[2]));
  CHECK(slope == doctest::Approx(2.0).epsilon(0.35));
}

TEST_CASE("oscillatory eval: polynomial limit, hand value, FD oracle") {
  OscillatoryCurve poly;
  poly.p = Mat(3, 1);
  poly.p << 1.0, -2.0, 0.5;
  poly.omega = 0.0;
  poly.a0 = Vec::Zero(1);
  poly.a1 = Vec::Zero(1);
  const auto [pq, pqd] = oscillatory_eval(poly, 0.7);
  CHECK(pq[0] == doctest::Approx(1.0 - 1.4 + 0.5 * 0.49).epsilon(1e-13));
  CHECK(pqd[0] == doctest::Approx(-2.0 + 0.7).epsilon(1e-13));

  OscillatoryCurve c;
  c.p = Mat::Ones(1, 1);
  c.omega = 100.0;
  c.a0 = Vec::Zero(1);
  c.a1 = Vec(1);
  c.a1 << 0.5;
  const auto [q0, qd0] = oscillatory_eval(c, 0.0);
  CHECK(q0[0] == doctest::Approx(1.5).epsilon(1e-13));
  CHECK(qd0[0] == doctest::Approx(0.0).epsilon(1e-13));

  std::mt19937 rng(41);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  OscillatoryCurve rc;
  rc.p = Mat(3, 2);
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 2; ++k) rc.p(j, k) = unif(rng);
  rc.omega = 30.0;
  rc.a0 = Vec(2);
  rc.a1 = Vec(2);
  rc.a0 << unif(rng), unif(rng);
  rc.a1 << unif(rng), unif(rng);
  const double t = 0.37, step = 1e-6;
  const auto [q, qd] = oscillatory_eval(rc, t);
  (void)q;
  const Vec fd = (oscillatory_eval(rc, t + step).first - oscillatory_eval(rc, t - step).first) /
                 (2.0 * step);
  CHECK((qd - fd).lpNorm<Eigen::Infinity>() < 1e-5);
}

TEST_CASE("stiff pendulum lagrangian: hand values, partials, timescales") {
  StiffPendulum sys;
  auto lsys = pendulum_lagrangian(sys);
  Vec rest = Vec::Zero(2), vrest = Vec::Zero(2);
  CHECK(lsys.lag(rest, vrest) == doctest::Approx(sys.m * sys.g * sys.l).epsilon(1e-13));

  Vec q(2), v(2);
  q << 0.03, 0.0;
  v << 0.4, 0.0;
  const double expected = 0.5 * sys.m * v[0] * v[0] - 0.5 * sys.k * q[0] * q[0] +
                          sys.m * sys.g * (sys.l + q[0]);
  CHECK(lsys.lag(q, v) == doctest::Approx(expected).epsilon(1e-12));

  CHECK(sys.fast_frequency() == doctest::Approx(100.0));
  CHECK(sys.epsilon() == doctest::Approx(std::sqrt(9.81 / 10000.0)).epsilon(1e-12));

  // Analytic partials against finite differences of the Lagrangian.
  q << 0.02, 0.6;
  v << -0.3, 0.8;
  const double eps = 1e-6;
  for (int i = 0; i < 2; ++i) {
    Vec qp = q, qm = q, vp = v, vm = v;
    qp[i] += eps;
    qm[i] -= eps;
    vp[i] += eps;
    vm[i] -= eps;
    CHECK(lsys.dLdq(q, v)[i] ==
          doctest::Approx((lsys.lag(qp, v) - lsys.lag(qm, v)) / (2.0 * eps)).epsilon(1e-6));
    CHECK(lsys.dLdv(q, v)[i] ==
          doctest::Approx((lsys.lag(q, vp) - lsys.lag(q, vm)) / (2.0 * eps)).epsilon(1e-6));
  }
}

TEST_CASE("frequency estimation: synthetic tone, resolved pendulum, flat signal") {
  const double dt = 0.002;
  std::vector<double> tone;
  for (int j = 0; j < 700; ++j) tone.push_back(std::cos(100.0 * j * dt) + 0.3);
  CHECK(estimate_frequency_from_samples(tone, dt) == doctest::Approx(100.0).epsilon(0.005));

  StiffPendulum sys;
  Vec state0(4);
  state0 << 0.01, 0.5, 0.0, 0.0;
  const double dt_fine = (2.0 * M_PI / 100.0) / 50.0;
  const double omega = estimate_fast_frequency(sys, state0, 0.7, dt_fine);
  CHECK(omega == doctest::Approx(100.0).epsilon(0.02));

  std::vector<double> flat(256, 1.7);
  CHECK_THROWS_AS(estimate_frequency_from_samples(flat, dt), SolverError);
}

TEST_CASE("multiscale step without the oscillatory space reduces to the Galerkin DEL") {
  auto sys = models::harmonic_oscillator();
  auto scheme = make_multiscale(sys, 2, 3);
  scheme.oscillatory = false;
  const double h = 0.1;
  Vec q0(1), v0(1);
  q0 << 1.0;
  v0 << 0.0;
  const auto records = multiscale_run(scheme, q0, v0, 0.0, h, 5);
  REQUIRE(records.size() == 6);
  CHECK(records[0].q[0] == doctest::Approx(1.0).epsilon(1e-10));

  auto gal = make_galerkin(sys, 2);
  const auto traj = integrate(gal, records[0].q, records[1].q, h, 4);
  for (int k = 2; k <= 5; ++k) {
    CHECK(std::abs(records[k].q[0] - traj.states[k][0]) < 1e-7);
  }
}

TEST_CASE("free particle: oscillatory amplitudes vanish, polynomial part linear") {
  auto scheme = make_multiscale(models::free_particle(1), 1, 3);
  scheme.solve_omega = false;
  OscillatoryCurve guess;
  guess.p = Mat(2, 1);
  guess.p << 0.3, 0.7;
  guess.omega = 50.0;
  guess.a0 = Vec(1);
  guess.a1 = Vec(1);
  guess.a0 << 0.05;
  guess.a1 << -0.04;
  Vec q0(1), lam(1);
  q0 << 0.3;
  lam << -0.7;  // minus the initial momentum
  const auto step = multiscale_step(scheme, q0, lam, guess, 0.4);
  CHECK(std::abs(step.params.a0[0]) < 1e-8);
  CHECK(std::abs(step.params.a1[0]) < 1e-8);
  CHECK(step.params.p(1, 0) == doctest::Approx(0.7).epsilon(1e-7));
  const auto [qh, qdh] = oscillatory_eval(step.params, 0.4);
  (void)qdh;
  CHECK(qh[0] == doctest::Approx(0.3 + 0.7 * 0.4).epsilon(1e-7));
  CHECK_FALSE(step.omega_collapsed);
}

TEST_CASE("stiff pendulum: multiscale trajectory tracks the resolved reference") {
  StiffPendulum sys;
  auto lsys = pendulum_lagrangian(sys);
  auto scheme = make_multiscale(lsys, 1, 3);
  scheme.solver.tol = 1e-9;
  scheme.solver.max_iter = 80;
  // The fast frequency enters as data, estimated from a short resolved run.
  // Solving for it jointly makes the segment equations badly conditioned.
  scheme.solve_omega = false;

  Vec q0(2), v0(2);
  q0 << 0.01, 0.5;
  v0 << 0.0, 0.0;
  Vec state0_est(4);
  state0_est << q0[0], q0[1], 0.0, 0.0;
  const double fast_period = 2.0 * M_PI / sys.fast_frequency();
  const double omega =
      estimate_fast_frequency(sys, state0_est, 40.0 * fast_period, fast_period / 40.0);
  CHECK(omega == doctest::Approx(sys.fast_frequency()).epsilon(0.01));
  const double h = 2.0 * (2.0 * M_PI / omega);  // two fast periods per segment
  const int nseg = 5;
  const auto records = multiscale_run(scheme, q0, v0, omega, h, nseg);

  Vec state0(4);
  state0 << q0[0], q0[1], 0.0, 0.0;
  const double dt_fine = (2.0 * M_PI / omega) / 50.0;
  const auto ref = pendulum_resolve(sys, state0, nseg * h + dt_fine, dt_fine);

  const double theta_amp = 0.5;
  for (const auto& rec : records) {
    const auto idx = static_cast<std::size_t>(std::round(rec.t / dt_fine));
    REQUIRE(idx < ref.size());
    CHECK(std::abs(rec.q[1] - ref[idx][1]) < 0.05 * theta_amp);
  }

  // Energy sanity: within 10 percent of the initial energy.
  const double e0 = records.front().energy;
  for (const auto& rec : records) {
    CHECK(std::abs(rec.energy - e0) < 0.1 * std::abs(e0));
  }
}

TEST_CASE("msfem exact solution: boundary values and constant-coefficient form") {
  MsfemProblem prob;
  prob.a = [](double) { return 1.0; };
  prob.f = [](double) { return 1.0; };
  prob.eps = 0.1;
  CHECK(std::abs(msfem_exact_u(prob, 0.0)) < 1e-12);
  CHECK(std::abs(msfem_exact_u(prob, 1.0)) < 1e-10);
  for (double x : {0.25, 0.5, 0.9}) {
    CHECK(msfem_exact_u(prob, x) == doctest::Approx((x * x - x) / 2.0).epsilon(1e-9));
  }
}

TEST_CASE("msfem exact solution: oscillatory coefficient vs finite difference oracle") {
  MsfemProblem prob;
  prob.a = [](double y) { return 10.0 / (1.0 + 0.95 * std::sin(2.0 * M_PI * y)); };
  prob.f = [](double x) { return x * x; };
  prob.eps = 0.025;

  // Fine conservative finite differences for (a u')' = f on a grid that
  // resolves eps: flux continuity with harmonic-mean-free exact edge values.
  const int n = 16000;
  const double hgrid = 1.0 / n;
  std::vector<double> edge_a(n);
  for (int j = 0; j < n; ++j) {
    const double xm = (j + 0.5) * hgrid;
    edge_a[j] = prob.a(xm / prob.eps);
  }
  Eigen::VectorXd diag(n - 1), off(n - 2), rhs(n - 1);
  for (int j = 0; j < n - 1; ++j) {
    diag[j] = (edge_a[j] + edge_a[j + 1]) / (hgrid * hgrid);
    if (j < n - 2) off[j] = -edge_a[j + 1] / (hgrid * hgrid);
    rhs[j] = -prob.f((j + 1) * hgrid);
  }
  // Thomas solve of the tridiagonal system.
  std::vector<double> c(n - 1), dd(n - 1);
  c[0] = off.size() ? off[0] / diag[0] : 0.0;
  dd[0] = rhs[0] / diag[0];
  for (int j = 1; j < n - 1; ++j) {
    const double denom = diag[j] - off[j - 1] * c[j - 1];
    if (j < n - 2) c[j] = off[j] / denom;
    dd[j] = (rhs[j] - off[j - 1] * dd[j - 1]) / denom;
  }
  std::vector<double> u(n - 1);
  u[n - 2] = dd[n - 2];
  for (int j = n - 3; j >= 0; --j) u[j] = dd[j] - c[j] * u[j + 1];

  for (double x : {0.25, 0.5, 0.75}) {
    const int j = static_cast<int>(std::round(x / hgrid)) - 1;
    CHECK(std::abs(msfem_exact_u(prob, x) - u[j]) < 1e-4);
  }
}

TEST_CASE("msfem solve: constant coefficients, nodal exactness, two elements") {
  MsfemProblem prob;
  prob.a = [](double) { return 1.0; };
  prob.f = [](double) { return 1.0; };
  prob.eps = 0.1;
  prob.nodes = {0.0, 0.2, 0.45, 0.7, 1.0};
  const Vec nodal = msfem_solve(prob);
  for (int i = 0; i < nodal.size(); ++i) {
    const double x = prob.nodes[i];
    CHECK(nodal[i] == doctest::Approx((x * x - x) / 2.0).epsilon(1e-8));
  }

  MsfemProblem paper;
  paper.a = [](double y) { return 10.0 / (1.0 + 0.95 * std::sin(2.0 * M_PI * y)); };
  paper.f = [](double x) { return x * x; };
  paper.eps = 0.025;
  for (int i = 0; i <= 8; ++i) paper.nodes.push_back(i / 8.0);
  const Vec vals = msfem_solve(paper);
  for (int i = 0; i <= 8; ++i) {
    CHECK(std::abs(vals[i] - msfem_exact_u(paper, paper.nodes[i])) < 1e-6);
  }

  // Two elements: single interior unknown with a closed-form value.
  MsfemProblem two;
  two.a = [](double) { return 2.0; };
  two.f = [](double) { return 1.0; };
  two.eps = 0.5;
  two.nodes = {0.0, 0.5, 1.0};
  const Vec pair = msfem_solve(two);
  // (2 u')' = 1 gives u = (x^2 - x)/4; the method is nodally exact.
  CHECK(pair[1] == doctest::Approx(-1.0 / 16.0).epsilon(1e-10));
}
