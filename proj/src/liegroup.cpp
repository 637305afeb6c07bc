#include "varint/liegroup.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace varint {

Mat MatrixGroupSpec::hat(const Vec& x) const {
  if (x.size() != d) throw std::invalid_argument("hat: coordinate size mismatch");
  Mat m = Mat::Zero(n, n);
  for (int i = 0; i < d; ++i) m += x[i] * basis[i];
  return m;
}

Vec MatrixGroupSpec::vee(const Mat& m) const {
  if (m.rows() != n || m.cols() != n) throw std::invalid_argument("vee: matrix size mismatch");
  return vee_pinv * Eigen::Map<const Vec>(m.data(), n * n);
}

Mat MatrixGroupSpec::ad_matrix(const Vec& xi) const {
  const Mat xh = hat(xi);
  Mat a(d, d);
  for (int j = 0; j < d; ++j) a.col(j) = vee(bracket(xh, basis[j]));
  return a;
}

Mat MatrixGroupSpec::Ad_matrix(const Mat& g) const {
  const Mat gi = g.partialPivLu().inverse();
  Mat a(d, d);
  for (int j = 0; j < d; ++j) a.col(j) = vee(g * basis[j] * gi);
  return a;
}

Mat matrix_exp(const Mat& a) { return a.exp(); }
Mat matrix_log(const Mat& a) { return a.log(); }

void finalize_group(MatrixGroupSpec& spec) {
  if (spec.n <= 0 || spec.d <= 0 || static_cast<int>(spec.basis.size()) != spec.d) {
    throw std::invalid_argument("finalize_group: inconsistent sizes");
  }
  Mat b(spec.n * spec.n, spec.d);
  for (int j = 0; j < spec.d; ++j) {
    b.col(j) = Eigen::Map<const Vec>(spec.basis[j].data(), spec.n * spec.n);
  }
  spec.vee_pinv = b.completeOrthogonalDecomposition().pseudoInverse();
  if (!spec.exp) spec.exp = matrix_exp;
  if (!spec.log) spec.log = matrix_log;
}

MatrixGroupSpec so3() {
  MatrixGroupSpec spec;
  spec.n = 3;
  spec.d = 3;
  Mat ex = Mat::Zero(3, 3), ey = Mat::Zero(3, 3), ez = Mat::Zero(3, 3);
  ex(1, 2) = -1.0;
  ex(2, 1) = 1.0;
  ey(0, 2) = 1.0;
  ey(2, 0) = -1.0;
  ez(0, 1) = -1.0;
  ez(1, 0) = 1.0;
  spec.basis = {ex, ey, ez};
  spec.exp = [](const Mat& w) {
    const double theta = std::sqrt(0.5 * (w.transpose() * w).trace());
    const Mat eye = Mat::Identity(3, 3);
    if (theta < 1e-8) {
      return Mat(eye + w + 0.5 * w * w);
    }
    const double a = std::sin(theta) / theta;
    const double b = (1.0 - std::cos(theta)) / (theta * theta);
    return Mat(eye + a * w + b * w * w);
  };
  spec.log = [](const Mat& r) {
    const double c = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
    const double theta = std::acos(c);
    const Mat skew = 0.5 * (r - r.transpose());
    if (theta < 1e-8) return Mat(skew);
    if (M_PI - theta < 1e-6) {
      throw std::domain_error("so3 log: rotation too close to the injectivity radius");
    }
    return Mat((theta / std::sin(theta)) * skew);
  };
  finalize_group(spec);
  return spec;
}

MatrixGroupSpec rn(int k) {
  if (k <= 0) throw std::invalid_argument("rn: dimension must be positive");
  MatrixGroupSpec spec;
  spec.n = k + 1;
  spec.d = k;
  for (int i = 0; i < k; ++i) {
    Mat e = Mat::Zero(k + 1, k + 1);
    e(i, k) = 1.0;
    spec.basis.push_back(e);
  }
  spec.exp = [](const Mat& x) { return Mat(Mat::Identity(x.rows(), x.cols()) + x); };
  spec.log = [](const Mat& g) { return Mat(g - Mat::Identity(g.rows(), g.cols())); };
  finalize_group(spec);
  return spec;
}

Vec group_chart(const MatrixGroupSpec& spec, const Mat& g0, const Mat& g) {
  return spec.vee(spec.log(g0.partialPivLu().solve(g)));
}

Mat group_chart_inv(const MatrixGroupSpec& spec, const Mat& g0, const Vec& xi) {
  return g0 * spec.exp(spec.hat(xi));
}

namespace {

// Shared series driver: contribution of ad_xi^n(eta) weighted by coef(n).
Vec ad_series(const MatrixGroupSpec& spec, const Vec& xi, const Vec& eta,
              const std::function<double(int)>& coef, double tol) {
  const Mat a = spec.ad_matrix(xi);
  Vec power = eta;  // ad^n(eta)
  Vec result = coef(0) * power;
  for (int n = 1; n <= 80; ++n) {
    power = a * power;
    const Vec term = coef(n) * power;
    result += term;
    if (term.norm() < tol * (1.0 + result.norm())) break;
  }
  return result;
}

}  // namespace

Vec dexp_apply(const MatrixGroupSpec& spec, const Vec& xi, const Vec& eta, double tol) {
  double fact = 1.0;  // (n+1)! running
  return ad_series(
      spec, xi, eta,
      [&fact](int n) {
        fact *= (n + 1);
        return 1.0 / fact;
      },
      tol);
}

Vec ddexp_apply(const MatrixGroupSpec& spec, const Vec& xi, const Vec& eta, double tol) {
  double fact = 2.0;  // (n+2)! running
  return ad_series(
      spec, xi, eta,
      [&fact](int n) {
        if (n > 0) fact *= (n + 2);
        return 1.0 / fact;
      },
      tol);
}

Vec dexp_param_deriv(const MatrixGroupSpec& spec, const Vec& xi, const Vec& dxi, const Vec& u,
                     double tol) {
  const Mat a = spec.ad_matrix(xi);
  const Mat b = spec.ad_matrix(dxi);
  // S_n = sum_{k=0}^{n-1} a^k b a^{n-1-k} u with S_n = a S_{n-1} + b w_{n-1},
  // w_n = a^n u. The n-th series term is S_n / (n+1)!.
  Vec w = u;
  Vec s = Vec::Zero(u.size());
  Vec result = Vec::Zero(u.size());
  double fact = 1.0;
  for (int n = 1; n <= 80; ++n) {
    s = a * s + b * w;
    w = a * w;
    fact *= (n + 1);
    const Vec term = s / fact;
    result += term;
    if (term.norm() < tol * (1.0 + result.norm()) && n > 2) break;
  }
  return result;
}

std::pair<Vec, Vec> lie_interpolant(const ControlTimes& times, const std::vector<Vec>& controls,
                                    double tau) {
  if (static_cast<int>(controls.size()) != times.count()) {
    throw std::invalid_argument("lie_interpolant: control count mismatch");
  }
  Vec xi = Vec::Zero(controls.front().size());
  Vec dxi = Vec::Zero(controls.front().size());
  for (int nu = 0; nu < times.count(); ++nu) {
    xi += cardinal_basis(times, nu, tau) * controls[nu];
    dxi += cardinal_basis_deriv(times, nu, tau) * controls[nu];
  }
  return {xi, dxi};
}

LieGalerkinScheme make_lie_galerkin(MatrixGroupSpec group,
                                    std::function<double(const Mat&, const Mat&)> lag, int s,
                                    SolverConfig solver) {
  if (s < 1) throw std::invalid_argument("make_lie_galerkin: order must be at least 1");
  const auto rule = lobatto_rule(s + 1);
  LieGalerkinScheme scheme;
  scheme.group = std::move(group);
  scheme.lag = std::move(lag);
  scheme.times = ControlTimes(rule.points);
  scheme.quad = rule;
  scheme.solver = solver;
  return scheme;
}

namespace {

void check_controls(const LieGalerkinScheme& scheme, const std::vector<Vec>& controls, double h) {
  if (static_cast<int>(controls.size()) != scheme.times.count()) {
    throw std::invalid_argument("liegroup: control count mismatch");
  }
  if (!(h > 0.0)) throw std::invalid_argument("liegroup: h must be positive");
  if (controls.front().lpNorm<Eigen::Infinity>() != 0.0) {
    throw std::invalid_argument("liegroup: xi^0 must be zero");
  }
}

std::vector<Vec> assemble_controls(const LieGalerkinScheme& scheme, const Vec& internal,
                                   const Vec& xi_s) {
  const int s = scheme.order();
  const int d = scheme.group.d;
  std::vector<Vec> controls(s + 1);
  controls[0] = Vec::Zero(d);
  for (int nu = 1; nu < s; ++nu) controls[nu] = internal.segment((nu - 1) * d, d);
  controls[s] = xi_s;
  return controls;
}

}  // namespace

double lie_segment_action(const LieGalerkinScheme& scheme, const Mat& g0,
                          const std::vector<Vec>& controls, double h) {
  check_controls(scheme, controls, h);
  double sum = 0.0;
  for (int i = 0; i < scheme.quad.size(); ++i) {
    const auto [xi, dxi_tau] = lie_interpolant(scheme.times, controls, scheme.quad.points[i]);
    const Vec xidot = dxi_tau / h;
    const Vec nu = dexp_apply(scheme.group, Vec(-xi), xidot, scheme.series_tol);
    const Mat g = g0 * scheme.group.exp(scheme.group.hat(xi));
    const Mat gdot = g * scheme.group.hat(nu);
    sum += scheme.quad.weights[i] * scheme.lag(g, gdot);
  }
  return h * sum;
}

Vec lie_internal_residual(const LieGalerkinScheme& scheme, const Mat& g0,
                          const std::vector<Vec>& controls, double h) {
  check_controls(scheme, controls, h);
  const int s = scheme.order();
  const int d = scheme.group.d;
  Vec grad((s - 1) * d);
  std::vector<Vec> work = controls;
  for (int nu = 1; nu < s; ++nu) {
    for (int a = 0; a < d; ++a) {
      const double saved = work[nu][a];
      const double eps = scheme.fd_step * (1.0 + std::abs(saved));
      work[nu][a] = saved + eps;
      const double plus = lie_segment_action(scheme, g0, work, h);
      work[nu][a] = saved - eps;
      const double minus = lie_segment_action(scheme, g0, work, h);
      work[nu][a] = saved;
      grad[(nu - 1) * d + a] = (plus - minus) / (2.0 * eps);
    }
  }
  return grad;
}

std::vector<Vec> solve_lie_internal(const LieGalerkinScheme& scheme, const Mat& g0, const Vec& xi_s,
                                    double h) {
  const int s = scheme.order();
  const int d = scheme.group.d;
  if (xi_s.size() != d) throw std::invalid_argument("solve_lie_internal: xi_s size mismatch");
  if (s == 1) return {Vec(Vec::Zero(d)), xi_s};

  ResidualFn res = [&](const Vec& internal) {
    return lie_internal_residual(scheme, g0, assemble_controls(scheme, internal, xi_s), h);
  };
  Vec guess((s - 1) * d);
  for (int nu = 1; nu < s; ++nu) guess.segment((nu - 1) * d, d) = scheme.times.node(nu) * xi_s;
  const Vec internal = newton_solve(res, std::nullopt, guess, scheme.solver);
  return assemble_controls(scheme, internal, xi_s);
}

double lie_discrete_lagrangian(const LieGalerkinScheme& scheme, const Mat& g0, const Mat& g1,
                               double h) {
  const Vec xi_s = group_chart(scheme.group, g0, g1);
  return lie_segment_action(scheme, g0, solve_lie_internal(scheme, g0, xi_s, h), h);
}

Vec lie_d1(const LieGalerkinScheme& scheme, const Mat& g0, const Mat& g1, double h) {
  const int d = scheme.group.d;
  Vec grad(d);
  for (int a = 0; a < d; ++a) {
    const double eps = scheme.fd_step;
    Vec dir = Vec::Zero(d);
    dir[a] = eps;
    const Mat step = scheme.group.exp(scheme.group.hat(dir));
    const double plus = lie_discrete_lagrangian(scheme, g0 * step, g1, h);
    const double minus = lie_discrete_lagrangian(scheme, Mat(g0 * step.partialPivLu().inverse()),
                                                 g1, h);
    grad[a] = (plus - minus) / (2.0 * eps);
  }
  return grad;
}

Vec lie_d2(const LieGalerkinScheme& scheme, const Mat& g0, const Mat& g1, double h) {
  const int d = scheme.group.d;
  Vec grad(d);
  for (int a = 0; a < d; ++a) {
    const double eps = scheme.fd_step;
    Vec dir = Vec::Zero(d);
    dir[a] = eps;
    const Mat step = scheme.group.exp(scheme.group.hat(dir));
    const double plus = lie_discrete_lagrangian(scheme, g0, g1 * step, h);
    const double minus = lie_discrete_lagrangian(scheme, g0, Mat(g1 * step.partialPivLu().inverse()),
                                                 h);
    grad[a] = (plus - minus) / (2.0 * eps);
  }
  return grad;
}

Mat lie_del_step(const LieGalerkinScheme& scheme, const Mat& g0, const Mat& g1, double h) {
  const Vec p = lie_d2(scheme, g0, g1, h);
  ResidualFn res = [&](const Vec& x) {
    const Mat g2 = group_chart_inv(scheme.group, g1, x);
    return Vec(p + lie_d1(scheme, g1, g2, h));
  };
  // Constant-velocity extrapolation: g2 = g1 (g0^{-1} g1).
  const Vec guess = group_chart(scheme.group, g0, g1);
  const Vec x = newton_solve(res, std::nullopt, guess, scheme.solver);
  return group_chart_inv(scheme.group, g1, x);
}

namespace {

LieGalerkinScheme reduced_as_full(const LieGalerkinScheme& scheme) {
  if (!scheme.reduced_lag) {
    throw std::invalid_argument("liegroup: reduced_lag is not set");
  }
  LieGalerkinScheme full = scheme;
  const MatrixGroupSpec group = scheme.group;
  const auto l = scheme.reduced_lag;
  full.lag = [group, l](const Mat& g, const Mat& gdot) {
    return l(group.vee(g.partialPivLu().solve(gdot)));
  };
  return full;
}

}  // namespace

double reduced_discrete_lagrangian(const LieGalerkinScheme& scheme, const Mat& f, double h) {
  const LieGalerkinScheme full = reduced_as_full(scheme);
  const Mat eye = Mat::Identity(scheme.group.n, scheme.group.n);
  return lie_discrete_lagrangian(full, eye, f, h);
}

Vec reduced_momentum(const LieGalerkinScheme& scheme, const Mat& f, double h) {
  const LieGalerkinScheme full = reduced_as_full(scheme);
  const Mat eye = Mat::Identity(scheme.group.n, scheme.group.n);
  return lie_d2(full, eye, f, h);
}

Mat dep_step(const LieGalerkinScheme& scheme, const Mat& f_prev, double h) {
  const Vec mu_prev = reduced_momentum(scheme, f_prev, h);
  ResidualFn res = [&](const Vec& x) {
    const Mat f_next = f_prev * scheme.group.exp(scheme.group.hat(x));
    const Vec mu_next = reduced_momentum(scheme, f_next, h);
    const Mat ad = scheme.group.Ad_matrix(Mat(f_next.partialPivLu().inverse()));
    return Vec(mu_prev - ad.transpose() * mu_next);
  };
  const Vec x = newton_solve(res, std::nullopt, Vec(Vec::Zero(scheme.group.d)), scheme.solver);
  return f_prev * scheme.group.exp(scheme.group.hat(x));
}

std::vector<Mat> reconstruct(const Mat& g0, const std::vector<Mat>& fs) {
  std::vector<Mat> traj{g0};
  for (const Mat& f : fs) traj.push_back(traj.back() * f);
  return traj;
}

}  // namespace varint
