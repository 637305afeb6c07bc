#include "varint/numcore.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace varint {

void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite entries");
  }
}

Vec LagrangianSystem::grad_q(const Vec& q, const Vec& v) const {
  if (dLdq) return dLdq(q, v);
  Vec g(dim);
  Vec qp = q;
  for (int i = 0; i < dim; ++i) {
    const double h = fd_step * (1.0 + std::abs(q[i]));
    qp[i] = q[i] + h;
    const double fp = lag(qp, v);
    qp[i] = q[i] - h;
    const double fm = lag(qp, v);
    qp[i] = q[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Vec LagrangianSystem::grad_v(const Vec& q, const Vec& v) const {
  if (dLdv) return dLdv(q, v);
  Vec g(dim);
  Vec vp = v;
  for (int i = 0; i < dim; ++i) {
    const double h = fd_step * (1.0 + std::abs(v[i]));
    vp[i] = v[i] + h;
    const double fp = lag(q, vp);
    vp[i] = v[i] - h;
    const double fm = lag(q, vp);
    vp[i] = v[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

ControlTimes::ControlTimes(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 2) throw std::invalid_argument("ControlTimes: need at least two nodes");
  if (nodes_.front() != 0.0 || nodes_.back() != 1.0) {
    throw std::invalid_argument("ControlTimes: endpoints must be exactly 0 and 1");
  }
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (!(nodes_[i] > nodes_[i - 1])) {
      throw std::invalid_argument("ControlTimes: nodes must be strictly increasing");
    }
  }
  bary_.assign(nodes_.size(), 1.0);
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
      if (k != j) bary_[j] /= (nodes_[j] - nodes_[k]);
    }
  }
}

double cardinal_basis(const ControlTimes& times, int nu, double tau) {
  const int n = times.count();
  if (nu < 0 || nu >= n) throw std::out_of_range("cardinal_basis: node index out of range");
  // Exact hit on a node.
  for (int k = 0; k < n; ++k) {
    if (tau == times.node(k)) return k == nu ? 1.0 : 0.0;
  }
  // Barycentric form, first kind: l_nu(tau) = w_nu/(tau-d_nu) * prod(tau-d_k).
  double prod = 1.0;
  for (int k = 0; k < n; ++k) prod *= (tau - times.node(k));
  return prod * times.bary_weight(nu) / (tau - times.node(nu));
}

double cardinal_basis_deriv(const ControlTimes& times, int nu, double tau) {
  const int n = times.count();
  if (nu < 0 || nu >= n) throw std::out_of_range("cardinal_basis_deriv: node index out of range");
  // l_nu(tau) = w_nu * prod_{k != nu} (tau - d_k); differentiate the product.
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    if (j == nu) continue;
    double term = 1.0;
    for (int k = 0; k < n; ++k) {
      if (k == nu || k == j) continue;
      term *= (tau - times.node(k));
    }
    sum += term;
  }
  return sum * times.bary_weight(nu);
}

QuadratureRule lobatto_rule(int npoints) {
  if (npoints < 2) throw std::invalid_argument("lobatto_rule: npoints must be >= 2");
  const int n = npoints - 1;  // Legendre degree
  // Interior nodes are roots of P'_n on [-1, 1], found by Newton iteration
  // from Chebyshev-like starting values.
  std::vector<double> x(npoints);
  x[0] = -1.0;
  x[npoints - 1] = 1.0;
  auto legendre = [n](double t) {
    // Returns (P_n(t), P'_n(t), P''_n(t)).
    double p0 = 1.0, p1 = t;
    if (n == 0) return std::array<double, 3>{1.0, 0.0, 0.0};
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double dp = n * (t * p1 - p0) / (t * t - 1.0);
    const double ddp = (2.0 * t * dp - n * (n + 1) * p1) / (1.0 - t * t);
    return std::array<double, 3>{p1, dp, ddp};
  };
  for (int i = 1; i < npoints - 1; ++i) {
    double t = std::cos(M_PI * (1.0 - static_cast<double>(i) / n));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp, ddp] = legendre(t);
      (void)p;
      const double delta = dp / ddp;
      t -= delta;
      if (std::abs(delta) < 1e-14) break;
    }
    x[i] = t;
  }
  QuadratureRule rule;
  rule.points.resize(npoints);
  rule.weights.resize(npoints);
  for (int i = 0; i < npoints; ++i) {
    const double pn = legendre(x[i])[0];
    const double w = 2.0 / (n * (n + 1) * pn * pn);
    rule.points[i] = 0.5 * (x[i] + 1.0);  // map [-1,1] -> [0,1]
    rule.weights[i] = 0.5 * w;
  }
  return rule;
}

Mat fd_jacobian(const ResidualFn& residual, const Vec& point, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("fd_jacobian: step must be positive");
  const Vec r0 = residual(point);
  Mat jac(r0.size(), point.size());
  Vec x = point;
  for (int j = 0; j < point.size(); ++j) {
    const double h = step * (1.0 + std::abs(point[j]));
    x[j] = point[j] + h;
    const Vec rp = residual(x);
    x[j] = point[j] - h;
    const Vec rm = residual(x);
    x[j] = point[j];
    jac.col(j) = (rp - rm) / (2.0 * h);
  }
  return jac;
}

Vec newton_solve(const ResidualFn& residual, const std::optional<JacobianFn>& jacobian,
                 const Vec& guess, const SolverConfig& cfg) {
  Vec x = guess;
  Vec r = residual(x);
  if (r.size() != x.size()) {
    throw std::invalid_argument("newton_solve: residual dimension does not match guess");
  }
  double rnorm = r.lpNorm<Eigen::Infinity>();
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    if (rnorm <= cfg.tol) return x;
    const Mat jac = jacobian ? (*jacobian)(x) : fd_jacobian(residual, x, cfg.fd_step);
    Eigen::FullPivLU<Mat> lu(jac);
    if (!lu.isInvertible()) throw SingularJacobianError(rnorm);
    const Vec dx = lu.solve(-r);
    // Backtrack until the residual norm decreases.
    double alpha = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 30; ++halving) {
      const Vec xt = x + alpha * dx;
      const Vec rt = residual(xt);
      const double rtn = rt.lpNorm<Eigen::Infinity>();
      if (rtn < rnorm || rtn <= cfg.tol) {
        x = xt;
        r = rt;
        rnorm = rtn;
        accepted = true;
        break;
      }
      alpha *= cfg.damping;
    }
    if (!accepted) {
      // Take the smallest step anyway; the next Jacobian may do better.
      x += alpha * dx;
      r = residual(x);
      rnorm = r.lpNorm<Eigen::Infinity>();
    }
  }
  if (rnorm <= cfg.tol) return x;
  throw SolverError("newton_solve: no convergence after " + std::to_string(cfg.max_iter) +
                        " iterations, residual " + std::to_string(rnorm),
                    rnorm);
}

}  // namespace varint
