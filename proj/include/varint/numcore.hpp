#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace varint {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Thrown when an iterative solver fails to reach its tolerance.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual_norm)
      : std::runtime_error(what), residual_norm_(residual_norm) {}
  double residual_norm() const { return residual_norm_; }

 private:
  double residual_norm_;
};

/// Thrown when a Newton Jacobian is numerically singular.
class SingularJacobianError : public SolverError {
 public:
  explicit SingularJacobianError(double residual_norm)
      : SolverError("singular Jacobian in Newton solve", residual_norm) {}
};

void require_finite(const Vec& v, const char* what);

/// A mechanical system given by its Lagrangian L(q, qdot).
/// Partial derivatives are optional; central differences fill in when absent.
struct LagrangianSystem {
  int dim = 0;
  std::function<double(const Vec&, const Vec&)> lag;
  std::function<Vec(const Vec&, const Vec&)> dLdq;  // optional
  std::function<Vec(const Vec&, const Vec&)> dLdv;  // optional

  double fd_step = 1e-6;

  Vec grad_q(const Vec& q, const Vec& v) const;
  Vec grad_v(const Vec& q, const Vec& v) const;
};

/// Interpolation control times d_0 = 0 < d_1 < ... < d_s = 1.
class ControlTimes {
 public:
  explicit ControlTimes(std::vector<double> nodes);

  int degree() const { return static_cast<int>(nodes_.size()) - 1; }  // s
  int count() const { return static_cast<int>(nodes_.size()); }       // s + 1
  double node(int nu) const { return nodes_.at(nu); }
  const std::vector<double>& nodes() const { return nodes_; }

  /// Barycentric weight for node nu.
  double bary_weight(int nu) const { return bary_[nu]; }

 private:
  std::vector<double> nodes_;
  std::vector<double> bary_;
};

/// Quadrature points and weights on [0, 1].
struct QuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;

  int size() const { return static_cast<int>(points.size()); }
};

struct SolverConfig {
  double tol = 1e-12;
  int max_iter = 50;
  double fd_step = 1e-6;
  double damping = 0.5;
};

/// Lagrange cardinal polynomial for node nu of `times`, evaluated at tau.
double cardinal_basis(const ControlTimes& times, int nu, double tau);

/// d/dtau of the cardinal polynomial.
double cardinal_basis_deriv(const ControlTimes& times, int nu, double tau);

/// Gauss--Lobatto rule on [0, 1] with npoints >= 2 nodes, both endpoints
/// included. Exact for polynomials of degree <= 2*npoints - 3.
QuadratureRule lobatto_rule(int npoints);

using ResidualFn = std::function<Vec(const Vec&)>;
using JacobianFn = std::function<Mat(const Vec&)>;

/// Central-difference Jacobian; step is scaled by 1 + |x_i| per column.
Mat fd_jacobian(const ResidualFn& residual, const Vec& point, double step);

/// Damped Newton iteration on ||residual||_inf with backtracking line search.
Vec newton_solve(const ResidualFn& residual, const std::optional<JacobianFn>& jacobian,
                 const Vec& guess, const SolverConfig& cfg);

}  // namespace varint
