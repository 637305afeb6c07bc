#include "varint/multisym.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace varint {

namespace {

double central(const std::function<double(double, double, double)>& f, double u, double ux,
               double ut, int slot, double step) {
  auto shift = [&](double s) {
    return f(u + (slot == 0 ? s : 0.0), ux + (slot == 1 ? s : 0.0), ut + (slot == 2 ? s : 0.0));
  };
  return (shift(step) - shift(-step)) / (2.0 * step);
}

// Shape function of corner `which` and its cell-local gradient.
double shape(int which, double xi, double tau) {
  switch (which) {
    case 0: return (1.0 - xi) * (1.0 - tau);
    case 1: return xi * (1.0 - tau);
    case 2: return (1.0 - xi) * tau;
    default: return xi * tau;
  }
}

double shape_dxi(int which, double tau) {
  switch (which) {
    case 0: return -(1.0 - tau);
    case 1: return 1.0 - tau;
    case 2: return -tau;
    default: return tau;
  }
}

double shape_dtau(int which, double xi) {
  switch (which) {
    case 0: return -(1.0 - xi);
    case 1: return -xi;
    case 2: return 1.0 - xi;
    default: return xi;
  }
}

int wrap(int i, int m) { return ((i % m) + m) % m; }

// Reads a nodal value with the mesh's boundary treatment.
double node_value(const FieldLattice& lattice, const SpaceTimeMesh& mesh, int j, int i) {
  if (mesh.boundary == SpaceTimeMesh::Boundary::periodic) {
    return lattice.q(j, wrap(i, mesh.M));
  }
  return lattice.q(j, i);
}

CellCorners cell_values(const FieldLattice& lattice, const SpaceTimeMesh& mesh, int ci, int cj) {
  return {node_value(lattice, mesh, cj, ci), node_value(lattice, mesh, cj, ci + 1),
          node_value(lattice, mesh, cj + 1, ci), node_value(lattice, mesh, cj + 1, ci + 1)};
}

}  // namespace

double DensityLagrangian::d_u(double u, double ux, double ut) const {
  return dLdu ? dLdu(u, ux, ut) : central(density, u, ux, ut, 0, fd_step);
}

double DensityLagrangian::d_ux(double u, double ux, double ut) const {
  return dLdux ? dLdux(u, ux, ut) : central(density, u, ux, ut, 1, fd_step);
}

double DensityLagrangian::d_ut(double u, double ux, double ut) const {
  return dLdut ? dLdut(u, ux, ut) : central(density, u, ux, ut, 2, fd_step);
}

QuadratureRule unit_gauss(int npoints) {
  // Standard Gauss--Legendre abscissae on [-1, 1], mapped to [0, 1].
  static const std::vector<std::vector<double>> abscissae = {
      {0.0},
      {-0.5773502691896257, 0.5773502691896257},
      {-0.7745966692414834, 0.0, 0.7745966692414834},
      {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526},
      {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640}};
  static const std::vector<std::vector<double>> weights = {
      {2.0},
      {1.0, 1.0},
      {0.5555555555555556, 0.8888888888888889, 0.5555555555555556},
      {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538},
      {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
       0.2369268850561891}};
  if (npoints < 1 || npoints > 5) {
    throw std::invalid_argument("unit_gauss: 1 to 5 points supported");
  }
  QuadratureRule rule;
  for (int i = 0; i < npoints; ++i) {
    rule.points.push_back(0.5 * (1.0 + abscissae[npoints - 1][i]));
    rule.weights.push_back(0.5 * weights[npoints - 1][i]);
  }
  return rule;
}

CellJet cell_interpolant(const CellCorners& corners, double xi, double tau, double dx, double dt) {
  CellJet jet;
  for (int c = 0; c < 4; ++c) {
    jet.u += corners[c] * shape(c, xi, tau);
    jet.ux += corners[c] * shape_dxi(c, tau) / dx;
    jet.ut += corners[c] * shape_dtau(c, xi) / dt;
  }
  return jet;
}

double cell_discrete_lagrangian(const DensityLagrangian& density, const CellCorners& corners,
                                double dx, double dt, const QuadratureRule& quad) {
  double total = 0.0;
  for (int a = 0; a < quad.size(); ++a) {
    for (int b = 0; b < quad.size(); ++b) {
      const CellJet jet = cell_interpolant(corners, quad.points[a], quad.points[b], dx, dt);
      total += quad.weights[a] * quad.weights[b] * density.density(jet.u, jet.ux, jet.ut);
    }
  }
  return dx * dt * total;
}

double cell_d(const DensityLagrangian& density, const CellCorners& corners, int which, double dx,
              double dt, const QuadratureRule& quad) {
  double total = 0.0;
  for (int a = 0; a < quad.size(); ++a) {
    for (int b = 0; b < quad.size(); ++b) {
      const double xi = quad.points[a];
      const double tau = quad.points[b];
      const CellJet jet = cell_interpolant(corners, xi, tau, dx, dt);
      const double w = quad.weights[a] * quad.weights[b];
      total += w * (density.d_u(jet.u, jet.ux, jet.ut) * shape(which, xi, tau) +
                    density.d_ux(jet.u, jet.ux, jet.ut) * shape_dxi(which, tau) / dx +
                    density.d_ut(jet.u, jet.ux, jet.ut) * shape_dtau(which, xi) / dt);
    }
  }
  return dx * dt * total;
}

double msdel_residual(const DensityLagrangian& density, const FieldLattice& lattice, int i, int j,
                      const SpaceTimeMesh& mesh, const QuadratureRule& quad) {
  if (j < 1 || j + 1 >= lattice.levels()) {
    throw std::invalid_argument("msdel_residual: levels j-1 and j+1 must exist");
  }
  if (mesh.boundary == SpaceTimeMesh::Boundary::fixed && (i < 1 || i >= mesh.M)) {
    throw std::domain_error("msdel_residual: boundary node under fixed boundaries");
  }
  const double dx = mesh.dx;
  const double dt = mesh.dt;
  double total = 0.0;
  total += cell_d(density, cell_values(lattice, mesh, i, j), 0, dx, dt, quad);
  total += cell_d(density, cell_values(lattice, mesh, i - 1, j), 1, dx, dt, quad);
  total += cell_d(density, cell_values(lattice, mesh, i, j - 1), 2, dx, dt, quad);
  total += cell_d(density, cell_values(lattice, mesh, i - 1, j - 1), 3, dx, dt, quad);
  return total;
}

double field_momentum(const DensityLagrangian& density, const FieldLattice& lattice, int j,
                      const SpaceTimeMesh& mesh, const QuadratureRule& quad) {
  if (j < 0 || j + 1 >= lattice.levels()) {
    throw std::invalid_argument("field_momentum: levels j and j+1 must exist");
  }
  double total = 0.0;
  for (int ci = 0; ci < mesh.M; ++ci) {
    const CellCorners corners = cell_values(lattice, mesh, ci, j);
    total += cell_d(density, corners, 2, mesh.dx, mesh.dt, quad);
    total += cell_d(density, corners, 3, mesh.dx, mesh.dt, quad);
  }
  return total;
}

void time_march(const DensityLagrangian& density, FieldLattice& lattice,
                const SpaceTimeMesh& mesh, const QuadratureRule& quad,
                const SolverConfig& solver) {
  if (lattice.levels() < 2) {
    throw std::invalid_argument("time_march: two seed levels required");
  }
  const bool periodic = mesh.boundary == SpaceTimeMesh::Boundary::periodic;
  const int j = lattice.levels() - 1;  // DEL rows are centered on this level
  const int nunk = periodic ? mesh.M : mesh.M - 1;
  const int first = periodic ? 0 : 1;

  lattice.q.conservativeResize(j + 2, Eigen::NoChange);
  auto set_level = [&](const Vec& x) {
    for (int k = 0; k < nunk; ++k) lattice.q(j + 1, first + k) = x[k];
    if (periodic) {
      lattice.q(j + 1, mesh.M) = lattice.q(j + 1, 0);
    } else {
      lattice.q(j + 1, 0) = lattice.q(j, 0);
      lattice.q(j + 1, mesh.M) = lattice.q(j, mesh.M);
    }
  };
  auto residual = [&](const Vec& x) {
    set_level(x);
    Vec r(nunk);
    for (int k = 0; k < nunk; ++k) {
      r[k] = msdel_residual(density, lattice, first + k, j, mesh, quad);
    }
    return r;
  };

  Vec x(nunk);
  for (int k = 0; k < nunk; ++k) {
    x[k] = 2.0 * lattice.q(j, first + k) - lattice.q(j - 1, first + k);
  }
  Vec r = residual(x);
  double rnorm = r.lpNorm<Eigen::Infinity>();
  for (int iter = 0; iter < solver.max_iter && rnorm > solver.tol; ++iter) {
    const Mat jac = fd_jacobian(residual, x, solver.fd_step);
    Eigen::FullPivLU<Mat> lu(jac);
    if (!lu.isInvertible()) throw SingularJacobianError(rnorm);
    const Vec dx = lu.solve(-r);
    double alpha = 1.0;
    for (int halving = 0; halving < 30; ++halving) {
      const Vec rt = residual(x + alpha * dx);
      const double rtn = rt.lpNorm<Eigen::Infinity>();
      if (rtn < rnorm || rtn <= solver.tol) {
        x += alpha * dx;
        r = rt;
        rnorm = rtn;
        break;
      }
      alpha *= solver.damping;
    }
  }
  if (rnorm > solver.tol) {
    int worst = 0;
    r.cwiseAbs().maxCoeff(&worst);
    lattice.q.conservativeResize(j + 1, Eigen::NoChange);
    throw SolverError("time_march: no convergence, worst residual " + std::to_string(rnorm) +
                          " at node " + std::to_string(first + worst),
                      rnorm);
  }
  set_level(x);
}

DensityLagrangian wave_density(double speed) {
  DensityLagrangian wave;
  const double c2 = speed * speed;
  wave.density = [c2](double, double ux, double ut) { return 0.5 * ut * ut - 0.5 * c2 * ux * ux; };
  wave.dLdu = [](double, double, double) { return 0.0; };
  wave.dLdux = [c2](double, double ux, double) { return -c2 * ux; };
  wave.dLdut = [](double, double, double ut) { return ut; };
  return wave;
}

}  // namespace varint
