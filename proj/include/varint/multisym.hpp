#pragma once

#include <array>
#include <functional>

#include "varint/numcore.hpp"

namespace varint {

/// Tensor-product space-time grid for a (1+1)D field. M spatial cells of
/// width dx, stepped in time increments dt.
struct SpaceTimeMesh {
  enum class Boundary { periodic, fixed };

  int M = 2;
  double dx = 1.0;
  double dt = 1.0;
  Boundary boundary = Boundary::periodic;
};

/// Nodal field values q(j, i) ~ q(i dx, j dt); rows are time levels,
/// columns the M + 1 spatial nodes. Under periodic boundaries column M
/// duplicates column 0.
struct FieldLattice {
  Mat q;

  int levels() const { return static_cast<int>(q.rows()); }
  int nodes() const { return static_cast<int>(q.cols()); }
};

/// First-order field Lagrangian density L(u, u_x, u_t). Partials are
/// optional; central differences fill in when absent.
struct DensityLagrangian {
  std::function<double(double, double, double)> density;
  std::function<double(double, double, double)> dLdu;   // optional
  std::function<double(double, double, double)> dLdux;  // optional
  std::function<double(double, double, double)> dLdut;  // optional

  double fd_step = 1e-6;

  double d_u(double u, double ux, double ut) const;
  double d_ux(double u, double ux, double ut) const;
  double d_ut(double u, double ux, double ut) const;
};

/// Gauss--Legendre rule on [0, 1] with 1 to 5 points; applied in tensor
/// product over the unit cell.
QuadratureRule unit_gauss(int npoints);

/// Cell corner values in the order (i,j), (i+1,j), (i,j+1), (i+1,j+1).
using CellCorners = std::array<double, 4>;

struct CellJet {
  double u = 0.0;
  double ux = 0.0;
  double ut = 0.0;
};

/// Bilinear interpolant of the corners and its derivatives at cell-local
/// coordinates (xi, tau) in the unit square.
CellJet cell_interpolant(const CellCorners& corners, double xi, double tau, double dx, double dt);

/// dx dt sum_ab w_a w_b L(interpolant at (xi_a, tau_b)).
double cell_discrete_lagrangian(const DensityLagrangian& density, const CellCorners& corners,
                                double dx, double dt, const QuadratureRule& quad);

/// Partial derivative with respect to corner `which` (0..3), via the chain
/// rule through the density partials.
double cell_d(const DensityLagrangian& density, const CellCorners& corners, int which, double dx,
              double dt, const QuadratureRule& quad);

/// Four-term discrete Euler--Lagrange residual at node (i, j): the sum of
/// the cell partials with respect to q_{i,j} over the four adjacent cells.
/// Needs levels j-1 and j+1 present. Periodic meshes wrap the spatial index;
/// fixed meshes reject boundary nodes.
double msdel_residual(const DensityLagrangian& density, const FieldLattice& lattice, int i, int j,
                      const SpaceTimeMesh& mesh, const QuadratureRule& quad);

/// Total discrete field momentum carried by the row of cells between levels
/// j and j+1: sum over cells of (D3 + D4) of the cell Lagrangian. Constant
/// level-to-level for u-translation-invariant densities on periodic meshes.
double field_momentum(const DensityLagrangian& density, const FieldLattice& lattice, int j,
                      const SpaceTimeMesh& mesh, const QuadratureRule& quad);

/// Appends one time level to the lattice by solving the coupled spatial
/// system of DEL residuals implicitly. The lattice must hold at least two
/// levels. Fixed boundaries carry the previous level's endpoint values.
void time_march(const DensityLagrangian& density, FieldLattice& lattice,
                const SpaceTimeMesh& mesh, const QuadratureRule& quad,
                const SolverConfig& solver = {});

/// Linear wave density u_t^2/2 - c^2 u_x^2/2.
DensityLagrangian wave_density(double speed = 1.0);

}  // namespace varint
