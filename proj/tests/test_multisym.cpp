#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "varint/multisym.hpp"

using namespace varint;

namespace {

// Closed-form cell Lagrangian of the unit-speed wave density under the
// bilinear interpolant: (dx/6dt)(a^2+ab+b^2) - (dt/6dx)(p^2+pq+q^2) with
// a, b the edge time differences and p, q the edge space differences.
double wave_cell_exact(const CellCorners& c, double dx, double dt) {
  const double a = c[2] - c[0];
  const double b = c[3] - c[1];
  const double p = c[1] - c[0];
  const double q = c[3] - c[2];
  return dx / (6.0 * dt) * (a * a + a * b + b * b) -
         dt / (6.0 * dx) * (p * p + p * q + q * q);
}

DensityLagrangian sine_gordon() {
  DensityLagrangian d;
  d.density = [](double u, double ux, double ut) {
    return 0.5 * ut * ut - 0.5 * ux * ux - (1.0 - std::cos(u));
  };
  return d;
}

// The classic mass-weighted wave stencil the four-term DEL must reproduce.
double wave_stencil(const FieldLattice& lat, int i, int j, const SpaceTimeMesh& mesh) {
  auto val = [&](int jj, int ii) { return lat.q(jj, ((ii % mesh.M) + mesh.M) % mesh.M); };
  auto dtt = [&](int ii) { return val(j + 1, ii) - 2.0 * val(j, ii) + val(j - 1, ii); };
  auto dxx = [&](int jj) { return val(jj, i + 1) - 2.0 * val(jj, i) + val(jj, i - 1); };
  return -mesh.dx / (6.0 * mesh.dt) * (dtt(i - 1) + 4.0 * dtt(i) + dtt(i + 1)) +
         mesh.dt / (6.0 * mesh.dx) * (dxx(j - 1) + 4.0 * dxx(j) + dxx(j + 1));
}

}  // namespace

TEST_CASE("unit gauss rules: weight sums and polynomial exactness") {
  for (int n = 1; n <= 5; ++n) {
    const auto rule = unit_gauss(n);
    double wsum = 0.0;
    for (double w : rule.weights) wsum += w;
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
  }
  const auto two = unit_gauss(2);
  double cubic = 0.0;
  for (int i = 0; i < 2; ++i) cubic += two.weights[i] * std::pow(two.points[i], 3);
  CHECK(cubic == doctest::Approx(0.25).epsilon(1e-14));
  CHECK_THROWS_AS(unit_gauss(6), std::invalid_argument);
}

TEST_CASE("cell interpolant: constants, splits, derivative oracle") {
  const double dx = 0.3, dt = 0.2;
  const auto flat = cell_interpolant({2.5, 2.5, 2.5, 2.5}, 0.37, 0.81, dx, dt);
  CHECK(flat.u == doctest::Approx(2.5));
  CHECK(flat.ux == doctest::Approx(0.0));
  CHECK(flat.ut == doctest::Approx(0.0));

  const auto split = cell_interpolant({0.0, dx, 0.0, dx}, 0.4, 0.7, dx, dt);
  CHECK(split.ux == doctest::Approx(1.0));
  CHECK(split.ut == doctest::Approx(0.0).epsilon(1e-14));

  const CellCorners mixed{0.3, -1.1, 0.8, 2.2};
  const double xi = 0.41, tau = 0.67, h = 1e-6;
  const auto jet = cell_interpolant(mixed, xi, tau, dx, dt);
  const double ux_fd = (cell_interpolant(mixed, xi + h, tau, dx, dt).u -
                        cell_interpolant(mixed, xi - h, tau, dx, dt).u) /
                       (2.0 * h * dx);
  const double ut_fd = (cell_interpolant(mixed, xi, tau + h, dx, dt).u -
                        cell_interpolant(mixed, xi, tau - h, dx, dt).u) /
                       (2.0 * h * dt);
  CHECK(jet.ux == doctest::Approx(ux_fd).epsilon(1e-9));
  CHECK(jet.ut == doctest::Approx(ut_fd).epsilon(1e-9));
}

TEST_CASE("cell Lagrangian: hand values for the wave density") {
  const auto wave = wave_density();
  const auto quad = unit_gauss(2);
  const double dx = 0.4, dt = 0.25;
  CHECK(cell_discrete_lagrangian(wave, {0, 0, 0, 0}, dx, dt, quad) == doctest::Approx(0.0));
  CHECK(cell_discrete_lagrangian(wave, {1.5, 1.5, 1.5, 1.5}, dx, dt, quad) ==
        doctest::Approx(0.0));
  // Corners raising u_t = 1 across the cell: constant density 1/2.
  CHECK(cell_discrete_lagrangian(wave, {0.0, 0.0, dt, dt}, dx, dt, quad) ==
        doctest::Approx(0.5 * dx * dt).epsilon(1e-14));
}

TEST_CASE("two-point tensor Gauss is exact for quadratic densities") {
  const auto wave = wave_density();
  const auto quad = unit_gauss(2);
  std::mt19937 rng(21);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const CellCorners c{dist(rng), dist(rng), dist(rng), dist(rng)};
    CHECK(cell_discrete_lagrangian(wave, c, 0.3, 0.2, quad) ==
          doctest::Approx(wave_cell_exact(c, 0.3, 0.2)).epsilon(1e-12));
  }
}

TEST_CASE("cell partials match finite differences of the cell Lagrangian") {
  const auto sg = sine_gordon();
  const auto quad = unit_gauss(3);
  const CellCorners base{0.4, -0.3, 1.2, 0.7};
  const double dx = 0.35, dt = 0.15, h = 1e-6;
  for (int which = 0; which < 4; ++which) {
    CellCorners up = base, dn = base;
    up[which] += h;
    dn[which] -= h;
    const double fd = (cell_discrete_lagrangian(sg, up, dx, dt, quad) -
                       cell_discrete_lagrangian(sg, dn, dx, dt, quad)) /
                      (2.0 * h);
    CHECK(std::abs(cell_d(sg, base, which, dx, dt, quad) - fd) < 1e-7);
  }
}

TEST_CASE("wave DEL reproduces the mass-weighted stencil coefficient by coefficient") {
  SpaceTimeMesh mesh{6, 0.3, 0.2, SpaceTimeMesh::Boundary::periodic};
  const auto wave = wave_density();
  const auto quad = unit_gauss(2);
  const int i = 2, j = 1;
  // The residual is linear in the lattice, so probing with basis lattices
  // extracts each stencil coefficient.
  for (int di = -1; di <= 1; ++di) {
    for (int dj = -1; dj <= 1; ++dj) {
      FieldLattice basis;
      basis.q = Mat::Zero(3, mesh.M + 1);
      basis.q(j + dj, ((i + di) % mesh.M + mesh.M) % mesh.M) = 1.0;
      const double got = msdel_residual(wave, basis, i, j, mesh, quad);
      const double expected = wave_stencil(basis, i, j, mesh);
      CHECK(got == doctest::Approx(expected).epsilon(1e-12));
    }
  }

  FieldLattice zero;
  zero.q = Mat::Zero(3, mesh.M + 1);
  CHECK(msdel_residual(wave, zero, i, j, mesh, quad) == doctest::Approx(0.0));
}

TEST_CASE("traveling linear profile annihilates the wave DEL") {
  SpaceTimeMesh mesh{6, 0.25, 0.25, SpaceTimeMesh::Boundary::fixed};
  const auto wave = wave_density();
  const auto quad = unit_gauss(2);
  FieldLattice lat;
  lat.q = Mat(3, mesh.M + 1);
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i <= mesh.M; ++i) lat.q(j, i) = i * mesh.dx - j * mesh.dt;
  }
  for (int i = 1; i < mesh.M; ++i) {
    CHECK(std::abs(msdel_residual(wave, lat, i, 1, mesh, quad)) < 1e-13);
  }
}

TEST_CASE("boundary and level preconditions") {
  SpaceTimeMesh mesh{4, 0.25, 0.2, SpaceTimeMesh::Boundary::fixed};
  const auto wave = wave_density();
  const auto quad = unit_gauss(2);
  FieldLattice lat;
  lat.q = Mat::Zero(3, mesh.M + 1);
  CHECK_THROWS_AS(msdel_residual(wave, lat, 0, 1, mesh, quad), std::domain_error);
  CHECK_THROWS_AS(msdel_residual(wave, lat, mesh.M, 1, mesh, quad), std::domain_error);
  CHECK_THROWS_AS(msdel_residual(wave, lat, 1, 0, mesh, quad), std::invalid_argument);
}

TEST_CASE("DEL equals the gradient of the four adjacent cell Lagrangians") {
  SpaceTimeMesh mesh{5, 0.3, 0.2, SpaceTimeMesh::Boundary::periodic};
  const auto sg = sine_gordon();
  const auto quad = unit_gauss(3);
  std::mt19937 rng(22);
  std::normal_distribution<double> dist(0.0, 0.5);
  FieldLattice lat;
  lat.q = Mat(3, mesh.M + 1);
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < mesh.M; ++i) lat.q(j, i) = dist(rng);
    lat.q(j, mesh.M) = lat.q(j, 0);
  }
  const int i = 3, j = 1;
  auto action_around = [&](double value) {
    FieldLattice probe = lat;
    probe.q(j, i) = value;
    double total = 0.0;
    for (int ci : {i - 1, i}) {
      for (int cj : {j - 1, j}) {
        CellCorners c;
        auto val = [&](int jj, int ii) { return probe.q(jj, (ii % mesh.M + mesh.M) % mesh.M); };
        c = {val(cj, ci), val(cj, ci + 1), val(cj + 1, ci), val(cj + 1, ci + 1)};
        total += cell_discrete_lagrangian(sg, c, mesh.dx, mesh.dt, quad);
      }
    }
    return total;
  };
  const double h = 1e-6;
  const double grad = (action_around(lat.q(j, i) + h) - action_around(lat.q(j, i) - h)) / (2.0 * h);
  CHECK(std::abs(msdel_residual(sg, lat, i, j, mesh, quad) - grad) < 1e-7);
}

TEST_CASE("DEL support: the assembled Jacobian is banded with periodic corners") {
  SpaceTimeMesh mesh{8, 0.25, 0.1, SpaceTimeMesh::Boundary::periodic};
  const auto sg = sine_gordon();
  const auto quad = unit_gauss(2);
  std::mt19937 rng(23);
  std::normal_distribution<double> dist(0.0, 0.4);
  FieldLattice lat;
  lat.q = Mat(3, mesh.M + 1);
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < mesh.M; ++i) lat.q(j, i) = dist(rng);
    lat.q(j, mesh.M) = lat.q(j, 0);
  }
  const double h = 1e-6;
  for (int row = 0; row < mesh.M; ++row) {
    for (int col = 0; col < mesh.M; ++col) {
      FieldLattice up = lat, dn = lat;
      up.q(2, col) += h;
      dn.q(2, col) -= h;
      const double entry = (msdel_residual(sg, up, row, 1, mesh, quad) -
                            msdel_residual(sg, dn, row, 1, mesh, quad)) /
                           (2.0 * h);
      const int gap = std::min((row - col + mesh.M) % mesh.M, (col - row + mesh.M) % mesh.M);
      if (gap > 1) {
        CHECK(std::abs(entry) < 1e-12);
      }
    }
  }
}

TEST_CASE("time march: zero seeds stay zero, two-node system solved by hand") {
  const auto wave = wave_density();
  const auto quad = unit_gauss(2);

  SpaceTimeMesh mesh{4, 0.25, 0.1, SpaceTimeMesh::Boundary::periodic};
  FieldLattice zero;
  zero.q = Mat::Zero(2, mesh.M + 1);
  time_march(wave, zero, mesh, quad);
  REQUIRE(zero.levels() == 3);
  CHECK(zero.q.row(2).cwiseAbs().maxCoeff() < 1e-12);

  // M = 2 periodic: eliminate by hand from the stencil. Unknowns u0, u1.
  SpaceTimeMesh two{2, 0.5, 0.2, SpaceTimeMesh::Boundary::periodic};
  FieldLattice lat;
  lat.q = Mat(2, 3);
  lat.q << 0.3, -0.2, 0.3, 0.5, 0.1, 0.5;
  const double kx = two.dx / (6.0 * two.dt);
  const double kt = two.dt / (6.0 * two.dx);
  // Residual at i: -kx [4 dtt_i + 2 dtt_{1-i}] + kt [dxx_{j-1} + 4 dxx_j + dxx_{j+1}]
  // with dxx_{i,r} = 2 (q_{1-i,r} - q_{i,r}). Collect the unknown level j+1.
  auto dxx = [&](double self, double other) { return 2.0 * (other - self); };
  Mat a(2, 2);
  Vec rhs(2);
  for (int i = 0; i < 2; ++i) {
    const double qj = lat.q(1, i), qjm = lat.q(0, i);
    const double oj = lat.q(1, 1 - i), ojm = lat.q(0, 1 - i);
    // unknown coefficients
    a(i, i) = -4.0 * kx + kt * (-2.0);
    a(i, 1 - i) = -2.0 * kx + kt * (2.0);
    rhs[i] = -(-4.0 * kx * (-2.0 * qj + qjm) - 2.0 * kx * (-2.0 * oj + ojm) +
               kt * (dxx(qjm, ojm) + 4.0 * dxx(qj, oj)));
  }
  const Vec hand = a.fullPivLu().solve(rhs);
  time_march(wave, lat, two, quad);
  CHECK(lat.q(2, 0) == doctest::Approx(hand[0]).epsilon(1e-10));
  CHECK(lat.q(2, 1) == doctest::Approx(hand[1]).epsilon(1e-10));
}

TEST_CASE("standing wave: accurate over one period, energy bounded over 500 steps") {
  const int m = 16;
  SpaceTimeMesh mesh{m, 1.0 / m, 0.5 / m, SpaceTimeMesh::Boundary::periodic};
  const auto wave = wave_density();
  const auto quad = unit_gauss(2);

  auto exact = [&](double x, double t) {
    return std::cos(2.0 * M_PI * t) * std::sin(2.0 * M_PI * x);
  };
  FieldLattice lat;
  lat.q = Mat(2, m + 1);
  for (int i = 0; i <= m; ++i) {
    lat.q(0, i) = exact(i * mesh.dx, 0.0);
    lat.q(1, i) = exact(i * mesh.dx, mesh.dt);
  }

  auto energy = [&](int j) {
    double e = 0.0;
    for (int i = 0; i < m; ++i) {
      const double ut = (lat.q(j + 1, i) - lat.q(j, i)) / mesh.dt;
      const double ux = (lat.q(j, i + 1) - lat.q(j, i)) / mesh.dx;
      e += 0.5 * (ut * ut + ux * ux) * mesh.dx;
    }
    return e;
  };

  const double e0 = energy(0);
  double emin = e0, emax = e0;
  for (int step = 0; step < 500; ++step) {
    time_march(wave, lat, mesh, quad);
    const double e = energy(lat.levels() - 2);
    emin = std::min(emin, e);
    emax = std::max(emax, e);
  }
  CHECK(emax < 2.0 * e0);
  CHECK(emin > 0.5 * e0);

  // One full period back at level 2m.
  double err = 0.0;
  for (int i = 0; i < m; ++i) {
    err = std::max(err, std::abs(lat.q(2 * m, i) - exact(i * mesh.dx, 1.0)));
  }
  CHECK(err < 0.05);
}

TEST_CASE("periodic wave march conserves the discrete field momentum") {
  const int m = 12;
  SpaceTimeMesh mesh{m, 1.0 / m, 0.4 / m, SpaceTimeMesh::Boundary::periodic};
  const auto wave = wave_density();
  const auto quad = unit_gauss(2);
  FieldLattice lat;
  lat.q = Mat(2, m + 1);
  for (int i = 0; i <= m; ++i) {
    lat.q(0, i) = std::sin(2.0 * M_PI * i * mesh.dx);
    lat.q(1, i) = std::sin(2.0 * M_PI * (i * mesh.dx - mesh.dt));
  }
  for (int step = 0; step < 20; ++step) time_march(wave, lat, mesh, quad);
  const double p0 = field_momentum(wave, lat, 0, mesh, quad);
  for (int j = 1; j + 1 < lat.levels(); ++j) {
    CHECK(std::abs(field_momentum(wave, lat, j, mesh, quad) - p0) < 1e-9);
  }
}

TEST_CASE("fixed boundaries hold the prescribed endpoint values") {
  SpaceTimeMesh mesh{6, 0.2, 0.08, SpaceTimeMesh::Boundary::fixed};
  const auto wave = wave_density();
  const auto quad = unit_gauss(2);
  FieldLattice lat;
  lat.q = Mat(2, mesh.M + 1);
  for (int i = 0; i <= mesh.M; ++i) {
    lat.q(0, i) = std::sin(M_PI * i / mesh.M);
    lat.q(1, i) = lat.q(0, i);
  }
  for (int step = 0; step < 10; ++step) time_march(wave, lat, mesh, quad);
  for (int j = 0; j < lat.levels(); ++j) {
    CHECK(lat.q(j, 0) == doctest::Approx(0.0));
    CHECK(lat.q(j, mesh.M) == doctest::Approx(lat.q(0, mesh.M)));
  }
}
