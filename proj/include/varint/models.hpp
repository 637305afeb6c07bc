#pragma once

#include <cmath>

#include "varint/numcore.hpp"

namespace varint::models {

/// L = |v|^2 / 2.
inline LagrangianSystem free_particle(int dim) {
  LagrangianSystem sys;
  sys.dim = dim;
  sys.lag = [](const Vec&, const Vec& v) { return 0.5 * v.squaredNorm(); };
  sys.dLdq = [dim](const Vec&, const Vec&) { return Vec(Vec::Zero(dim)); };
  sys.dLdv = [](const Vec&, const Vec& v) { return v; };
  return sys;
}

/// L = v^2/2 - omega^2 q^2 / 2 (unit mass).
inline LagrangianSystem harmonic_oscillator(double omega = 1.0) {
  LagrangianSystem sys;
  sys.dim = 1;
  const double w2 = omega * omega;
  sys.lag = [w2](const Vec& q, const Vec& v) {
    return 0.5 * v.squaredNorm() - 0.5 * w2 * q.squaredNorm();
  };
  sys.dLdq = [w2](const Vec& q, const Vec&) { return Vec(-w2 * q); };
  sys.dLdv = [](const Vec&, const Vec& v) { return v; };
  return sys;
}

/// Planar pendulum, L = thdot^2/2 + cos(th).
inline LagrangianSystem pendulum() {
  LagrangianSystem sys;
  sys.dim = 1;
  sys.lag = [](const Vec& q, const Vec& v) { return 0.5 * v[0] * v[0] + std::cos(q[0]); };
  sys.dLdq = [](const Vec& q, const Vec&) {
    Vec g(1);
    g[0] = -std::sin(q[0]);
    return g;
  };
  sys.dLdv = [](const Vec&, const Vec& v) { return v; };
  return sys;
}

}  // namespace varint::models
