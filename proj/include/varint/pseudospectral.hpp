#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "varint/numcore.hpp"

namespace varint {

using Cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Uniform periodic grid on [0, 2pi] with N points x_j = j*dx, j = 1..N.
struct SpectralGrid {
  int N = 4;  // even, >= 4

  double dx() const { return 2.0 * M_PI / N; }
  double x(int j) const { return j * dx(); }
};

/// Fourier coefficients v_k for k = -N/2 .. N/2, stored with the endpoint
/// identification v_{-N/2} = v_{N/2}.
struct SpectralState {
  int N = 0;
  CVec coef;  // N + 1 entries, index k + N/2

  SpectralState() = default;
  explicit SpectralState(int n) : N(n), coef(CVec::Zero(n + 1)) {}

  Cplx& at(int k) { return coef[k + N / 2]; }
  Cplx at(int k) const { return coef[k + N / 2]; }
};

enum class SumWeight {
  prime,         // indices +-N/2 weighted by 1/2
  double_prime,  // indices +-N/2 weighted by 1/4
};

/// Endpoint-weighted sum of the N + 1 per-mode terms.
Cplx weighted_sum(const CVec& terms, SumWeight mode);

/// v_k = (1/2pi) dx sum_j e^{-i k x_j} v_j for k = -N/2+1 .. N/2, with
/// v_{-N/2} set equal to v_{N/2}.
SpectralState dft_forward(const SpectralGrid& grid, const CVec& samples);

/// (1/2pi) sum' e^{ikx} ((1-tau) a_k + tau b_k).
Cplx eval_interpolant(const SpectralState& a, const SpectralState& b, double tau, double x);

/// (1/2pi) sum'' |v_k|^2.
double spectral_norm(const SpectralState& state);

using PotentialSpectrum = SpectralState;

/// Forward transform of real potential samples with Hermitian symmetry
/// enforced.
PotentialSpectrum potential_spectrum(const SpectralGrid& grid, const Vec& samples);

/// Which constants go into the discrete action and mode equations. The
/// rederived set carries the mass factor and the single 1/pi from the space
/// integral; the printed set reproduces the published table (1/24pi^2 kinetic
/// scale, quarter-weighted +-N/2 rows) for regression.
enum class CoefficientSource { rederived, printed };

struct TdseScheme {
  SpectralGrid grid;
  double hbar = 1.0;
  double mass = 0.5;  // 2m = 1 so the free phase is e^{-i hbar k^2 t}
  double dt = 0.01;
  PotentialSpectrum potential;
  SolverConfig solver;
  CoefficientSource source = CoefficientSource::rederived;
};

TdseScheme make_tdse(const SpectralGrid& grid, double dt, SolverConfig solver = {});

/// Exact one-segment discrete action between levels a and b (multiplier term
/// excluded). Evaluated from the closed-form quadratic coefficients.
double tdse_action(const TdseScheme& scheme, const SpectralState& a, const SpectralState& b);

/// The N complex mode equations for j = -N/2+1 .. N/2 at the three levels
/// (l-1, l, l+1) with multiplier lambda_l.
CVec tdse_mode_equations(const TdseScheme& scheme, const SpectralState& vm, const SpectralState& v0,
                         const SpectralState& vp, double lambda);

/// Full real residual: Re/Im of each mode equation, the normalization row
/// 1 - norm(v^{l+1}), and Re/Im of the endpoint identification of v^{l+1}.
/// 2N + 3 rows in total.
Vec tdse_residual(const TdseScheme& scheme, const SpectralState& vm, const SpectralState& v0,
                  const SpectralState& vp, double lambda);

/// Newton solve for (v^{l+1}, lambda_l) from the two known levels. Requires
/// norm(v^l) within 1e-8 of 1.
std::pair<SpectralState, double> tdse_step(const TdseScheme& scheme, const SpectralState& vm,
                                           const SpectralState& v0, double lambda_guess = 0.0);

/// Consistent second level for a three-level march: one step of the exact
/// flow of the semidiscrete system, exp(-i B^{-1} A dt / hbar) applied to the
/// folded coefficients. The propagator is unitary in the B inner product, so
/// the result stays on the normalization manifold. Seeding with anything less
/// compatible (say v^1 = v^0) leaves the step without a real multiplier
/// solution: lambda moves the new level's norm only at second order.
SpectralState tdse_start(const TdseScheme& scheme, const SpectralState& v0);

/// Folded Hermitian matrix A of the time-independent problem, indices
/// j = -N/2+1 .. N/2 (the identified coefficient eliminated).
CMat tise_matrix(const TdseScheme& scheme);

/// Diagonal metric B with the folded double-prime weights, same indexing.
Vec tise_metric(const TdseScheme& scheme);

struct TiseMode {
  double lambda = 0.0;
  SpectralState state;
};

/// Solves A v = -lambda B v, returns modes sorted by lambda with states
/// normalized to spectral_norm 1.
std::vector<TiseMode> tise_solve(const TdseScheme& scheme);

}  // namespace varint
