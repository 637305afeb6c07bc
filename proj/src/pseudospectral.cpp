#include "varint/pseudospectral.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace varint {

namespace {

constexpr Cplx kI{0.0, 1.0};

// Weight of an unfolded index under the primed sum.
double prime_weight(int k, int half) { return std::abs(k) == half ? 0.5 : 1.0; }

// Folded double-prime weight for j = -N/2+1 .. N/2: the two quarter-weighted
// endpoint terms are identified, leaving 1/2 on the N/2 slot.
double folded_dp_weight(int j, int half) { return j == half ? 0.5 : 1.0; }

// Kinetic coefficient of the discrete action, per mode index squared.
double kinetic_coef(const TdseScheme& s) {
  if (s.source == CoefficientSource::printed) {
    return s.hbar * s.hbar * s.dt / (24.0 * M_PI * M_PI);
  }
  return s.hbar * s.hbar * s.dt / (24.0 * M_PI * s.mass);
}

// Folded potential coupling A(j, m): sum over unfolded index pairs (n, mm)
// with |n - mm| <= N/2 of the three primed-sum weights times V_{n-mm},
// accumulated into the identified slots. Hermitian for real potentials.
CMat folded_potential(const TdseScheme& s) {
  const int half = s.grid.N / 2;
  CMat a = CMat::Zero(s.grid.N, s.grid.N);
  if (s.potential.N == 0) return a;
  auto fold = [half](int k) { return (k == -half ? half : k) + half - 1; };
  for (int n = -half; n <= half; ++n) {
    for (int mm = -half; mm <= half; ++mm) {
      const int k = n - mm;
      if (std::abs(k) > half) continue;
      const double w = prime_weight(n, half) * prime_weight(mm, half) * prime_weight(k, half);
      a(fold(n), fold(mm)) += w * s.potential.at(k);
    }
  }
  return a;
}

int check_grid(const SpectralGrid& grid) {
  if (grid.N < 4 || grid.N % 2 != 0) {
    throw std::invalid_argument("SpectralGrid: N must be even and at least 4");
  }
  return grid.N;
}

}  // namespace

Cplx weighted_sum(const CVec& terms, SumWeight mode) {
  const int n = static_cast<int>(terms.size());
  const double endpoint = mode == SumWeight::prime ? 0.5 : 0.25;
  Cplx total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = (i == 0 || i == n - 1) ? endpoint : 1.0;
    total += w * terms[i];
  }
  return total;
}

SpectralState dft_forward(const SpectralGrid& grid, const CVec& samples) {
  const int n = check_grid(grid);
  if (static_cast<int>(samples.size()) != n) {
    throw std::invalid_argument("dft_forward: expected N samples");
  }
  SpectralState state(n);
  for (int k = -n / 2 + 1; k <= n / 2; ++k) {
    Cplx acc = 0.0;
    for (int j = 1; j <= n; ++j) {
      acc += std::exp(-kI * (static_cast<double>(k) * grid.x(j))) * samples[j - 1];
    }
    state.at(k) = grid.dx() / (2.0 * M_PI) * acc;
  }
  state.at(-n / 2) = state.at(n / 2);
  return state;
}

Cplx eval_interpolant(const SpectralState& a, const SpectralState& b, double tau, double x) {
  const int half = a.N / 2;
  CVec terms(a.N + 1);
  for (int k = -half; k <= half; ++k) {
    terms[k + half] =
        std::exp(kI * (static_cast<double>(k) * x)) * ((1.0 - tau) * a.at(k) + tau * b.at(k));
  }
  return weighted_sum(terms, SumWeight::prime) / (2.0 * M_PI);
}

double spectral_norm(const SpectralState& state) {
  const CVec sq = state.coef.cwiseAbs2().cast<Cplx>();
  return weighted_sum(sq, SumWeight::double_prime).real() / (2.0 * M_PI);
}

PotentialSpectrum potential_spectrum(const SpectralGrid& grid, const Vec& samples) {
  PotentialSpectrum spec = dft_forward(grid, samples.cast<Cplx>());
  const int half = grid.N / 2;
  for (int k = 1; k < half; ++k) {
    const Cplx avg = 0.5 * (spec.at(k) + std::conj(spec.at(-k)));
    spec.at(k) = avg;
    spec.at(-k) = std::conj(avg);
  }
  spec.at(0) = spec.at(0).real();
  // The identified endpoint must equal its own conjugate.
  spec.at(half) = spec.at(half).real();
  spec.at(-half) = spec.at(half);
  return spec;
}

TdseScheme make_tdse(const SpectralGrid& grid, double dt, SolverConfig solver) {
  check_grid(grid);
  if (dt <= 0.0) throw std::invalid_argument("make_tdse: dt must be positive");
  TdseScheme scheme;
  scheme.grid = grid;
  scheme.dt = dt;
  scheme.solver = solver;
  scheme.potential = PotentialSpectrum(grid.N);
  return scheme;
}

double tdse_action(const TdseScheme& scheme, const SpectralState& a, const SpectralState& b) {
  const int half = scheme.grid.N / 2;
  const double kc = kinetic_coef(scheme);
  const CMat pot = folded_potential(scheme);
  Cplx total = 0.0;
  for (int j = -half + 1; j <= half; ++j) {
    const double w = folded_dp_weight(j, half);
    const Cplx aj = a.at(j);
    const Cplx bj = b.at(j);
    total += w * kI * scheme.hbar / (4.0 * M_PI) * (bj * std::conj(aj) - aj * std::conj(bj));
    total -= w * kc * static_cast<double>(j) * static_cast<double>(j) *
             (aj * (2.0 * std::conj(aj) + std::conj(bj)) +
              bj * (std::conj(aj) + 2.0 * std::conj(bj)));
  }
  const double pc = scheme.dt / (24.0 * M_PI * M_PI);
  for (int j = -half + 1; j <= half; ++j) {
    for (int m = -half + 1; m <= half; ++m) {
      const Cplx v = pot(j + half - 1, m + half - 1);
      if (v == 0.0) continue;
      total -= pc * v *
               (a.at(m) * (2.0 * std::conj(a.at(j)) + std::conj(b.at(j))) +
                b.at(m) * (std::conj(a.at(j)) + 2.0 * std::conj(b.at(j))));
    }
  }
  return total.real();
}

CVec tdse_mode_equations(const TdseScheme& scheme, const SpectralState& vm,
                         const SpectralState& v0, const SpectralState& vp, double lambda) {
  const int n = scheme.grid.N;
  const int half = n / 2;
  const double kc = kinetic_coef(scheme);
  const Cplx tc = kI * scheme.hbar / (4.0 * M_PI);
  const double pc = scheme.dt / (24.0 * M_PI * M_PI);
  const bool printed = scheme.source == CoefficientSource::printed;

  auto s3 = [&](int k) { return vm.at(k) + 4.0 * v0.at(k) + vp.at(k); };

  CVec eqs = CVec::Zero(n);
  if (printed) {
    const bool has_v = scheme.potential.N != 0;
    for (int j = -half + 1; j <= half; ++j) {
      const int idx = j + half - 1;
      if (j < half) {
        eqs[idx] = tc * (vp.at(j) - vm.at(j)) -
                   kc * static_cast<double>(j) * static_cast<double>(j) * s3(j) -
                   lambda / (2.0 * M_PI) * v0.at(j);
        if (has_v) {
          const int lo = j < 0 ? -half : j - half;
          const int hi = j < 0 ? half + j : half;
          Cplx conv = 0.0;
          for (int m = lo; m <= hi; ++m) {
            conv += prime_weight(m, half) * scheme.potential.at(j - m) * s3(m);
          }
          eqs[idx] -= pc * conv;
        }
      } else {
        // The +-N/2 rows keep the published quarter and half weights.
        eqs[idx] = 0.25 * tc * (vp.at(half) - vm.at(half)) -
                   0.25 * kc * static_cast<double>(half) * static_cast<double>(half) * s3(half) -
                   lambda / (2.0 * M_PI) * v0.at(half);
        if (has_v) {
          Cplx conv = 0.0;
          for (int m = 0; m <= half; ++m) {
            conv += prime_weight(m, half) * scheme.potential.at(half - m) * s3(m);
          }
          eqs[idx] -= 0.5 * pc * conv;
        }
      }
    }
    return eqs;
  }

  const CMat pot = folded_potential(scheme);
  for (int j = -half + 1; j <= half; ++j) {
    const double w = folded_dp_weight(j, half);
    Cplx r = w * (tc * (vp.at(j) - vm.at(j)) -
                  kc * static_cast<double>(j) * static_cast<double>(j) * s3(j) -
                  lambda / (2.0 * M_PI) * v0.at(j));
    for (int m = -half + 1; m <= half; ++m) {
      const Cplx v = pot(j + half - 1, m + half - 1);
      if (v != 0.0) r -= pc * v * s3(m);
    }
    eqs[j + half - 1] = r;
  }
  return eqs;
}

Vec tdse_residual(const TdseScheme& scheme, const SpectralState& vm, const SpectralState& v0,
                  const SpectralState& vp, double lambda) {
  const int n = scheme.grid.N;
  const CVec eqs = tdse_mode_equations(scheme, vm, v0, vp, lambda);
  Vec res(2 * n + 3);
  for (int i = 0; i < n; ++i) {
    res[2 * i] = eqs[i].real();
    res[2 * i + 1] = eqs[i].imag();
  }
  res[2 * n] = 1.0 - spectral_norm(vp);
  const Cplx gap = vp.at(-n / 2) - vp.at(n / 2);
  res[2 * n + 1] = gap.real();
  res[2 * n + 2] = gap.imag();
  return res;
}

std::pair<SpectralState, double> tdse_step(const TdseScheme& scheme, const SpectralState& vm,
                                           const SpectralState& v0, double lambda_guess) {
  const int n = scheme.grid.N;
  const int half = n / 2;
  if (std::abs(spectral_norm(v0) - 1.0) > 1e-8) {
    throw std::invalid_argument("tdse_step: current level is not normalized");
  }

  auto unpack = [&](const Vec& x) {
    SpectralState vp(n);
    for (int j = -half + 1; j <= half; ++j) {
      const int idx = j + half - 1;
      vp.at(j) = Cplx(x[2 * idx], x[2 * idx + 1]);
    }
    vp.at(-half) = vp.at(half);
    return vp;
  };

  ResidualFn residual = [&](const Vec& x) {
    const SpectralState vp = unpack(x);
    const CVec eqs = tdse_mode_equations(scheme, vm, v0, vp, x[2 * n]);
    Vec r(2 * n + 1);
    for (int i = 0; i < n; ++i) {
      r[2 * i] = eqs[i].real();
      r[2 * i + 1] = eqs[i].imag();
    }
    r[2 * n] = 1.0 - spectral_norm(vp);
    return r;
  };

  Vec guess(2 * n + 1);
  for (int j = -half + 1; j <= half; ++j) {
    const Cplx w = 2.0 * v0.at(j) - vm.at(j);
    const int idx = j + half - 1;
    guess[2 * idx] = w.real();
    guess[2 * idx + 1] = w.imag();
  }
  guess[2 * n] = lambda_guess;

  const Vec sol = newton_solve(residual, std::nullopt, guess, scheme.solver);
  return {unpack(sol), sol[2 * n]};
}

SpectralState tdse_start(const TdseScheme& scheme, const SpectralState& v0) {
  const int n = scheme.grid.N;
  const int half = n / 2;
  const CMat a = tise_matrix(scheme);
  const Vec b = tise_metric(scheme);
  const CMat h = b.cast<Cplx>().asDiagonal().inverse() * a;
  const CMat prop = (-kI * scheme.dt / scheme.hbar * h).exp();
  CVec w(n);
  for (int j = -half + 1; j <= half; ++j) w[j + half - 1] = v0.at(j);
  w = prop * w;
  SpectralState out(n);
  for (int j = -half + 1; j <= half; ++j) out.at(j) = w[j + half - 1];
  out.at(-half) = out.at(half);
  return out;
}

CMat tise_matrix(const TdseScheme& scheme) {
  const int n = scheme.grid.N;
  const int half = n / 2;
  CMat a = folded_potential(scheme) / (2.0 * M_PI);
  for (int j = -half + 1; j <= half; ++j) {
    const int idx = j + half - 1;
    a(idx, idx) += folded_dp_weight(j, half) * scheme.hbar * scheme.hbar *
                   static_cast<double>(j) * static_cast<double>(j) / (2.0 * scheme.mass);
  }
  return a;
}

Vec tise_metric(const TdseScheme& scheme) {
  const int n = scheme.grid.N;
  const int half = n / 2;
  Vec b(n);
  for (int j = -half + 1; j <= half; ++j) b[j + half - 1] = folded_dp_weight(j, half);
  return b;
}

std::vector<TiseMode> tise_solve(const TdseScheme& scheme) {
  const int n = scheme.grid.N;
  const int half = n / 2;
  const CMat a = tise_matrix(scheme);
  const CMat b = tise_metric(scheme).cast<Cplx>().asDiagonal().toDenseMatrix();
  Eigen::GeneralizedSelfAdjointEigenSolver<CMat> eig(a, b);
  if (eig.info() != Eigen::Success) {
    throw SolverError("tise_solve: eigensolver failed", 0.0);
  }
  std::vector<TiseMode> modes(n);
  for (int i = 0; i < n; ++i) {
    TiseMode mode;
    mode.lambda = -eig.eigenvalues()[i];
    mode.state = SpectralState(n);
    const CVec v = eig.eigenvectors().col(i);
    for (int j = -half + 1; j <= half; ++j) mode.state.at(j) = v[j + half - 1];
    mode.state.at(-half) = mode.state.at(half);
    const double nrm = spectral_norm(mode.state);
    mode.state.coef /= std::sqrt(nrm);
    modes[i] = std::move(mode);
  }
  std::sort(modes.begin(), modes.end(),
            [](const TiseMode& x, const TiseMode& y) { return x.lambda < y.lambda; });
  return modes;
}

}  // namespace varint
