#pragma once

// Deterministic fractional heat evolution on the torus, mild solutions of the
// stochastically forced equation (single Brownian motion or space-time white
// noise), exact discrete second-moment oracles, and the Dirichlet sine-series
// semigroup on (0, pi).

#include <cstdint>
#include <string>
#include <vector>

#include "fhlab/fields.hpp"
#include "fhlab/kernel.hpp"

namespace fhlab::solver {

struct SolveConfig {
  kernel::KernelSpec kernel;
  fields::GridSpec grid;
  fields::NoiseSpec noise;
  fields::ForcingSpec forcing;
  int store_every = 1;
};

// Non-fatal admissibility diagnostics (domain too short for the diffusion
// length, periodization tail too heavy, moment/regularity conditions of the
// target regime violated).  Recorded in FieldSample provenance.
std::vector<std::string> admissibility_flags(const SolveConfig& config);

// rho(t) = exp(t * spectral multiplier) rho0 on the periodic grid; exact per
// Fourier mode, stored every `store_every` steps.
fields::FieldSample evolve_deterministic(const std::vector<double>& rho0,
                                         const kernel::KernelSpec& kspec,
                                         const fields::GridSpec& grid, int store_every = 1);

// Single row of the deterministic evolution at an arbitrary time t >= 0.
std::vector<double> evolve_to_time(const std::vector<double>& rho0,
                                   const kernel::KernelSpec& kspec, const fields::GridSpec& grid,
                                   double t);

// Mild solution driven by one Brownian motion: left-endpoint Ito sum
//   u(t_n, x) = sum_{m<n} [K(t_n - t_m, .) * g(t_m, .)](x) dW_m,  u(0) = 0,
// evaluated by an exact per-mode exponential recursion.
fields::FieldSample solve_mild_bm(const SolveConfig& config);

// Mild solution driven by space-time white noise (dimension 1 only):
//   u(t_n, x_i) = sum_{m<n} sum_j K(t_n - t_m, x_i - x_j) g(t_m, x_j) dW_{mj}.
fields::FieldSample solve_mild_stwn(const SolveConfig& config);

// Exact per-point variance of the discrete scheme at time step `step`
// (deterministic g): Var u(t_step, x_i) for every grid point.
std::vector<double> bm_variance_oracle(const SolveConfig& config, int step);
std::vector<double> stwn_variance_oracle(const SolveConfig& config, int step);

// Exact second moment E[(u(t_a, x + h) - u(t_b, x))^2] of the white-noise
// scheme for constant forcing; h must be a torus offset.
double stwn_increment_second_moment(const SolveConfig& config, int step_a, int step_b,
                                    double space_lag);

// Heat semigroup with zero Dirichlet data on (0, pi): F is sampled on the
// interior points x_i = i*pi/(n+1), i = 1..n; returns the evolution at time t.
std::vector<double> dirichlet_semigroup(const std::vector<double>& F, double t);

}  // namespace fhlab::solver
