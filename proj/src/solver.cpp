#include "fhlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "fhlab/fft.hpp"
#include "fhlab/philox.hpp"

namespace fhlab::solver {
namespace {

constexpr double kPi = 3.14159265358979323846;
using Cvec = std::vector<std::complex<double>>;

// |k| for FFT bin m on a torus of length L (bins above nx/2 are negative
// frequencies).
double mode_abs(int m, int nx, double len) {
  const int folded = m <= nx / 2 ? m : nx - m;
  return 2.0 * kPi * folded / len;
}

std::vector<double> step_multiplier(const kernel::KernelSpec& kspec,
                                    const fields::GridSpec& grid, double tau) {
  const double two_a = 2.0 * kspec.alpha;
  std::vector<double> e(grid.nx);
  for (int m = 0; m < grid.nx; ++m) {
    e[m] = std::exp(-tau * std::pow(mode_abs(m, grid.nx, grid.domain_len), two_a));
  }
  return e;
}

Cvec to_complex(const std::vector<double>& v) {
  Cvec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i];
  return out;
}

std::vector<double> real_part(const Cvec& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].real();
  return out;
}

void require_store_every(const fields::GridSpec& grid, int store_every) {
  if (store_every < 1 || grid.nt % store_every != 0) {
    throw std::invalid_argument("store_every must be a positive divisor of nt");
  }
}

void require_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + " must be finite");
  }
}

// First algebraic tail coefficient of the alpha-stable kernel (dimension 1),
// with a 3x safety margin; used for periodization-tail diagnostics.
double tail_coeff(double alpha) {
  const double two_a = 2.0 * alpha;
  return 3.0 * std::tgamma(1.0 + two_a) * std::sin(kPi * alpha) / kPi;
}

// Sampled forcing rows g(t_m, x_j) for one step.
std::vector<double> forcing_row(const fields::Forcing& g, const std::vector<double>& xs,
                                double t) {
  std::vector<double> row(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) row[j] = g.fn(t, xs[j]);
  return row;
}

fields::FieldSample make_output(const SolveConfig& config) {
  fields::FieldSample out;
  out.grid = config.grid;
  out.store_every = config.store_every;
  out.values.assign(static_cast<std::size_t>(out.stored_rows()) * config.grid.nx, 0.0);
  out.noise_kind = config.noise.kind;
  out.seed = config.noise.seed;
  out.replicate = config.noise.replicate_id;
  out.alpha = config.kernel.alpha;
  out.warnings = admissibility_flags(config);
  return out;
}

}  // namespace

std::vector<std::string> admissibility_flags(const SolveConfig& config) {
  kernel::validate(config.kernel);
  fields::validate_grid(config.grid);
  std::vector<std::string> flags;
  const double alpha = config.kernel.alpha;
  const double T = config.grid.t_max, L = config.grid.domain_len;
  const double diff_len = std::pow(T, 1.0 / (2.0 * alpha));
  if (L < 8.0 * diff_len) {
    flags.push_back("domain_len is below 8 diffusion lengths t_max^{1/(2 alpha)}");
  }
  double wrap_tail;
  if (alpha > 1.0 - 1e-9) {
    wrap_tail = std::erfc(0.25 * L / std::sqrt(T));
  } else {
    wrap_tail = tail_coeff(alpha) * T * std::pow(0.5 * L, -2.0 * alpha) / alpha;
  }
  if (wrap_tail > 1e-8) {
    flags.push_back("periodized kernel wrap-around tail exceeds 1e-8 at t_max");
  }
  if (config.noise.kind == fields::NoiseKind::single_bm &&
      config.forcing.family == fields::ForcingFamily::lp_decay &&
      alpha * config.forcing.p <= config.kernel.dim) {
    flags.push_back("moment condition p > d/alpha fails for the requested forcing index");
  }
  if (config.noise.kind == fields::NoiseKind::spacetime_white && alpha <= 0.5 + 1e-12) {
    flags.push_back("white-noise mild solutions need alpha > 1/2 for function-valued output");
  }
  return flags;
}

fields::FieldSample evolve_deterministic(const std::vector<double>& rho0,
                                         const kernel::KernelSpec& kspec,
                                         const fields::GridSpec& grid, int store_every) {
  kernel::validate(kspec);
  fields::validate_grid(grid);
  require_store_every(grid, store_every);
  if (static_cast<int>(rho0.size()) != grid.nx) {
    throw std::invalid_argument("initial data size must equal nx");
  }
  require_finite(rho0, "initial data");

  fft::FftPlan plan(grid.nx);
  Cvec hat0 = to_complex(rho0);
  plan.forward(hat0.data());

  fields::FieldSample out;
  out.grid = grid;
  out.store_every = store_every;
  out.values.assign(static_cast<std::size_t>(out.stored_rows()) * grid.nx, 0.0);
  out.noise_kind = fields::NoiseKind::none;
  out.forcing_family = "deterministic_initial";
  out.alpha = kspec.alpha;

  std::copy(rho0.begin(), rho0.end(), out.values.begin());
  for (int row = 1; row < out.stored_rows(); ++row) {
    const std::vector<double> mult = step_multiplier(kspec, grid, out.time_of_row(row));
    Cvec hat = hat0;
    for (int m = 0; m < grid.nx; ++m) hat[m] *= mult[m];
    plan.inverse(hat.data());
    for (int j = 0; j < grid.nx; ++j) {
      out.values[static_cast<std::size_t>(row) * grid.nx + j] = hat[j].real();
    }
  }
  fields::validate_sample(out);
  return out;
}

std::vector<double> evolve_to_time(const std::vector<double>& rho0,
                                   const kernel::KernelSpec& kspec, const fields::GridSpec& grid,
                                   double t) {
  kernel::validate(kspec);
  fields::validate_grid(grid);
  if (static_cast<int>(rho0.size()) != grid.nx) {
    throw std::invalid_argument("initial data size must equal nx");
  }
  require_finite(rho0, "initial data");
  if (!(t >= 0.0)) throw std::invalid_argument("evolution time must be >= 0");
  fft::FftPlan plan(grid.nx);
  Cvec hat = to_complex(rho0);
  plan.forward(hat.data());
  const std::vector<double> mult = step_multiplier(kspec, grid, t);
  for (int m = 0; m < grid.nx; ++m) hat[m] *= mult[m];
  plan.inverse(hat.data());
  return real_part(hat);
}

fields::FieldSample solve_mild_bm(const SolveConfig& config) {
  if (config.noise.kind != fields::NoiseKind::single_bm) {
    throw std::invalid_argument("solve_mild_bm requires noise kind single_bm");
  }
  require_store_every(config.grid, config.store_every);
  const fields::GridSpec& grid = config.grid;
  fields::FieldSample out = make_output(config);

  const fields::Forcing g = fields::make_forcing(config.forcing, grid);
  out.forcing_family = g.family_name;
  const std::vector<double> dw = fields::sample_bm(config.noise, grid);
  const std::vector<double> mult = step_multiplier(config.kernel, grid, grid.dt());
  const std::vector<double> xs = grid.xs();

  fft::FftPlan plan(grid.nx);
  Cvec state(grid.nx, 0.0);
  Cvec g_hat;
  if (!g.time_dependent) {
    g_hat = to_complex(forcing_row(g, xs, 0.0));
    plan.forward(g_hat.data());
  }

  for (int m = 0; m < grid.nt; ++m) {
    if (g.time_dependent) {
      g_hat = to_complex(forcing_row(g, xs, m * grid.dt()));
      plan.forward(g_hat.data());
    }
    for (int k = 0; k < grid.nx; ++k) state[k] = mult[k] * (state[k] + g_hat[k] * dw[m]);
    if ((m + 1) % config.store_every == 0) {
      Cvec phys = state;
      plan.inverse(phys.data());
      const int row = (m + 1) / config.store_every;
      for (int j = 0; j < grid.nx; ++j) {
        out.values[static_cast<std::size_t>(row) * grid.nx + j] = phys[j].real();
      }
    }
  }
  fields::validate_sample(out);
  return out;
}

fields::FieldSample solve_mild_stwn(const SolveConfig& config) {
  if (config.noise.kind != fields::NoiseKind::spacetime_white) {
    throw std::invalid_argument("solve_mild_stwn requires noise kind spacetime_white");
  }
  if (config.kernel.dim != 1) {
    throw std::invalid_argument("white-noise mild solutions are defined in dimension 1 only");
  }
  require_store_every(config.grid, config.store_every);
  const fields::GridSpec& grid = config.grid;
  fields::FieldSample out = make_output(config);

  const fields::Forcing g = fields::make_forcing(config.forcing, grid);
  out.forcing_family = g.family_name;
  const std::vector<double> mult = step_multiplier(config.kernel, grid, grid.dt());
  const std::vector<double> xs = grid.xs();
  const double inv_dx = 1.0 / grid.dx();
  const double sd = std::sqrt(grid.dt() * grid.dx());

  fft::FftPlan plan(grid.nx);
  Cvec state(grid.nx, 0.0);
  Cvec impulse(grid.nx);
  std::vector<double> g_row = forcing_row(g, xs, 0.0);

  for (int m = 0; m < grid.nt; ++m) {
    if (g.time_dependent && m > 0) g_row = forcing_row(g, xs, m * grid.dt());
    for (int j = 0; j < grid.nx; ++j) {
      const std::uint64_t cell = static_cast<std::uint64_t>(m) * grid.nx + j;
      const double dw =
          sd * rng::normal(config.noise.seed, rng::Stream::stwn_increments,
                           static_cast<std::uint64_t>(config.noise.replicate_id), cell);
      impulse[j] = g_row[j] * dw * inv_dx;
    }
    plan.forward(impulse.data());
    for (int k = 0; k < grid.nx; ++k) state[k] = mult[k] * (state[k] + impulse[k]);
    if ((m + 1) % config.store_every == 0) {
      Cvec phys = state;
      plan.inverse(phys.data());
      const int row = (m + 1) / config.store_every;
      for (int j = 0; j < grid.nx; ++j) {
        out.values[static_cast<std::size_t>(row) * grid.nx + j] = phys[j].real();
      }
    }
  }
  fields::validate_sample(out);
  return out;
}

std::vector<double> bm_variance_oracle(const SolveConfig& config, int step) {
  if (config.noise.kind != fields::NoiseKind::single_bm) {
    throw std::invalid_argument("bm_variance_oracle requires noise kind single_bm");
  }
  const fields::GridSpec& grid = config.grid;
  fields::validate_grid(grid);
  if (step < 0 || step > grid.nt) throw std::invalid_argument("oracle step out of range");

  const fields::Forcing g = fields::make_forcing(config.forcing, grid);
  const std::vector<double> mult = step_multiplier(config.kernel, grid, grid.dt());
  const std::vector<double> xs = grid.xs();
  fft::FftPlan plan(grid.nx);

  Cvec g_hat;
  if (!g.time_dependent) {
    g_hat = to_complex(forcing_row(g, xs, 0.0));
    plan.forward(g_hat.data());
  }
  std::vector<double> var(grid.nx, 0.0);
  for (int m = 0; m < step; ++m) {
    if (g.time_dependent) {
      g_hat = to_complex(forcing_row(g, xs, m * grid.dt()));
      plan.forward(g_hat.data());
    }
    Cvec term(grid.nx);
    for (int k = 0; k < grid.nx; ++k) {
      term[k] = g_hat[k] * std::pow(mult[k], step - m);
    }
    plan.inverse(term.data());
    for (int j = 0; j < grid.nx; ++j) {
      var[j] += grid.dt() * term[j].real() * term[j].real();
    }
  }
  return var;
}

std::vector<double> stwn_variance_oracle(const SolveConfig& config, int step) {
  if (config.noise.kind != fields::NoiseKind::spacetime_white) {
    throw std::invalid_argument("stwn_variance_oracle requires noise kind spacetime_white");
  }
  const fields::GridSpec& grid = config.grid;
  fields::validate_grid(grid);
  if (step < 0 || step > grid.nt) throw std::invalid_argument("oracle step out of range");

  const fields::Forcing g = fields::make_forcing(config.forcing, grid);
  const std::vector<double> xs = grid.xs();
  const double inv_dx = 1.0 / grid.dx();
  fft::FftPlan plan(grid.nx);

  std::vector<double> g_row = forcing_row(g, xs, 0.0);
  Cvec g_sq_hat(grid.nx);
  auto refresh_gsq = [&](const std::vector<double>& row) {
    for (int j = 0; j < grid.nx; ++j) g_sq_hat[j] = row[j] * row[j];
    plan.forward(g_sq_hat.data());
  };
  refresh_gsq(g_row);

  std::vector<double> var(grid.nx, 0.0);
  for (int m = 0; m < step; ++m) {
    if (g.time_dependent && m > 0) {
      g_row = forcing_row(g, xs, m * grid.dt());
      refresh_gsq(g_row);
    }
    // Discrete kernel row at lag (step - m) dt, squared, circularly convolved
    // with g^2: gives sum_j K^2(x_i - x_j) g^2(x_j) for all i at once.
    Cvec krow = to_complex(step_multiplier(config.kernel, grid, (step - m) * grid.dt()));
    plan.inverse(krow.data());
    Cvec ksq(grid.nx);
    for (int j = 0; j < grid.nx; ++j) {
      const double kv = krow[j].real() * inv_dx;
      ksq[j] = kv * kv;
    }
    plan.forward(ksq.data());
    for (int k = 0; k < grid.nx; ++k) ksq[k] *= g_sq_hat[k];
    plan.inverse(ksq.data());
    for (int j = 0; j < grid.nx; ++j) {
      var[j] += grid.dt() * grid.dx() * ksq[j].real();
    }
  }
  return var;
}

double stwn_increment_second_moment(const SolveConfig& config, int step_a, int step_b,
                                    double space_lag) {
  if (config.noise.kind != fields::NoiseKind::spacetime_white) {
    throw std::invalid_argument("oracle requires noise kind spacetime_white");
  }
  if (config.forcing.family != fields::ForcingFamily::constant) {
    throw std::invalid_argument("closed-form increment oracle requires constant forcing");
  }
  const fields::GridSpec& grid = config.grid;
  fields::validate_grid(grid);
  int a = step_a, b = step_b;
  if (a < b) std::swap(a, b);
  if (b < 0 || a > grid.nt) throw std::invalid_argument("oracle steps out of range");

  const double amp2 = config.forcing.amplitude * config.forcing.amplitude;
  const double two_a = 2.0 * config.kernel.alpha;
  const double dt = grid.dt();
  double total = 0.0;
  for (int m = 0; m < grid.nx; ++m) {
    const double lam = std::pow(mode_abs(m, grid.nx, grid.domain_len), two_a);
    const double r = std::exp(-dt * lam);
    double var_a, var_b, cov;
    if (r >= 1.0) {  // zero mode
      var_a = a;
      var_b = b;
      cov = b;
    } else {
      const double r2 = r * r;
      auto geom = [&](int n) { return r2 * (1.0 - std::pow(r2, n)) / (1.0 - r2); };
      var_a = geom(a);
      var_b = geom(b);
      cov = r2 * (std::pow(r, a - b) - std::pow(r, a + b)) / (1.0 - r2);
    }
    const double k = mode_abs(m, grid.nx, grid.domain_len) *
                     (m <= grid.nx / 2 ? 1.0 : -1.0);  // signed frequency
    total += var_a + var_b - 2.0 * std::cos(k * space_lag) * cov;
  }
  return amp2 * dt / grid.domain_len * total;
}

std::vector<double> dirichlet_semigroup(const std::vector<double>& F, double t) {
  if (F.empty()) throw std::invalid_argument("dirichlet_semigroup needs nonempty data");
  require_finite(F, "boundary-value data");
  if (!(t >= 0.0)) throw std::invalid_argument("evolution time must be >= 0");
  const int n = static_cast<int>(F.size());
  fft::DstPlan plan(n);
  std::vector<double> coef(n), out(n);
  plan.apply(F, coef);
  for (int k = 1; k <= n; ++k) {
    coef[k - 1] *= std::exp(-static_cast<double>(k) * k * t) * 2.0 / (n + 1);
  }
  plan.apply(coef, out);
  return out;
}

}  // namespace fhlab::solver
