#include "fhlab/fields.hpp"

#include <cmath>
#include <stdexcept>

#include "fhlab/philox.hpp"

namespace fhlab::fields {
namespace {

constexpr double kPi = 3.14159265358979323846;

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Distance from x to the nearest lattice image of 0 on the torus.
double torus_abs(double x, double len) {
  double r = std::remainder(x, len);
  return std::abs(r);
}

struct Spike {
  double center = 0.0;
  double width = 1.0;
  double height = 0.0;
};

}  // namespace

std::vector<double> GridSpec::ts() const {
  std::vector<double> out(nt + 1);
  for (int n = 0; n <= nt; ++n) out[n] = n * dt();
  return out;
}

std::vector<double> GridSpec::xs() const {
  std::vector<double> out(nx);
  for (int j = 0; j < nx; ++j) out[j] = -0.5 * domain_len + j * dx();
  return out;
}

void validate_grid(const GridSpec& grid) {
  if (!(grid.t_max > 0.0)) throw std::invalid_argument("grid t_max must be > 0");
  if (grid.nt < 2) throw std::invalid_argument("grid nt must be >= 2");
  if (!(grid.domain_len > 0.0)) throw std::invalid_argument("grid domain_len must be > 0");
  if (grid.nx < 4 || !power_of_two(grid.nx)) {
    throw std::invalid_argument("grid nx must be a power of two >= 4");
  }
}

Forcing make_forcing(const ForcingSpec& spec, const GridSpec& grid) {
  validate_grid(grid);
  if (!std::isfinite(spec.amplitude)) throw std::invalid_argument("forcing amplitude not finite");

  switch (spec.family) {
    case ForcingFamily::constant: {
      const double a = spec.amplitude;
      return {[a](double, double) { return a; }, false, "constant"};
    }
    case ForcingFamily::holder_vanishing: {
      if (!(spec.beta > 0.0 && spec.beta < 1.0)) {
        throw std::invalid_argument("holder_vanishing requires beta in (0, 1)");
      }
      const double a = spec.amplitude, beta = spec.beta, radius = spec.radius;
      const double len = grid.domain_len;
      if (!(radius > 0.0)) throw std::invalid_argument("holder_vanishing radius must be > 0");
      // Parabolic distance to the space-time origin, clipped at `radius`; the
      // clip keeps the Hölder constant at amplitude while flattening the far
      // field.  g(0, 0) = 0.
      return {[a, beta, radius, len](double t, double x) {
                const double rho = std::max(std::sqrt(std::max(t, 0.0)), torus_abs(x, len));
                return a * std::pow(std::min(rho, radius), beta);
              },
              true, "holder_vanishing"};
    }
    case ForcingFamily::lp_decay: {
      if (!(spec.p >= 1.0)) throw std::invalid_argument("lp_decay requires p >= 1");
      if (spec.levels < 1 || spec.levels > 24) {
        throw std::invalid_argument("lp_decay levels must lie in [1, 24]");
      }
      // Dyadic generations of C^1 bumps: generation j has fixed spike count,
      // widths ~2^{-j}, heights amplitude * 2^{j/p} * 2^{-height_decay*j}, so
      // without extra damping every generation carries the same L^p mass.
      const int per_level = 3;
      std::vector<Spike> spikes;
      const double w0 = grid.domain_len / 16.0;
      for (int j = 0; j < spec.levels; ++j) {
        const double w = w0 * std::pow(2.0, -j);
        const double h = spec.amplitude * std::pow(2.0, j / spec.p) *
                         std::pow(2.0, -spec.height_decay * j);
        for (int s = 0; s < per_level; ++s) {
          const std::uint64_t cell = static_cast<std::uint64_t>(j) * 64 + 2 * s;
          const double u_pos =
              rng::uniform(spec.pattern_seed, rng::Stream::rough_data, 0, cell);
          const double u_sign =
              rng::uniform(spec.pattern_seed, rng::Stream::rough_data, 0, cell + 1);
          spikes.push_back({(u_pos - 0.5) * grid.domain_len, w, u_sign < 0.5 ? -h : h});
        }
      }
      const double len = grid.domain_len;
      return {[spikes, len](double, double x) {
                double v = 0.0;
                for (const Spike& s : spikes) {
                  const double d = torus_abs(x - s.center, len);
                  if (d >= s.width) continue;
                  const double c = std::cos(0.5 * kPi * d / s.width);
                  v += s.height * c * c;
                }
                return v;
              },
              false, "lp_decay"};
    }
  }
  throw std::invalid_argument("unknown forcing family");
}

std::vector<double> sample_bm(const NoiseSpec& noise, const GridSpec& grid) {
  validate_grid(grid);
  if (noise.kind != NoiseKind::single_bm) {
    throw std::invalid_argument("sample_bm requires noise kind single_bm");
  }
  const double sd = std::sqrt(grid.dt());
  std::vector<double> out(grid.nt);
  for (int n = 0; n < grid.nt; ++n) {
    out[n] = sd * rng::normal(noise.seed, rng::Stream::bm_increments,
                              static_cast<std::uint64_t>(noise.replicate_id), n);
  }
  return out;
}

std::vector<double> sample_stwn(const NoiseSpec& noise, const GridSpec& grid) {
  validate_grid(grid);
  if (noise.kind != NoiseKind::spacetime_white) {
    throw std::invalid_argument("sample_stwn requires noise kind spacetime_white");
  }
  const double sd = std::sqrt(grid.dt() * grid.dx());
  std::vector<double> out(static_cast<std::size_t>(grid.nt) * grid.nx);
  for (int n = 0; n < grid.nt; ++n) {
    for (int j = 0; j < grid.nx; ++j) {
      const std::uint64_t cell = static_cast<std::uint64_t>(n) * grid.nx + j;
      out[cell] = sd * rng::normal(noise.seed, rng::Stream::stwn_increments,
                                   static_cast<std::uint64_t>(noise.replicate_id), cell);
    }
  }
  return out;
}

void validate_sample(const FieldSample& sample) {
  validate_grid(sample.grid);
  if (sample.store_every < 1 || sample.grid.nt % sample.store_every != 0) {
    throw std::invalid_argument("store_every must divide nt");
  }
  const std::size_t want =
      static_cast<std::size_t>(sample.stored_rows()) * sample.grid.nx;
  if (sample.values.size() != want) {
    throw std::invalid_argument("field sample shape mismatch: expected (rows x nx) values");
  }
  for (double v : sample.values) {
    if (!std::isfinite(v)) throw std::invalid_argument("field sample contains non-finite values");
  }
}

}  // namespace fhlab::fields
