#pragma once

// Discretization domain, reproducible noise sampling, and forcing families.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace fhlab::fields {

// Periodic space-time grid: t_n = n*dt on [0, T], x_j = -L/2 + j*dx on a torus
// of length L.
struct GridSpec {
  double t_max = 1.0;
  int nt = 2;
  double domain_len = 1.0;
  int nx = 4;

  double dt() const { return t_max / nt; }
  double dx() const { return domain_len / nx; }
  std::vector<double> ts() const;
  std::vector<double> xs() const;
};

void validate_grid(const GridSpec& grid);

enum class NoiseKind { single_bm, spacetime_white, none };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::single_bm;
  std::uint64_t seed = 0;
  int replicate_id = 0;
};

enum class ForcingFamily { constant, holder_vanishing, lp_decay };

struct ForcingSpec {
  ForcingFamily family = ForcingFamily::constant;
  double amplitude = 1.0;
  double beta = 0.5;        // Hölder exponent (holder_vanishing), L^p layer balance (lp_decay)
  double p = 4.0;           // L^p index targeted by lp_decay spike heights
  int levels = 6;           // dyadic spike generations for lp_decay
  double radius = 1.0;      // holder_vanishing growth is clipped at this parabolic radius
  double height_decay = 0.0;  // extra 2^{-decay*j} damping of lp_decay spike heights
  std::uint64_t pattern_seed = 0x5eed;  // fixes the lp_decay spike layout
};

struct Forcing {
  std::function<double(double, double)> fn;  // g(t, x)
  bool time_dependent = false;
  std::string family_name;
};

Forcing make_forcing(const ForcingSpec& spec, const GridSpec& grid);

// nt Brownian increments, N(0, dt), fully determined by (seed, replicate_id).
std::vector<double> sample_bm(const NoiseSpec& noise, const GridSpec& grid);

// nt x nx space-time white noise cell increments, N(0, dt*dx), row-major in
// time; entry (n, j) is the increment on cell [t_n, t_{n+1}) x [x_j, x_{j+1}).
std::vector<double> sample_stwn(const NoiseSpec& noise, const GridSpec& grid);

// One solution path on its storage grid (rows 0, store_every, 2*store_every,
// ... of the solver time grid), immutable after construction.
struct FieldSample {
  GridSpec grid;
  int store_every = 1;
  std::vector<double> values;  // (stored_rows) x nx, row-major in time
  // provenance echo
  NoiseKind noise_kind = NoiseKind::none;
  std::uint64_t seed = 0;
  int replicate = 0;
  std::string forcing_family;
  double alpha = 1.0;
  std::vector<std::string> warnings;

  int stored_rows() const { return grid.nt / store_every + 1; }
  double time_of_row(int row) const { return row * store_every * grid.dt(); }
  double at(int row, int j) const {
    return values[static_cast<std::size_t>(row) * grid.nx + j];
  }
};

void validate_sample(const FieldSample& sample);

}  // namespace fhlab::fields
