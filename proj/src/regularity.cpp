#include "fhlab/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "fhlab/linear_fit.hpp"
#include "fhlab/philox.hpp"
#include "fhlab/seminorms.hpp"
#include "fhlab/solver.hpp"

namespace fhlab::regularity {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Log-log fit plus the shared diagnostic flags: degenerate when the fit is
// poor, out_of_regime when the decay visibly accelerates (super-algebraic).
void fill_fit_diagnostics(ExponentFit& fit) {
  const std::size_t n = fit.scales.size();
  if (n < 2) {
    fit.degenerate = true;
    fit.out_of_regime = true;
    return;
  }
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    lx[i] = std::log(fit.scales[i]);
    ly[i] = std::log(fit.statistics[i]);
  }
  const fit::LineFit line = fit::fit_line(lx, ly);
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.r_squared = line.r_squared;
  fit.degenerate = fit.r_squared < 0.9;
  if (n >= 6) {
    const std::size_t half = n / 2;
    std::vector<double> hx(lx.begin(), lx.begin() + half), hy(ly.begin(), ly.begin() + half);
    std::vector<double> tx(lx.begin() + half, lx.end()), ty(ly.begin() + half, ly.end());
    const double s_head = fit::fit_line(hx, hy).slope;
    const double s_tail = fit::fit_line(tx, ty).slope;
    if (s_tail < s_head - 1.0) fit.out_of_regime = true;
  }
}

double sample_stat(const fields::FieldSample& s, int row, int col) { return s.at(row, col); }

}  // namespace

ExponentPlan make_plan(double p, double alpha, int d, NoiseRegime kind, double beta,
                       double delta_gap) {
  std::vector<std::string> bad;
  if (!(p >= 1.0)) bad.push_back("moment order must satisfy p >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) bad.push_back("dissipation exponent must lie in (0, 1]");
  if (d != 1 && d != 2) bad.push_back("dimension must be 1 or 2");
  if (!(beta > 0.0)) bad.push_back("target index must be positive");

  double beta_max = 0.0;
  if (kind == NoiseRegime::single_bm) {
    if (p * alpha <= d)
      bad.push_back("moment order too small for the single-noise regime: need p > d/alpha");
    beta_max = alpha - d / p;
    if (bad.empty() && beta > beta_max + 1e-12)
      bad.push_back("target index " + fmt(beta) + " exceeds the single-noise ceiling alpha - d/p = " +
                    fmt(beta_max));
  } else {
    if (d != 1) bad.push_back("white-noise plans require dimension 1");
    if (!(alpha > 0.5))
      bad.push_back("white-noise regularity needs dissipation exponent > 1/2");
    else if (p * (2.0 * alpha - 1.0) <= 2.0)
      bad.push_back("moment order too small for the white-noise regime: need p > 2/(2 alpha - 1)");
    beta_max = (2.0 * alpha - 1.0) / 2.0 - 1.0 / p;
    if (bad.empty() && beta > beta_max + 1e-12)
      bad.push_back("target index " + fmt(beta) +
                    " exceeds the white-noise ceiling (2 alpha - 1)/2 - 1/p = " + fmt(beta_max));
  }
  if (bad.empty() && !(delta_gap > 0.0 && delta_gap < beta * p / 2.0))
    bad.push_back("slack parameter must lie in (0, beta p / 2)");

  if (!bad.empty()) {
    std::string msg = "inadmissible exponent plan: " + bad[0];
    for (std::size_t i = 1; i < bad.size(); ++i) msg += "; " + bad[i];
    throw std::invalid_argument(msg);
  }

  ExponentPlan plan;
  plan.p = p;
  plan.alpha = alpha;
  plan.d = d;
  plan.kind = kind;
  plan.beta = beta;
  plan.beta_max = beta_max;
  plan.delta_gap = delta_gap;
  plan.theta = 1.0 + beta * p / (d + 2);
  plan.q = 2.0 * (d + 2) / delta_gap;
  plan.beta_star = beta - 2.0 * delta_gap / p;
  plan.r = plan.q / 2.0;
  return plan;
}

IncrementScan::IncrementScan(const ExponentPlan& plan, const fields::FieldSample& prototype,
                             const ProbeSpec& probe)
    : plan_(plan), probe_(probe) {
  fields::validate_sample(prototype);
  if (probe.shells < 1 || probe.shells > 24) throw std::invalid_argument("shell count out of range");
  if (probe.pairs_per_shell < 5)
    throw std::invalid_argument("need at least 5 probe pairs per shell");
  if (!(probe.anchor_t_frac >= 0.0 && probe.anchor_t_frac < 1.0))
    throw std::invalid_argument("anchor time fraction must lie in [0, 1)");
  if (probe.cls == PairClass::pure_time && probe.scale == ScaleKind::raw_space)
    throw std::invalid_argument("pure time pairs have no spatial scale");
  if (probe.cls == PairClass::pure_space && probe.scale == ScaleKind::raw_time)
    throw std::invalid_argument("pure space pairs have no temporal scale");

  rows_ = prototype.stored_rows();
  nx_ = prototype.grid.nx;
  const double dx = prototype.grid.dx();
  const double h_t = prototype.store_every * prototype.grid.dt();
  const int row_lo_base =
      std::min(rows_ - 1, static_cast<int>(std::ceil(probe.anchor_t_frac * (rows_ - 1))));

  for (int s = 0; s < probe.shells; ++s) {
    long col_lag = 0, row_lag = 0;
    switch (probe.cls) {
      case PairClass::pure_space:
        col_lag = 1L << s;
        break;
      case PairClass::pure_time:
        row_lag = 1L << s;
        break;
      case PairClass::mixed: {
        col_lag = 1L << s;
        const double want = (col_lag * dx) * (col_lag * dx) / h_t;
        row_lag = std::max(1L, std::lround(want));
        break;
      }
    }
    const bool space_ok = col_lag <= nx_ / 2;
    const int row_hi = rows_ - 1 - static_cast<int>(row_lag);
    const bool time_ok = row_lag <= 0 || row_lo_base <= row_hi;
    if (!space_ok || !time_ok || row_hi < 0) {
      ++dropped_shells_;
      continue;
    }

    double scale = 0.0;
    switch (probe_.scale) {
      case ScaleKind::raw_space:
        scale = col_lag * dx;
        break;
      case ScaleKind::raw_time:
        scale = row_lag * h_t;
        break;
      case ScaleKind::parabolic:
        scale = std::max(col_lag * dx, std::sqrt(row_lag * h_t));
        break;
    }

    const int shell_idx = static_cast<int>(scales_.size());
    const int anchor_hi = row_lag > 0 ? row_hi : rows_ - 1;
    for (int k = 0; k < probe.pairs_per_shell; ++k) {
      double u1 = 0.0, u2 = 0.0;
      rng::uniform_pair(probe.seed, rng::Stream::pair_sampling, 0,
                           static_cast<std::uint64_t>(s) * 1000003u + static_cast<std::uint64_t>(k),
                           u1, u2);
      const int span = anchor_hi - row_lo_base + 1;
      int row_a = row_lo_base + std::min(span - 1, static_cast<int>(u1 * span));
      int col_a = std::min(nx_ - 1, static_cast<int>(u2 * nx_));
      ProbePair pp;
      pp.row_a = row_a;
      pp.col_a = col_a;
      pp.row_b = row_a + static_cast<int>(row_lag);
      pp.col_b = static_cast<int>((col_a + col_lag) % nx_);
      pp.shell = shell_idx;
      pairs_.push_back(pp);
    }
    scales_.push_back(scale);
    lags_.push_back({static_cast<int>(row_lag), static_cast<int>(col_lag)});
    pairs_per_usable_shell_.push_back(probe.pairs_per_shell);
  }
  if (scales_.empty()) throw std::invalid_argument("no usable probe shells on this grid");
  sums_.assign(static_cast<std::size_t>(kBatches) * scales_.size(), 0.0);
  counts_.assign(sums_.size(), 0);
}

std::pair<int, int> IncrementScan::shell_lags(int shell) const {
  return lags_.at(static_cast<std::size_t>(shell));
}

void IncrementScan::add_replicate(const fields::FieldSample& sample) {
  if (sample.stored_rows() != rows_ || sample.grid.nx != nx_)
    throw std::invalid_argument("replicate storage shape differs from the prototype");
  const std::size_t n_shells = scales_.size();
  const int batch = n_reps_ % kBatches;
  for (const ProbePair& pp : pairs_) {
    const double diff =
        sample_stat(sample, pp.row_a, pp.col_a) - sample_stat(sample, pp.row_b, pp.col_b);
    const std::size_t slot = static_cast<std::size_t>(batch) * n_shells + pp.shell;
    sums_[slot] += std::pow(std::abs(diff), plan_.p);
    counts_[slot] += 1;
  }
  ++n_reps_;
}

ExponentFit IncrementScan::finish() const {
  if (n_reps_ == 0) throw std::runtime_error("no replicates accumulated");
  const std::size_t n_shells = scales_.size();
  ExponentFit fit;
  fit.dropped_shells = dropped_shells_;
  std::vector<int> kept_idx;
  for (std::size_t s = 0; s < n_shells; ++s) {
    double sum = 0.0;
    long count = 0;
    for (int b = 0; b < kBatches; ++b) {
      sum += sums_[static_cast<std::size_t>(b) * n_shells + s];
      count += counts_[static_cast<std::size_t>(b) * n_shells + s];
    }
    const double stat = count > 0 ? sum / count : 0.0;
    if (count > 0 && stat > 0.0 && std::isfinite(stat)) {
      fit.scales.push_back(scales_[s]);
      fit.statistics.push_back(stat);
      fit.pair_counts.push_back(count);
      kept_idx.push_back(static_cast<int>(s));
    } else {
      ++fit.dropped_shells;
    }
  }
  if (fit.dropped_shells > probe_.shells / 2) fit.out_of_regime = true;
  fill_fit_diagnostics(fit);

  // Batch-means uncertainty: refit the slope on each replicate batch.
  std::vector<double> batch_slopes;
  for (int b = 0; b < kBatches; ++b) {
    std::vector<double> lx, ly;
    for (int s : kept_idx) {
      const std::size_t slot = static_cast<std::size_t>(b) * n_shells + s;
      if (counts_[slot] == 0) continue;
      const double stat = sums_[slot] / counts_[slot];
      if (stat > 0.0 && std::isfinite(stat)) {
        lx.push_back(std::log(scales_[s]));
        ly.push_back(std::log(stat));
      }
    }
    if (lx.size() >= 2) batch_slopes.push_back(fit::fit_line(lx, ly).slope);
  }
  if (batch_slopes.size() >= 2) {
    double mean = 0.0;
    for (double v : batch_slopes) mean += v;
    mean /= batch_slopes.size();
    double var = 0.0;
    for (double v : batch_slopes) var += (v - mean) * (v - mean);
    var /= (batch_slopes.size() - 1);
    fit.conf_half_width = 1.96 * std::sqrt(var / batch_slopes.size());
  }
  return fit;
}

ExponentFit moment_increment_scan(const std::vector<fields::FieldSample>& ensemble,
                                  const ExponentPlan& plan, const ProbeSpec& probe) {
  if (ensemble.empty()) throw std::invalid_argument("ensemble is empty");
  IncrementScan scan(plan, ensemble.front(), probe);
  for (const auto& s : ensemble) scan.add_replicate(s);
  return scan.finish();
}

ChainingReport chaining_bound(const std::vector<double>& path, double alpha_exp, int levels) {
  if (!(alpha_exp > 0.0 && alpha_exp <= 1.0))
    throw std::invalid_argument("chaining exponent must lie in (0, 1]");
  if (levels < 1 || levels > 14) throw std::invalid_argument("level count out of range");
  const std::size_t n = (std::size_t{1} << levels) + 1;
  if (path.size() != n)
    throw std::invalid_argument("path must be sampled on the dyadic lattice, size 2^levels + 1");
  for (double v : path)
    if (!std::isfinite(v)) throw std::invalid_argument("path contains a non-finite value");

  ChainingReport rep;
  rep.alpha_exp = alpha_exp;
  rep.levels = levels;
  rep.k_values.assign(static_cast<std::size_t>(levels) + 1, 0.0);
  for (int i = 0; i <= levels; ++i) {
    const std::size_t stride = std::size_t{1} << (levels - i);
    double ki = 0.0;
    for (std::size_t k = 0; (k + 1) * stride < n; ++k)
      ki = std::max(ki, std::abs(path[(k + 1) * stride] - path[k * stride]));
    rep.k_values[static_cast<std::size_t>(i)] = ki;
  }
  const double mesh = 1.0 / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double ratio =
          std::abs(path[j] - path[i]) / std::pow(static_cast<double>(j - i) * mesh, alpha_exp);
      rep.lhs = std::max(rep.lhs, ratio);
    }
  double rhs = 0.0;
  for (int i = 0; i <= levels; ++i)
    rhs += std::pow(2.0, i * alpha_exp) * rep.k_values[static_cast<std::size_t>(i)];
  rep.rhs = 2.0 * rhs;
  rep.pass = rep.lhs <= rep.rhs * (1.0 + 1e-12) + 1e-300;
  return rep;
}

TailSplitReport tail_moment_split(const std::vector<double>& samples, double threshold,
                                  double p) {
  if (samples.empty()) throw std::invalid_argument("no samples");
  if (!(p >= 1.0)) throw std::invalid_argument("moment order must satisfy p >= 1");
  if (!(threshold >= 0.0)) throw std::invalid_argument("threshold must be nonnegative");
  const std::size_t n = samples.size();
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(samples[i])) throw std::invalid_argument("sample is not finite");
    ys[i] = std::abs(samples[i]);
  }
  std::sort(ys.begin(), ys.end());

  TailSplitReport rep;
  rep.p = p;
  rep.threshold = threshold;
  double direct = 0.0, comp = 0.0;
  for (double y : ys) {  // Kahan sum of |x|^p
    const double term = std::pow(y, p) - comp;
    const double next = direct + term;
    comp = (next - direct) - term;
    direct = next;
  }
  rep.moment_direct = direct / static_cast<double>(n);

  // Exact empirical layer-cake: integrate the survival step function of |X|^p.
  double layer = 0.0, prev_pow = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double cur_pow = std::pow(ys[i], p);
    const double frac_above = static_cast<double>(n - i) / static_cast<double>(n);
    layer += frac_above * (cur_pow - prev_pow);
    prev_pow = cur_pow;
  }
  rep.moment_layer_cake = layer;

  const double mp = std::pow(threshold, p);
  double excess = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    if (ys[i] <= threshold) break;
    excess += std::pow(ys[i], p) - mp;
  }
  rep.split_bound = mp + excess / static_cast<double>(n);

  const double denom = std::max(std::abs(rep.moment_direct), 1e-300);
  rep.identity_rel_err = std::abs(rep.moment_layer_cake - rep.moment_direct) / denom;
  rep.identity_ok = rep.identity_rel_err < 1e-10;
  rep.bound_ok = rep.moment_direct <= rep.split_bound * (1.0 + 1e-12) + 1e-300;
  return rep;
}

std::vector<double> make_rough_initial(const ExponentPlan& plan, const fields::GridSpec& grid,
                                       std::uint64_t seed, bool tuned_for_time_lag) {
  fields::validate_grid(grid);
  int levels = 2;
  if (grid.nx > 64) {
    levels = static_cast<int>(std::floor(std::log2(grid.nx / 64.0))) + 1;
    levels = std::clamp(levels, 2, 12);
  }
  fields::ForcingSpec fs;
  fs.family = fields::ForcingFamily::lp_decay;
  fs.amplitude = 1.0;
  fs.beta = plan.beta;
  fs.p = plan.p;
  fs.levels = levels;
  fs.height_decay = tuned_for_time_lag ? 2.0 * plan.alpha * (1.0 - plan.beta) : 0.0;
  fs.pattern_seed = seed;
  const fields::Forcing forcing = fields::make_forcing(fs, grid);
  std::vector<double> rho0(static_cast<std::size_t>(grid.nx));
  const std::vector<double> xs = grid.xs();
  for (int j = 0; j < grid.nx; ++j) rho0[static_cast<std::size_t>(j)] = forcing.fn(0.0, xs[j]);
  return rho0;
}

namespace {

SmoothingReport fit_decay_series(const std::vector<double>& ts, const std::vector<double>& stats,
                                 double expected) {
  SmoothingReport rep;
  rep.expected_slope = expected;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (stats[i] > 0.0 && std::isfinite(stats[i])) {
      rep.fit.scales.push_back(ts[i]);
      rep.fit.statistics.push_back(stats[i]);
      rep.fit.pair_counts.push_back(1);
    } else {
      ++rep.fit.dropped_shells;
    }
  }
  if (rep.fit.dropped_shells > static_cast<int>(ts.size()) / 2) rep.fit.out_of_regime = true;
  fill_fit_diagnostics(rep.fit);
  rep.pass = !rep.fit.degenerate && !rep.fit.out_of_regime &&
             std::abs(rep.fit.slope - expected) <= 0.1;
  return rep;
}

void check_decay_times(const std::vector<double>& ts) {
  if (ts.size() < 4) throw std::invalid_argument("need at least 4 sample times");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!(ts[i] > 0.0)) throw std::invalid_argument("sample times must be positive");
    if (i > 0 && !(ts[i] > ts[i - 1]))
      throw std::invalid_argument("sample times must be strictly increasing");
  }
}

}  // namespace

SmoothingReport holder_norm_decay(const ExponentPlan& plan, const std::vector<double>& rho0,
                                  const fields::GridSpec& grid, const std::vector<double>& ts) {
  if (plan.d != 1) throw std::invalid_argument("decay scans run on the line only");
  check_decay_times(ts);
  const kernel::KernelSpec kspec = kernel::make_spec(plan.alpha, 1);
  std::vector<double> stats;
  stats.reserve(ts.size());
  for (double t : ts) {
    const std::vector<double> rho = solver::evolve_to_time(rho0, kspec, grid, t);
    stats.push_back(
        seminorms::spatial_holder_norm(rho, grid.dx(), plan.beta, grid.domain_len));
  }
  const double expected = -(plan.beta + static_cast<double>(plan.d) / plan.p) / (2.0 * plan.alpha);
  SmoothingReport rep = fit_decay_series(ts, stats, expected);
  return rep;
}

SmoothingReport verify_smoothing(const ExponentPlan& plan, const std::vector<double>& rho0,
                                 const fields::GridSpec& grid, double lag,
                                 const std::vector<double>& ts) {
  if (plan.d != 1) throw std::invalid_argument("decay scans run on the line only");
  if (!(lag > 0.0)) throw std::invalid_argument("time lag must be positive");
  check_decay_times(ts);
  const kernel::KernelSpec kspec = kernel::make_spec(plan.alpha, 1);
  std::vector<double> stats;
  stats.reserve(ts.size());
  for (double t : ts) {
    const std::vector<double> now = solver::evolve_to_time(rho0, kspec, grid, t);
    const std::vector<double> later = solver::evolve_to_time(now, kspec, grid, lag);
    double sup = 0.0;
    for (std::size_t j = 0; j < now.size(); ++j) sup = std::max(sup, std::abs(later[j] - now[j]));
    stats.push_back(sup);
  }
  const double expected =
      -plan.beta - static_cast<double>(plan.d) / (2.0 * plan.p * plan.alpha);
  SmoothingReport rep = fit_decay_series(ts, stats, expected);
  rep.lag = lag;
  return rep;
}

fields::FieldSample make_fbm_sample(const fields::GridSpec& grid, int store_every, double hurst,
                                    std::uint64_t seed, int replicate) {
  fields::validate_grid(grid);
  if (store_every < 1 || grid.nt % store_every != 0)
    throw std::invalid_argument("storage stride must divide the step count");
  if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("Hurst index must lie in (0, 1)");
  const int rows = grid.nt / store_every + 1;
  const int m = rows - 1;  // random times t_1 .. t_m
  if (m > 2048) throw std::invalid_argument("too many stored rows for exact path synthesis");
  const double h_t = store_every * grid.dt();

  // Covariance of fractional Brownian motion at the stored times, factored
  // in place by Cholesky; the path is then a correlated Gaussian draw.
  std::vector<double> c(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= i; ++j) {
      const double ti = (i + 1) * h_t, tj = (j + 1) * h_t;
      const double v = 0.5 * (std::pow(ti, 2.0 * hurst) + std::pow(tj, 2.0 * hurst) -
                              std::pow(ti - tj, 2.0 * hurst));
      c[static_cast<std::size_t>(i) * m + j] = v;
    }
  for (int j = 0; j < m; ++j) {
    double diag = c[static_cast<std::size_t>(j) * m + j];
    for (int k = 0; k < j; ++k) {
      const double l = c[static_cast<std::size_t>(j) * m + k];
      diag -= l * l;
    }
    if (!(diag > 0.0)) throw std::runtime_error("path covariance lost positive definiteness");
    const double lj = std::sqrt(diag);
    c[static_cast<std::size_t>(j) * m + j] = lj;
    for (int i = j + 1; i < m; ++i) {
      double v = c[static_cast<std::size_t>(i) * m + j];
      for (int k = 0; k < j; ++k)
        v -= c[static_cast<std::size_t>(i) * m + k] * c[static_cast<std::size_t>(j) * m + k];
      c[static_cast<std::size_t>(i) * m + j] = v / lj;
    }
  }
  std::vector<double> z(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i)
    z[static_cast<std::size_t>(i)] = rng::normal(seed, rng::Stream::fbm_path,
                                                    static_cast<std::uint32_t>(replicate),
                                                    static_cast<std::uint64_t>(i));
  std::vector<double> path(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < m; ++i) {
    double v = 0.0;
    for (int k = 0; k <= i; ++k) v += c[static_cast<std::size_t>(i) * m + k] * z[k];
    path[static_cast<std::size_t>(i)] = v;
  }

  fields::FieldSample out;
  out.grid = grid;
  out.store_every = store_every;
  out.noise_kind = fields::NoiseKind::single_bm;
  out.seed = seed;
  out.replicate = replicate;
  out.forcing_family = "fbm";
  out.alpha = hurst;
  out.values.assign(static_cast<std::size_t>(rows) * grid.nx, 0.0);
  for (int r = 1; r < rows; ++r)
    for (int j = 0; j < grid.nx; ++j)
      out.values[static_cast<std::size_t>(r) * grid.nx + j] = path[static_cast<std::size_t>(r - 1)];
  return out;
}

}  // namespace fhlab::regularity
