#include "fhlab/run.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fhlab/fields.hpp"
#include "fhlab/kernel.hpp"
#include "fhlab/regularity.hpp"
#include "fhlab/report_io.hpp"
#include "fhlab/seminorms.hpp"
#include "fhlab/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fhlab::run {
namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json default_config() {
  return json{
      {"kernel",
       {{"alpha", 0.75}, {"dim", 1}, {"fourier_cutoff", 0.0}, {"quad_points", 24}}},
      {"grid",
       {{"t_max", 1.0}, {"nt", 256}, {"domain_len", 16.0}, {"nx", 256}, {"store_every", 4}}},
      {"noise", {{"kind", "single_bm"}, {"seed", 12345}, {"replicates", 8}}},
      {"forcing",
       {{"family", "holder_vanishing"},
        {"amplitude", 1.0},
        {"beta", 0.5},
        {"p", 4.0},
        {"levels", 5},
        {"radius", 4.0},
        {"height_decay", 0.0},
        {"pattern_seed", 24389}}},
      {"plan",
       {{"p", 4.0},
        {"beta", 0.4},
        {"delta_gap", 0.4},
        {"regime", "single_bm"},
        {"table_alphas", json::array({0.5, 0.75, 1.0})},
        {"table_ps", json::array({4.0, 8.0, 16.0})}}},
      {"probe",
       {{"pair_class", "pure_space"},
        {"scale_kind", "parabolic"},
        {"shells", 5},
        {"pairs_per_shell", 64},
        {"anchor_t_frac", 0.5},
        {"pair_seed", 1234}}},
      {"seminorm",
       {{"p", 2.0},
        {"theta", 1.2},
        {"gamma", 0.5},
        {"time_stride", 8},
        {"space_stride", 8},
        {"radius_levels", 3},
        {"extra_pairs", 2000}}},
      {"chaining", {{"levels", 7}, {"alpha_exp", 0.45}, {"paths", 20}, {"hurst", 0.5}}},
      {"kernel_verify",
       {{"alphas", json::array({0.5, 0.75, 1.0})},
        {"sharp_alphas", json::array({0.25, 0.5, 0.75})},
        {"ts", json::array({0.1, 1.0, 10.0})},
        {"selfsim_points", 100},
        {"ratio_grid_points", 8}}},
      {"tolerances",
       {{"mass", 0.0},  // 0 = pick by dimension (1e-6 on the line, 1e-4 in the plane)
        {"self_similarity", 1e-8},
        {"bound_ratio_spread", 50.0},
        {"derivative", 1e-5},
        {"slope_min", -1e300},
        {"slope_max", 1e300},
        {"seminorm_max", 1e300}}},
      {"output",
       {{"dir", "out"}, {"threads", 1}, {"write_fields", false}, {"record_wall_time", false}}},
  };
}

// Every key in `user` must exist in `schema` with a compatible JSON kind.
void check_against_schema(const json& user, const json& schema, const std::string& prefix) {
  if (!user.is_object()) throw ConfigError("config section '" + prefix + "' must be an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!schema.contains(it.key())) throw ConfigError("unknown config key: " + path);
    const json& sv = schema.at(it.key());
    const json& uv = it.value();
    if (sv.is_object()) {
      check_against_schema(uv, sv, path);
    } else if (sv.is_array()) {
      if (!uv.is_array()) throw ConfigError("config key " + path + " must be an array");
    } else if (sv.is_string()) {
      if (!uv.is_string()) throw ConfigError("config key " + path + " must be a string");
    } else if (sv.is_boolean()) {
      if (!uv.is_boolean()) throw ConfigError("config key " + path + " must be a boolean");
    } else {
      if (!uv.is_number()) throw ConfigError("config key " + path + " must be a number");
    }
  }
}

void merge_into(json& base, const json& user) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    if (base.at(it.key()).is_object() && it.value().is_object())
      merge_into(base.at(it.key()), it.value());
    else
      base[it.key()] = it.value();
  }
}

json load_and_merge(const std::string& path) {
  json cfg = default_config();
  if (path.empty()) return cfg;
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file: " + path);
  json user;
  try {
    user = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error in ") + path + ": " + e.what());
  }
  check_against_schema(user, cfg, "");
  merge_into(cfg, user);
  return cfg;
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

void apply_env_overrides(json& cfg) {
  for (auto sec = cfg.begin(); sec != cfg.end(); ++sec) {
    for (auto kv = sec.value().begin(); kv != sec.value().end(); ++kv) {
      const std::string name = "FHLAB_" + upper(sec.key()) + "_" + upper(kv.key());
      const char* env = std::getenv(name.c_str());
      if (!env) continue;
      if (kv.value().is_string()) {
        kv.value() = std::string(env);
        continue;
      }
      json parsed;
      try {
        parsed = json::parse(env);
      } catch (const json::parse_error&) {
        throw ConfigError("environment override " + name + " is not valid for this key");
      }
      if (kv.value().is_boolean() && !parsed.is_boolean())
        throw ConfigError("environment override " + name + " must be a boolean");
      if (kv.value().is_number() && !parsed.is_number())
        throw ConfigError("environment override " + name + " must be a number");
      if (kv.value().is_array() && !parsed.is_array())
        throw ConfigError("environment override " + name + " must be an array");
      kv.value() = parsed;
    }
  }
}

// The hash identifies the experiment, not its placement: output directory
// and worker count do not change any numbers and are excluded.
std::uint64_t config_hash(const json& cfg) {
  json h = cfg;
  h["output"].erase("dir");
  h["output"].erase("threads");
  return report_io::fnv1a(h.dump());
}

double tol(const json& cfg, const char* name) { return cfg.at("tolerances").at(name).get<double>(); }

kernel::KernelSpec kernel_from(const json& cfg) {
  const json& k = cfg.at("kernel");
  return kernel::make_spec(k.at("alpha").get<double>(), k.at("dim").get<int>(),
                           k.at("fourier_cutoff").get<double>(), k.at("quad_points").get<int>());
}

fields::GridSpec grid_from(const json& cfg) {
  const json& g = cfg.at("grid");
  fields::GridSpec grid;
  grid.t_max = g.at("t_max").get<double>();
  grid.nt = g.at("nt").get<int>();
  grid.domain_len = g.at("domain_len").get<double>();
  grid.nx = g.at("nx").get<int>();
  fields::validate_grid(grid);
  const int se = g.at("store_every").get<int>();
  if (se < 1 || grid.nt % se != 0)
    throw ConfigError("grid.store_every must be a positive divisor of grid.nt");
  return grid;
}

fields::ForcingSpec forcing_from(const json& cfg) {
  const json& f = cfg.at("forcing");
  fields::ForcingSpec fs;
  const std::string fam = f.at("family").get<std::string>();
  if (fam == "constant") fs.family = fields::ForcingFamily::constant;
  else if (fam == "holder_vanishing") fs.family = fields::ForcingFamily::holder_vanishing;
  else if (fam == "lp_decay") fs.family = fields::ForcingFamily::lp_decay;
  else throw ConfigError("forcing.family must be constant, holder_vanishing, or lp_decay");
  fs.amplitude = f.at("amplitude").get<double>();
  fs.beta = f.at("beta").get<double>();
  fs.p = f.at("p").get<double>();
  fs.levels = f.at("levels").get<int>();
  fs.radius = f.at("radius").get<double>();
  fs.height_decay = f.at("height_decay").get<double>();
  fs.pattern_seed = f.at("pattern_seed").get<std::uint64_t>();
  return fs;
}

solver::SolveConfig solve_config_from(const json& cfg) {
  solver::SolveConfig sc;
  sc.kernel = kernel_from(cfg);
  sc.grid = grid_from(cfg);
  const std::string kind = cfg.at("noise").at("kind").get<std::string>();
  if (kind == "single_bm") sc.noise.kind = fields::NoiseKind::single_bm;
  else if (kind == "spacetime_white") sc.noise.kind = fields::NoiseKind::spacetime_white;
  else throw ConfigError("noise.kind must be single_bm or spacetime_white");
  sc.noise.seed = cfg.at("noise").at("seed").get<std::uint64_t>();
  sc.forcing = forcing_from(cfg);
  sc.store_every = cfg.at("grid").at("store_every").get<int>();
  return sc;
}

regularity::NoiseRegime regime_from(const std::string& s) {
  if (s == "single_bm") return regularity::NoiseRegime::single_bm;
  if (s == "spacetime_white") return regularity::NoiseRegime::spacetime_white;
  throw ConfigError("plan.regime must be single_bm or spacetime_white");
}

regularity::ExponentPlan plan_from(const json& cfg) {
  const json& p = cfg.at("plan");
  return regularity::make_plan(p.at("p").get<double>(), cfg.at("kernel").at("alpha").get<double>(),
                               cfg.at("kernel").at("dim").get<int>(),
                               regime_from(p.at("regime").get<std::string>()),
                               p.at("beta").get<double>(), p.at("delta_gap").get<double>());
}

regularity::ProbeSpec probe_from(const json& cfg) {
  const json& p = cfg.at("probe");
  regularity::ProbeSpec probe;
  const std::string cls = p.at("pair_class").get<std::string>();
  if (cls == "pure_space") probe.cls = regularity::PairClass::pure_space;
  else if (cls == "pure_time") probe.cls = regularity::PairClass::pure_time;
  else if (cls == "mixed") probe.cls = regularity::PairClass::mixed;
  else throw ConfigError("probe.pair_class must be pure_space, pure_time, or mixed");
  const std::string sk = p.at("scale_kind").get<std::string>();
  if (sk == "parabolic") probe.scale = regularity::ScaleKind::parabolic;
  else if (sk == "raw_space") probe.scale = regularity::ScaleKind::raw_space;
  else if (sk == "raw_time") probe.scale = regularity::ScaleKind::raw_time;
  else throw ConfigError("probe.scale_kind must be parabolic, raw_space, or raw_time");
  probe.shells = p.at("shells").get<int>();
  probe.pairs_per_shell = p.at("pairs_per_shell").get<int>();
  probe.anchor_t_frac = p.at("anchor_t_frac").get<double>();
  probe.seed = p.at("pair_seed").get<std::uint64_t>();
  if (probe.shells < 1 || probe.shells > 24) throw ConfigError("probe.shells out of range [1, 24]");
  if (probe.pairs_per_shell < 5) throw ConfigError("probe.pairs_per_shell must be at least 5");
  if (!(probe.anchor_t_frac >= 0.0 && probe.anchor_t_frac < 1.0))
    throw ConfigError("probe.anchor_t_frac must lie in [0, 1)");
  return probe;
}

void parallel_replicates(int n, int threads, const std::function<void(int)>& work) {
  threads = std::max(1, std::min(threads, 64));
  if (threads == 1 || n <= 1) {
    for (int i = 0; i < n; ++i) work(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto body = [&] {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= n) break;
      try {
        work(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int workers = std::min(threads, n);
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

double wall_value(const json& cfg, const Timer& timer) {
  return cfg.at("output").at("record_wall_time").get<bool>() ? timer.seconds() : 0.0;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    v[static_cast<std::size_t>(i)] =
        std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / std::max(1, n - 1));
  return v;
}

fields::FieldSample solve_one(const solver::SolveConfig& base, int replicate) {
  solver::SolveConfig sc = base;
  sc.noise.replicate_id = replicate;
  return sc.noise.kind == fields::NoiseKind::spacetime_white ? solver::solve_mild_stwn(sc)
                                                             : solver::solve_mild_bm(sc);
}

// ---------------------------------------------------------------- dispatch

int run_kernel_verify(const json& cfg, const fs::path& out, std::uint64_t hash) {
  Timer timer;
  const json& kv = cfg.at("kernel_verify");
  const json& kspec_cfg = cfg.at("kernel");
  const int dim = kspec_cfg.at("dim").get<int>();
  const std::vector<double> ts = kv.at("ts").get<std::vector<double>>();
  if (ts.empty()) throw ConfigError("kernel_verify.ts must be nonempty");
  double mass_tol = tol(cfg, "mass");
  if (mass_tol == 0.0) mass_tol = dim == 1 ? 1e-6 : 1e-4;
  const double ss_tol = tol(cfg, "self_similarity");
  const double spread_tol = tol(cfg, "bound_ratio_spread");
  const double deriv_tol = tol(cfg, "derivative");

  bool all_ok = true;
  json checks = json::array();
  for (double a : kv.at("alphas").get<std::vector<double>>()) {
    const kernel::KernelSpec spec =
        kernel::make_spec(a, dim, kspec_cfg.at("fourier_cutoff").get<double>(),
                          kspec_cfg.at("quad_points").get<int>());
    const auto mass = kernel::mass_scan(spec, ts);
    report_io::write_csv(out / ("mass_a" + report_io::format_double(a) + ".csv"),
                         report_io::mass_scan_table(mass), hash);
    bool ok = mass.worst_abs_err < mass_tol;
    all_ok = all_ok && ok;
    checks.push_back({{"check", "mass"},
                      {"alpha", a},
                      {"worst", mass.worst_abs_err},
                      {"tolerance", mass_tol},
                      {"pass", ok}});

    const int npts = kv.at("selfsim_points").get<int>();
    if (npts < 2) throw ConfigError("kernel_verify.selfsim_points must be at least 2");
    std::vector<double> us(static_cast<std::size_t>(npts));
    for (int i = 0; i < npts; ++i)
      us[static_cast<std::size_t>(i)] = -4.0 + 8.0 * i / (npts - 1);
    const auto ss = kernel::self_similarity_scan(spec, ts, us);
    report_io::write_csv(out / ("selfsim_a" + report_io::format_double(a) + ".csv"),
                         report_io::self_similarity_table(ss), hash);
    ok = ss.max_rel_err < ss_tol;
    all_ok = all_ok && ok;
    checks.push_back({{"check", "self_similarity"},
                      {"alpha", a},
                      {"worst", ss.max_rel_err},
                      {"tolerance", ss_tol},
                      {"pass", ok}});

    if (dim == 1) {
      double worst_rel = 0.0;
      const double h = 1e-4;
      for (auto [t, x] : {std::pair{0.5, 0.3}, std::pair{1.0, 1.2}}) {
        const double fd =
            (kernel::eval_kernel(spec, t, x + h) - kernel::eval_kernel(spec, t, x - h)) /
            (2.0 * h);
        const double exact = kernel::deriv_kernel(spec, 1, t, x);
        worst_rel = std::max(worst_rel,
                             std::abs(fd - exact) / std::max(std::abs(exact), 1e-12));
      }
      ok = worst_rel < deriv_tol;
      all_ok = all_ok && ok;
      checks.push_back({{"check", "derivative"},
                        {"alpha", a},
                        {"worst", worst_rel},
                        {"tolerance", deriv_tol},
                        {"pass", ok}});
    }
  }

  const int gp = kv.at("ratio_grid_points").get<int>();
  if (gp < 2) throw ConfigError("kernel_verify.ratio_grid_points must be at least 2");
  for (double a : kv.at("sharp_alphas").get<std::vector<double>>()) {
    const kernel::KernelSpec spec = kernel::make_spec(a, dim);
    const auto grid_t = log_spaced(0.01, 10.0, gp);
    const auto grid_x = log_spaced(0.01, 10.0, gp);
    const auto rep = kernel::sharp_bound_ratio(spec, grid_t, grid_x);
    report_io::write_csv(out / ("bound_ratio_a" + report_io::format_double(a) + ".csv"),
                         report_io::bound_ratio_table(rep), hash);
    const double spread = rep.max_ratio / std::max(rep.min_ratio, 1e-300);
    const bool ok = rep.min_ratio > 0.0 && spread < spread_tol;
    all_ok = all_ok && ok;
    checks.push_back({{"check", "bound_ratio"},
                      {"alpha", a},
                      {"worst", spread},
                      {"tolerance", spread_tol},
                      {"pass", ok}});
    if (dim == 1) {
      const auto drep = kernel::deriv_envelope_ratio(spec, grid_t, grid_x);
      report_io::write_csv(out / ("deriv_envelope_a" + report_io::format_double(a) + ".csv"),
                           report_io::bound_ratio_table(drep), hash);
    }
  }

  json body{{"subcommand", "kernel-verify"}, {"checks", checks}, {"pass", all_ok}};
  report_io::write_manifest(out / "kernel_verify_manifest.json", body.dump(), hash,
                            wall_value(cfg, timer));
  return all_ok ? 0 : 1;
}

int run_simulate(const json& cfg, const fs::path& out, std::uint64_t hash) {
  Timer timer;
  const solver::SolveConfig sc = solve_config_from(cfg);
  const int n = cfg.at("noise").at("replicates").get<int>();
  if (n < 0) throw ConfigError("noise.replicates must be nonnegative");
  const int threads = cfg.at("output").at("threads").get<int>();
  const bool dump_fields = cfg.at("output").at("write_fields").get<bool>();
  const auto warnings = solver::admissibility_flags(sc);

  report_io::CsvTable ens;
  ens.columns = {"replicate", "final_mean", "final_var", "final_min", "final_max",
                 "final_sup_abs"};
  const int window = std::max(1, threads);
  std::vector<fields::FieldSample> slots(static_cast<std::size_t>(std::min(window, std::max(n, 1))));
  for (int base = 0; base < n; base += window) {
    const int count = std::min(window, n - base);
    parallel_replicates(count, threads,
                        [&](int i) { slots[static_cast<std::size_t>(i)] = solve_one(sc, base + i); });
    for (int i = 0; i < count; ++i) {
      const fields::FieldSample& s = slots[static_cast<std::size_t>(i)];
      const int last = s.stored_rows() - 1;
      double mean = 0.0, lo = s.at(last, 0), hi = lo, sup = 0.0;
      for (int j = 0; j < s.grid.nx; ++j) {
        const double v = s.at(last, j);
        mean += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sup = std::max(sup, std::abs(v));
      }
      mean /= s.grid.nx;
      double var = 0.0;
      for (int j = 0; j < s.grid.nx; ++j) {
        const double d = s.at(last, j) - mean;
        var += d * d;
      }
      var /= s.grid.nx;
      ens.add_row({std::to_string(base + i), report_io::format_double(mean),
                   report_io::format_double(var), report_io::format_double(lo),
                   report_io::format_double(hi), report_io::format_double(sup)});
      if (dump_fields)
        report_io::write_csv(out / ("field_r" + std::to_string(base + i) + ".csv"),
                             report_io::field_table(s), hash);
    }
  }
  if (n > 0) report_io::write_csv(out / "ensemble.csv", ens, hash);

  json body{{"subcommand", "simulate"},
            {"replicates", n},
            {"noise", cfg.at("noise").at("kind")},
            {"forcing", cfg.at("forcing").at("family")},
            {"warnings", warnings},
            {"pass", true}};
  report_io::write_manifest(out / "simulate_manifest.json", body.dump(), hash,
                            wall_value(cfg, timer));
  return 0;
}

int run_estimate(const json& cfg, const fs::path& out, std::uint64_t hash) {
  Timer timer;
  const solver::SolveConfig sc = solve_config_from(cfg);
  const regularity::ExponentPlan plan = plan_from(cfg);
  const regularity::ProbeSpec probe = probe_from(cfg);
  const int n = cfg.at("noise").at("replicates").get<int>();
  if (n < 1) throw ConfigError("estimate needs noise.replicates >= 1");
  const int threads = cfg.at("output").at("threads").get<int>();
  const auto warnings = solver::admissibility_flags(sc);

  std::unique_ptr<regularity::IncrementScan> scan;
  const int window = std::max(1, threads);
  std::vector<fields::FieldSample> slots(static_cast<std::size_t>(std::min(window, n)));
  for (int base = 0; base < n; base += window) {
    const int count = std::min(window, n - base);
    parallel_replicates(count, threads,
                        [&](int i) { slots[static_cast<std::size_t>(i)] = solve_one(sc, base + i); });
    for (int i = 0; i < count; ++i) {
      if (!scan)
        scan = std::make_unique<regularity::IncrementScan>(plan, slots[static_cast<std::size_t>(i)],
                                                           probe);
      scan->add_replicate(slots[static_cast<std::size_t>(i)]);
    }
  }
  const regularity::ExponentFit fit = scan->finish();
  report_io::write_csv(out / "exponent_fit.csv", report_io::exponent_fit_table(fit), hash);

  const bool ok = fit.slope >= tol(cfg, "slope_min") && fit.slope <= tol(cfg, "slope_max");
  json body{{"subcommand", "estimate"},
            {"replicates", n},
            {"plan",
             {{"p", plan.p},
              {"alpha", plan.alpha},
              {"beta", plan.beta},
              {"beta_max", plan.beta_max},
              {"theta", plan.theta},
              {"beta_star", plan.beta_star}}},
            {"slope", fit.slope},
            {"conf_half_width", fit.conf_half_width},
            {"r_squared", fit.r_squared},
            {"degenerate", fit.degenerate},
            {"out_of_regime", fit.out_of_regime},
            {"dropped_shells", fit.dropped_shells},
            {"warnings", warnings},
            {"pass", ok}};
  report_io::write_manifest(out / "estimate_manifest.json", body.dump(), hash,
                            wall_value(cfg, timer));
  return ok ? 0 : 1;
}

int run_seminorm(const json& cfg, const fs::path& out, std::uint64_t hash) {
  Timer timer;
  const solver::SolveConfig sc = solve_config_from(cfg);
  const json& sm = cfg.at("seminorm");
  const double p = sm.at("p").get<double>();
  const double theta = sm.at("theta").get<double>();
  const double gamma = sm.at("gamma").get<double>();
  const int stride_t = sm.at("time_stride").get<int>();
  const int stride_x = sm.at("space_stride").get<int>();
  const int levels = sm.at("radius_levels").get<int>();
  const int extra_pairs = sm.at("extra_pairs").get<int>();
  if (extra_pairs < 0) throw ConfigError("seminorm.extra_pairs must be nonnegative");

  const fields::FieldSample sample = solve_one(sc, 0);
  seminorms::DomainSpec dom = seminorms::domain_of(sample);
  const auto centers = seminorms::grid_centers(sample, dom, stride_t, stride_x);
  const auto radii = seminorms::dyadic_radii(dom, levels);
  dom.atype_constant_hat = seminorms::atype_constant(dom, centers, radii);
  const auto camp = seminorms::campanato_seminorm(sample, dom, p, theta, centers, radii);
  const auto hold = seminorms::holder_seminorm(
      sample, dom, seminorms::embedding_gamma(p, theta, 1), extra_pairs,
      cfg.at("probe").at("pair_seed").get<std::uint64_t>());
  const auto hold_direct = seminorms::holder_seminorm(
      sample, dom, gamma, extra_pairs, cfg.at("probe").at("pair_seed").get<std::uint64_t>());
  report_io::write_csv(out / "seminorms.csv",
                       report_io::seminorm_table({camp, hold, hold_direct}), hash);

  const double worst = std::max(camp.value, std::max(hold.value, hold_direct.value));
  const bool ok = worst <= tol(cfg, "seminorm_max");
  json body{{"subcommand", "seminorm"},
            {"campanato", camp.value},
            {"holder_at_embedding_exponent", hold.value},
            {"holder_at_requested_exponent", hold_direct.value},
            {"atype_constant", dom.atype_constant_hat},
            {"pass", ok}};
  report_io::write_manifest(out / "seminorm_manifest.json", body.dump(), hash,
                            wall_value(cfg, timer));
  return ok ? 0 : 1;
}

int run_plan(const json& cfg, const fs::path& out, std::uint64_t hash) {
  Timer timer;
  const int d = cfg.at("kernel").at("dim").get<int>();
  const auto alphas = cfg.at("plan").at("table_alphas").get<std::vector<double>>();
  const auto ps = cfg.at("plan").at("table_ps").get<std::vector<double>>();
  std::vector<regularity::ExponentPlan> rows;
  json skipped = json::array();
  for (auto kind : {regularity::NoiseRegime::single_bm, regularity::NoiseRegime::spacetime_white})
    for (double a : alphas)
      for (double p : ps) {
        const char* kind_name =
            kind == regularity::NoiseRegime::single_bm ? "single_bm" : "spacetime_white";
        try {
          // Representative admissible interior point: beta close to the
          // ceiling, slack at a quarter of its allowed range.
          const double beta_max = kind == regularity::NoiseRegime::single_bm
                                      ? a - d / p
                                      : (2.0 * a - 1.0) / 2.0 - 1.0 / p;
          if (!(beta_max > 0.0)) throw std::invalid_argument("no admissible target index");
          const double beta = 0.96 * beta_max;
          rows.push_back(regularity::make_plan(p, a, d, kind, beta, 0.25 * beta * p));
        } catch (const std::invalid_argument& e) {
          skipped.push_back({{"kind", kind_name}, {"alpha", a}, {"p", p}, {"reason", e.what()}});
        }
      }
  report_io::write_csv(out / "plans.csv", report_io::plan_table(rows), hash);
  json body{{"subcommand", "plan"},
            {"rows", rows.size()},
            {"skipped", skipped},
            {"pass", true}};
  report_io::write_manifest(out / "plan_manifest.json", body.dump(), hash,
                            wall_value(cfg, timer));
  return 0;
}

int run_chaining(const json& cfg, const fs::path& out, std::uint64_t hash) {
  Timer timer;
  const json& ch = cfg.at("chaining");
  const int levels = ch.at("levels").get<int>();
  const double alpha_exp = ch.at("alpha_exp").get<double>();
  const int paths = ch.at("paths").get<int>();
  const double hurst = ch.at("hurst").get<double>();
  if (levels < 1 || levels > 11) throw ConfigError("chaining.levels out of range [1, 11]");
  if (paths < 1) throw ConfigError("chaining.paths must be positive");
  if (!(hurst > 0.0 && hurst < 1.0)) throw ConfigError("chaining.hurst must lie in (0, 1)");
  if (!(alpha_exp > 0.0 && alpha_exp <= 1.0))
    throw ConfigError("chaining.alpha_exp must lie in (0, 1]");

  fields::GridSpec grid;
  grid.t_max = 1.0;
  grid.nt = 1 << levels;
  grid.domain_len = 1.0;
  grid.nx = 4;
  const std::uint64_t seed = cfg.at("noise").at("seed").get<std::uint64_t>();

  std::vector<regularity::ChainingReport> reps;
  reps.reserve(static_cast<std::size_t>(paths));
  bool all_ok = true;
  for (int i = 0; i < paths; ++i) {
    const fields::FieldSample s = regularity::make_fbm_sample(grid, 1, hurst, seed, i);
    std::vector<double> path(static_cast<std::size_t>(s.stored_rows()));
    for (int r = 0; r < s.stored_rows(); ++r) path[static_cast<std::size_t>(r)] = s.at(r, 0);
    reps.push_back(regularity::chaining_bound(path, alpha_exp, levels));
    all_ok = all_ok && reps.back().pass;
  }
  report_io::write_csv(out / "chaining.csv", report_io::chaining_table(reps), hash);
  json body{{"subcommand", "chaining"},
            {"paths", paths},
            {"levels", levels},
            {"alpha_exp", alpha_exp},
            {"hurst", hurst},
            {"pass", all_ok}};
  report_io::write_manifest(out / "chaining_manifest.json", body.dump(), hash,
                            wall_value(cfg, timer));
  return all_ok ? 0 : 1;
}

int run_report(const json& cfg, const fs::path& out, std::uint64_t hash) {
  report_io::CsvTable t;
  t.columns = {"file", "subcommand", "config", "pass"};
  bool all_ok = true;
  std::vector<fs::path> files;
  if (fs::exists(out))
    for (const auto& entry : fs::directory_iterator(out))
      if (entry.is_regular_file() && entry.path().extension() == ".json")
        files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error&) {
      continue;
    }
    if (!j.is_object() || !j.contains("tool") || j.at("tool") != "fhlab") continue;
    const bool pass = j.value("pass", true);
    all_ok = all_ok && pass;
    t.add_row({f.filename().string(), j.value("subcommand", std::string("?")),
               j.value("config_hash", std::string("?")), pass ? "1" : "0"});
    std::printf("%-32s %-16s %s\n", f.filename().string().c_str(),
                j.value("subcommand", std::string("?")).c_str(), pass ? "pass" : "FAIL");
  }
  report_io::write_csv(out / "report_summary.csv", t, hash);
  (void)cfg;
  return all_ok ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"fhlab: numerical laboratory for fractional heat semigroups and mild solutions"};
  app.get_formatter()->column_width(28);
  std::string sub, config_path, out_dir;
  std::uint64_t seed = 0;
  long long replicates = 0;
  int threads = 0;
  app.add_option("subcommand", sub, "one of: kernel-verify simulate estimate seminorm plan chaining report")
      ->required()
      ->check(CLI::IsMember({"kernel-verify", "simulate", "estimate", "seminorm", "plan",
                             "chaining", "report"}));
  app.add_option("--config", config_path, "JSON config file (defaults used when omitted)");
  app.add_option("--seed", seed, "override noise.seed");
  app.add_option("--replicates", replicates, "override noise.replicates");
  app.add_option("--threads", threads, "override output.threads (replicate-level workers)");
  app.add_option("--out", out_dir, "override output.dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    json cfg = load_and_merge(config_path);
    apply_env_overrides(cfg);
    if (app.count("--seed")) cfg["noise"]["seed"] = seed;
    if (app.count("--replicates")) {
      if (replicates < 0) throw ConfigError("--replicates must be nonnegative");
      cfg["noise"]["replicates"] = replicates;
    }
    if (app.count("--threads")) {
      if (threads < 1) throw ConfigError("--threads must be positive");
      cfg["output"]["threads"] = threads;
    }
    if (app.count("--out")) cfg["output"]["dir"] = out_dir;
    if (cfg.at("output").at("threads").get<int>() < 1)
      throw ConfigError("output.threads must be positive");

    const std::uint64_t hash = config_hash(cfg);
    const fs::path out = cfg.at("output").at("dir").get<std::string>();
    fs::create_directories(out);

    if (sub == "kernel-verify") return run_kernel_verify(cfg, out, hash);
    if (sub == "simulate") return run_simulate(cfg, out, hash);
    if (sub == "estimate") return run_estimate(cfg, out, hash);
    if (sub == "seminorm") return run_seminorm(cfg, out, hash);
    if (sub == "plan") return run_plan(cfg, out, hash);
    if (sub == "chaining") return run_chaining(cfg, out, hash);
    if (sub == "report") return run_report(cfg, out, hash);
    throw ConfigError("unknown subcommand: " + sub);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "%s: config error: %s\n", sub.c_str(), e.what());
    return 2;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "%s: config error: %s\n", sub.c_str(), e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "%s: config error: %s\n", sub.c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s: error: %s\n", sub.c_str(), e.what());
    return 1;
  }
}

}  // namespace fhlab::run
