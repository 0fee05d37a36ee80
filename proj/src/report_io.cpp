#include "fhlab/report_io.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <system_error>

#include "json.hpp"

#include "fhlab/version.hpp"

namespace fhlab::report_io {

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[h & 0xf];
    h >>= 4;
  }
  buf[16] = '\0';
  return buf;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

void CsvTable::add_row(std::initializer_list<std::string> cells) {
  rows.emplace_back(cells);
}

std::string render_csv(const CsvTable& table, std::uint64_t config_hash) {
  std::string out = "# fhlab ";
  out += kVersion;
  out += " config=";
  out += hash_hex(config_hash);
  out += "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ",";
    out += csv_escape(table.columns[i]);
  }
  out += "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw std::logic_error("csv row width does not match the header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ",";
      out += csv_escape(row[i]);
    }
    out += "\n";
  }
  return out;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open output file: " + path.string());
  f << text;
  f.flush();
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

void write_csv(const std::filesystem::path& path, const CsvTable& table,
               std::uint64_t config_hash) {
  write_text(path, render_csv(table, config_hash));
}

void write_manifest(const std::filesystem::path& path, const std::string& body_json,
                    std::uint64_t config_hash, double wall_seconds) {
  nlohmann::json j = nlohmann::json::parse(body_json);
  if (!j.is_object()) throw std::invalid_argument("manifest body must be a JSON object");
  j["tool"] = "fhlab";
  j["version"] = kVersion;
  j["module_versions"] = {kKernelVersion, kFieldsVersion, kSolverVersion, kSeminormsVersion,
                          kRegularityVersion};
  j["config_hash"] = hash_hex(config_hash);
  j["wall_seconds"] = wall_seconds;
  write_text(path, j.dump(2) + "\n");
}

CsvTable mass_scan_table(const kernel::MassScanReport& rep) {
  CsvTable t;
  t.columns = {"t", "mass", "abs_err"};
  for (std::size_t i = 0; i < rep.ts.size(); ++i)
    t.add_row({format_double(rep.ts[i]), format_double(rep.masses[i]),
               format_double(std::abs(rep.masses[i] - 1.0))});
  return t;
}

CsvTable self_similarity_table(const kernel::SelfSimilarityReport& rep) {
  CsvTable t;
  t.columns = {"t", "profile_x", "rel_err"};
  for (std::size_t i = 0; i < rep.ts.size(); ++i)
    for (std::size_t j = 0; j < rep.profile_xs.size(); ++j)
      t.add_row({format_double(rep.ts[i]), format_double(rep.profile_xs[j]),
                 format_double(rep.rel_errs[i * rep.profile_xs.size() + j])});
  return t;
}

CsvTable bound_ratio_table(const kernel::BoundRatioReport& rep) {
  CsvTable t;
  t.columns = {"t", "x", "kernel", "bound", "ratio"};
  for (std::size_t i = 0; i < rep.ts.size(); ++i)
    for (std::size_t j = 0; j < rep.xs.size(); ++j) {
      const std::size_t k = i * rep.xs.size() + j;
      t.add_row({format_double(rep.ts[i]), format_double(rep.xs[j]),
                 format_double(rep.kernel_vals[k]), format_double(rep.bound_vals[k]),
                 format_double(rep.ratios[k])});
    }
  return t;
}

CsvTable lq_scaling_table(const kernel::LqScalingReport& rep) {
  CsvTable t;
  t.columns = {"t", "norm"};
  for (std::size_t i = 0; i < rep.ts.size(); ++i)
    t.add_row({format_double(rep.ts[i]), format_double(rep.norms[i])});
  return t;
}

CsvTable exponent_fit_table(const regularity::ExponentFit& fit) {
  CsvTable t;
  t.columns = {"scale", "statistic", "pair_count", "fitted"};
  for (std::size_t i = 0; i < fit.scales.size(); ++i) {
    const double fitted = std::exp(fit.intercept + fit.slope * std::log(fit.scales[i]));
    t.add_row({format_double(fit.scales[i]), format_double(fit.statistics[i]),
               std::to_string(fit.pair_counts[i]), format_double(fitted)});
  }
  return t;
}

CsvTable chaining_table(const std::vector<regularity::ChainingReport>& reps) {
  CsvTable t;
  t.columns = {"path", "lhs", "rhs", "pass"};
  for (std::size_t i = 0; i < reps.size(); ++i)
    t.add_row({std::to_string(i), format_double(reps[i].lhs), format_double(reps[i].rhs),
               reps[i].pass ? "1" : "0"});
  return t;
}

CsvTable seminorm_table(const std::vector<seminorms::SeminormReport>& reps) {
  CsvTable t;
  t.columns = {"p",          "theta",     "gamma",          "value",    "witness_t",
               "witness_x",  "witness_t2", "witness_x2",    "witness_radius",
               "evaluated",  "skipped",   "resolution"};
  for (const auto& r : reps)
    t.add_row({format_double(r.p), format_double(r.theta), format_double(r.gamma_exp),
               format_double(r.value), format_double(r.witness_a.t),
               format_double(r.witness_a.x), format_double(r.witness_b.t),
               format_double(r.witness_b.x), format_double(r.witness_radius),
               std::to_string(r.evaluated), std::to_string(r.skipped),
               format_double(r.resolution)});
  return t;
}

CsvTable plan_table(const std::vector<regularity::ExponentPlan>& plans) {
  CsvTable t;
  t.columns = {"p",     "alpha", "d", "kind",      "beta", "beta_max",
               "theta", "delta_gap", "q", "beta_star", "r"};
  for (const auto& pl : plans)
    t.add_row({format_double(pl.p), format_double(pl.alpha), std::to_string(pl.d),
               pl.kind == regularity::NoiseRegime::single_bm ? "single_bm" : "spacetime_white",
               format_double(pl.beta), format_double(pl.beta_max), format_double(pl.theta),
               format_double(pl.delta_gap), format_double(pl.q), format_double(pl.beta_star),
               format_double(pl.r)});
  return t;
}

CsvTable field_table(const fields::FieldSample& sample) {
  CsvTable t;
  t.columns.push_back("t");
  for (int j = 0; j < sample.grid.nx; ++j) t.columns.push_back("x" + std::to_string(j));
  for (int r = 0; r < sample.stored_rows(); ++r) {
    std::vector<std::string> row;
    row.reserve(static_cast<std::size_t>(sample.grid.nx) + 1);
    row.push_back(format_double(sample.time_of_row(r)));
    for (int j = 0; j < sample.grid.nx; ++j) row.push_back(format_double(sample.at(r, j)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace fhlab::report_io
