#pragma once

// Report emission: CSV tables (RFC-4180 quoting, '.' decimal separator,
// fixed column order per table builder) plus JSON sidecar manifests.  Every
// file carries the config hash so output trees are self-identifying.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fhlab/fields.hpp"
#include "fhlab/kernel.hpp"
#include "fhlab/regularity.hpp"
#include "fhlab/seminorms.hpp"

namespace fhlab::report_io {

// FNV-1a (64-bit) over the raw bytes; stable across platforms.
std::uint64_t fnv1a(const std::string& data);
std::string hash_hex(std::uint64_t h);

// Shortest decimal that round-trips the double exactly.
std::string format_double(double v);
std::string csv_escape(const std::string& field);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  void add_row(std::initializer_list<std::string> cells);
};

// Layout: "# fhlab <version> config=<hex>" comment line, then the header
// row, then data rows.
std::string render_csv(const CsvTable& table, std::uint64_t config_hash);
void write_csv(const std::filesystem::path& path, const CsvTable& table,
               std::uint64_t config_hash);

// Manifest body is pre-rendered JSON object text ("{...}"); identification
// fields (tool, version, config hash, wall time) are spliced in here.
void write_manifest(const std::filesystem::path& path, const std::string& body_json,
                    std::uint64_t config_hash, double wall_seconds);

// Fixed column orders (documented in README):
CsvTable mass_scan_table(const kernel::MassScanReport& rep);          // t, mass, abs_err
CsvTable self_similarity_table(const kernel::SelfSimilarityReport&);  // t, profile_x, rel_err
CsvTable bound_ratio_table(const kernel::BoundRatioReport&);  // t, x, kernel, bound, ratio
CsvTable lq_scaling_table(const kernel::LqScalingReport&);    // t, norm
CsvTable exponent_fit_table(const regularity::ExponentFit&);  // scale, statistic, pair_count, fitted
CsvTable chaining_table(const std::vector<regularity::ChainingReport>&);  // path, lhs, rhs, pass
CsvTable seminorm_table(const std::vector<seminorms::SeminormReport>&);
// p, theta, gamma, value, witness_t, witness_x, witness_radius, evaluated, skipped
CsvTable plan_table(const std::vector<regularity::ExponentPlan>&);
// p, alpha, d, kind, beta, beta_max, theta, delta_gap, q, beta_star, r
CsvTable field_table(const fields::FieldSample&);  // t, then one column per grid site

}  // namespace fhlab::report_io
