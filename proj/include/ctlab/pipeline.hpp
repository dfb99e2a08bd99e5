#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctlab/bounds.hpp"
#include "ctlab/config.hpp"
#include "ctlab/world.hpp"

namespace ctlab {

inline constexpr const char* kVersion = "ctlab 1.0.0";

// Preprocessing applied to a row's world.
struct Variant {
  SvdMode mode = SvdMode::none;
  std::size_t value = 0;  // q, or the 1-based index for the discard modes

  std::string label() const;  // none, top3, pair2, single2
  std::optional<TruncationSpec> truncation() const;
};

struct SweepRow {
  std::string variant;
  std::optional<std::size_t> q;
  std::size_t k = 0;
  std::optional<double> alpha_q;
  std::optional<double> lambda_k1_q;
  std::optional<double> lambda_k_q;
  std::optional<double> bound_t4;
  std::optional<double> probe_error;
  std::optional<double> infonce;
  std::optional<double> spectral_loss;
  std::optional<double> ce_mean;
  std::optional<double> ce_linear;
  std::optional<double> eps_min;
  std::optional<double> eps_max;
  std::string verdicts;
  std::uint64_t seed = 0;
};

std::string csv_header();
std::string csv_line(const SweepRow& row);
std::string rows_to_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> parse_csv(const std::string& text);

struct Context {
  RunConfig cfg;
  World world;
  std::vector<Transform> transforms;
};

World build_world(const RunConfig& cfg);
std::vector<Transform> build_transforms(const RunConfig& cfg, const World& world);
Context prepare(const RunConfig& cfg);

struct RowResult {
  std::string key;
  SweepRow row;
  std::vector<BoundReport> reports;
  std::vector<std::string> notes;
  std::size_t n = 0;
};

std::string row_key(const Variant& v, std::size_t k);
RowResult compute_row(const Context& ctx, const Variant& v, std::size_t k);

struct RowRequest {
  Variant variant;
  std::size_t k = 0;
};

// Rows run on up to `threads` workers; results come back in request order.
std::vector<RowResult> compute_rows(const Context& ctx, const std::vector<RowRequest>& requests,
                                    unsigned threads);

struct InflationRow {
  std::size_t k = 0;
  std::size_t n_base = 0;
  std::size_t n_inflated = 0;
  double alpha_base = 0.0;
  double alpha_inflated = 0.0;
  std::optional<double> lambda_k1_base;
  std::optional<double> lambda_k1_inflated;
};

std::vector<InflationRow> inflation_rows(const Context& ctx, std::size_t factor,
                                         const std::vector<std::size_t>& ks);
std::string inflation_csv(const std::vector<InflationRow>& rows);

// True when the smallest present value sits strictly inside the sequence:
// the first and last present values are both strictly larger.
bool strict_interior_minimum(const std::vector<std::optional<double>>& values, double tol = 1e-12);

struct RunOptions {
  unsigned threads = 1;
  bool allow_violations = false;
  bool main_row = true;
  bool sweeps = true;
  bool inflation = true;
};

struct RunResult {
  int exit_code = 0;
  std::size_t violations = 0;
  std::string directory;
  std::vector<RowResult> main;
  std::vector<RowResult> sweep_q;
  std::vector<RowResult> sweep_k;
  std::vector<InflationRow> inflation;
  std::string summary;
};

RunResult run_pipeline(const RunConfig& cfg, const RunOptions& opts);

// Writes text with LF line endings; errors name the path.
void write_text(const std::string& path, const std::string& text);

}  // namespace ctlab
