#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctlab/objectives.hpp"
#include "ctlab/svd.hpp"
#include "ctlab/world.hpp"

namespace ctlab {

enum class SvdMode { none, keep_top_q, discard_pair, discard_single };

struct RunConfig {
  std::uint64_t seed = 1;

  std::string world_preset = "planted";  // planted | toy
  WorldSpec world;
  bool world_seed_set = false;

  std::string transforms_preset = "planted";  // planted | identity | toy | list
  PlantedProbabilities planted_probs;
  std::vector<std::string> transform_list;

  SvdMode svd_mode = SvdMode::none;
  std::size_t svd_q = 0;
  std::size_t svd_pair_index = 0;
  std::vector<std::size_t> svd_sweep;

  LossKind train_loss = LossKind::spectral;
  std::size_t train_k = 2;
  std::vector<std::size_t> k_sweep;
  std::size_t train_steps = 300;
  double train_step_size = 0.5;
  std::size_t train_M = 1;
  std::size_t train_batch = 2048;

  ProbeConfig probe;
  ErrorMeasure probe_measure = ErrorMeasure::latent;

  bool check_t1 = true, check_t3 = true, check_t4 = true, check_corollaries = true;
  std::size_t mc_samples = 20000;
  std::size_t mc_replicates = 8;
  std::size_t exact_n_max = 50;
  std::size_t exact_m_max = 2;

  std::size_t inflation_factor = 1;

  std::string out_dir = "artifacts";
  bool emit_csv = true;
  bool emit_json = true;

  std::uint64_t world_seed() const { return world_seed_set ? world.seed : seed; }
  std::optional<TruncationSpec> truncation() const;
};

// Parses sectioned key = value text. Errors name the line, section and key.
RunConfig parse_config(const std::string& text, const std::string& source = "config");
RunConfig load_config(const std::string& path);

// "section.key=value"; the same strict key table as the file parser.
void apply_override(RunConfig& cfg, const std::string& assignment);

// Checks cross-field constraints (sweep values against world dimensions).
void validate_config(const RunConfig& cfg);

// Canonical text form: every key, fixed order, parseable by parse_config.
// The manifest echo leaves out output.directory so that runs written to
// different directories stay byte-identical.
std::string echo_config(const RunConfig& cfg, bool include_directory = true);

std::string describe(SvdMode m);

}  // namespace ctlab
