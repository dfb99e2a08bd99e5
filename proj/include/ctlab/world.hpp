#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctlab/linalg.hpp"
#include "ctlab/svd.hpp"

namespace ctlab {

struct WorldSpec {
  std::size_t K = 3;
  std::size_t per_class = 5;
  std::size_t m = 24;
  std::size_t mp = 16;
  std::size_t q_star = 3;
  std::size_t nuisance_rank = 2;
  double nuisance_confusion = 1.0;
  double noise_scale = 0.0;
  std::uint64_t seed = 1;
  // Generator geometry: each class owns a block of m/K rows whose first
  // half (the core) is split into `bands` row bands.
  std::size_t bands = 3;
  double core_boost = 3.0;
};

// Throws std::invalid_argument naming the offending field.
void validate_world_spec(const WorldSpec& spec);

struct Original {
  std::string id;
  Matrix payload;
  // Latent class of the underlying sample. Preprocessing keeps it.
  int label = 0;
  // ground_truth_label of the current payload.
  int payload_label = 0;
};

struct BlockGeometry {
  std::size_t block_rows = 0;
  std::size_t core_rows = 0;
  std::size_t bands = 0;
};

struct World {
  std::vector<Original> originals;
  std::vector<double> weights;
  std::vector<Matrix> templates;
  std::optional<WorldSpec> spec;  // set for generated worlds
  std::optional<BlockGeometry> geometry;
  std::vector<std::string> history;  // e.g. "generated", "keep_top_q(q=3)"

  std::size_t num_classes() const { return templates.size(); }
  std::size_t rows() const { return templates.front().rows(); }
  std::size_t cols() const { return templates.front().cols(); }
};

// Nearest template in Frobenius distance, ties to the smallest index.
int ground_truth_label(const Matrix& payload, const std::vector<Matrix>& templates);
int ground_truth_label(const Matrix& payload, const World& world);

World generate_world(const WorldSpec& spec);

// Two originals, three distinct views: the fixture with
// A = [[1/8,1/8,0],[1/8,1/4,1/8],[0,1/8,1/8]].
World toy_world();

enum class TransformKind { identity, block_mask, additive_pattern };

struct Rect {
  std::size_t r0 = 0, r1 = 0, c0 = 0, c1 = 0;  // half-open
};

struct Transform {
  std::string id;
  TransformKind kind = TransformKind::identity;
  std::vector<Rect> rects;  // block_mask: union of rectangles
  std::size_t pattern_index = 0;
  double pattern_scale = 0.0;
  Matrix pattern;  // resolved additive pattern
  double probability = 1.0;
};

Matrix apply_transform(const Transform& t, const Matrix& x);

std::vector<Transform> identity_transforms();
std::vector<Transform> toy_transforms();

struct PlantedProbabilities {
  double identity = 0.05;
  double band_mask = 0.25;
  double core_mask = 0.2;
  double core_band_mask = 0.5;
};

// Identity, one mask per core band, one mask per class core, and one
// mask per (core j, band b of core j+1) pair. Requires world.geometry.
std::vector<Transform> planted_transforms(const World& world, const PlantedProbabilities& probs);

// Parses "identity@p", "mask@p@r0:r1/c0:c1+...", "pattern@p@index/scale".
Transform parse_transform(const std::string& descriptor, std::size_t rows, std::size_t cols,
                          std::uint64_t pattern_seed);
std::string describe_transform(const Transform& t);
void validate_transforms(const std::vector<Transform>& transforms, std::size_t rows,
                         std::size_t cols);

struct AugNode {
  std::string id;
  Matrix payload;
  int label = 0;
  std::size_t first_original = 0;
  std::size_t first_transform = 0;
};

struct AugmentedSpace {
  std::vector<AugNode> nodes;
  Matrix cond;                        // originals x nodes, p(x | x̄)
  std::vector<double> marginal;       // p(x)
  Matrix joint;                       // p(x, x+)
  std::vector<double> original_weights;
  std::vector<int> original_labels;   // latent labels y_x̄
  std::size_t num_classes = 0;
  double positive_mass = 0.0;         // mass of X+ (y_x == y_x+)
  double negative_mass = 0.0;         // mass of X-

  std::size_t n() const { return nodes.size(); }
  std::size_t num_originals() const { return original_weights.size(); }
  int label(std::size_t node) const { return nodes[node].label; }
  bool same_label(std::size_t a, std::size_t b) const { return nodes[a].label == nodes[b].label; }
  std::vector<int> labels() const;
  // Overlapped views have cond mass from two or more originals.
  bool is_overlapped(std::size_t node) const;
};

AugmentedSpace build_augmented_space(const World& world, const std::vector<Transform>& transforms);

// Lower-level entry used by tests: explicit nodes and cond table.
AugmentedSpace make_space(std::vector<AugNode> nodes, Matrix cond, std::vector<double> weights,
                          std::vector<int> original_labels, std::size_t num_classes);

struct LabelingReport {
  double alpha = 0.0;
  // Contribution of each latent class; sums to alpha.
  std::vector<double> per_class_alpha;
  std::optional<std::size_t> q;
};

LabelingReport labeling_error(const AugmentedSpace& space);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// Samples (x̄, t) pairs and labels t(x̄) directly, without building nodes.
McEstimate labeling_error_mc(const World& world, const std::vector<Transform>& transforms,
                             std::size_t samples, std::uint64_t seed);

World preprocess_world(const World& world, const TruncationSpec& spec);

// Adds (factor-1)*|originals| draws from the planted generator with fresh
// nuisance and noise; this is a synthetic stand-in for generative inflation.
World inflate(const World& world, std::size_t factor, std::uint64_t seed);

void save_world(const World& world, const std::string& directory);
World load_world(const std::string& directory);

}  // namespace ctlab
