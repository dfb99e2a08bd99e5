#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ctlab/embedding.hpp"
#include "ctlab/world.hpp"

namespace ctlab {

struct McConfig {
  std::size_t samples = 20000;
  std::size_t replicates = 8;
  std::uint64_t seed = 0;
  std::size_t exact_n_max = 50;
  std::size_t exact_m_max = 2;

  bool exact_ok(std::size_t n, std::size_t M) const { return n <= exact_n_max && M <= exact_m_max; }
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  bool exact = false;
};

// Tuples laid out flat: anchor, positive, then M negatives, with a weight.
struct Batch {
  std::size_t M = 1;
  std::vector<std::size_t> idx;
  std::vector<double> weight;

  std::size_t size() const { return weight.size(); }
  void add(std::size_t anchor, std::size_t positive, const std::vector<std::size_t>& negatives,
           double w = 1.0);
  const std::size_t* tuple(std::size_t t) const { return idx.data() + t * (M + 2); }
};

// Every (x, x+, negatives) in the support, weighted by its probability.
Batch full_support_batch(const AugmentedSpace& space, std::size_t M);
std::size_t full_support_size(const AugmentedSpace& space, std::size_t M);
Batch sample_batch(const AugmentedSpace& space, std::size_t M, std::size_t count, std::uint64_t seed);

Estimate infonce_population(const Embedding& f, const AugmentedSpace& space, std::size_t M,
                            const McConfig& cfg);
double infonce_empirical(const Embedding& f, const Batch& batch);
// Gradient of infonce_empirical w.r.t. the table. When f.normalized, each
// row is projected onto the tangent space of the sphere at f(x).
Matrix infonce_gradient(const Embedding& f, const Batch& batch);

double spectral_loss(const Embedding& f, const AugmentedSpace& space);
Matrix spectral_loss_gradient(const Embedding& f, const AugmentedSpace& space);

enum class LossKind { infonce, spectral };

struct TrainConfig {
  LossKind loss = LossKind::spectral;
  std::size_t k = 2;
  std::size_t M = 1;
  std::size_t steps = 500;
  double step_size = 0.5;
  std::uint64_t seed = 0;
  // InfoNCE: the full support is used when it has at most this many tuples,
  // otherwise a fixed sampled batch of batch_size tuples.
  std::size_t full_support_max = 20000;
  std::size_t batch_size = 2048;
};

struct TrainResult {
  Embedding f;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::size_t accepted_steps = 0;
  std::vector<double> loss_trace;  // loss after each accepted step
};

TrainResult train_free_embeddings(const AugmentedSpace& space, const TrainConfig& cfg);

MeanHead mean_head(const Embedding& f, const AugmentedSpace& space);

double ce_risk(const Embedding& f, const MeanHead& head, const AugmentedSpace& space);
double ce_risk(const Embedding& f, const LinearHead& head, const AugmentedSpace& space);

struct ProbeConfig {
  std::size_t steps = 3000;
  double step_size = 1.0;
  double l2 = 1e-4;
};

LinearHead fit_linear_head(const Embedding& f, const AugmentedSpace& space, const ProbeConfig& cfg);

enum class ErrorMeasure {
  node,    // sum_x p(x) 1[g(x) != y_x]
  latent,  // sum_{x̄,x} P(x̄) p(x|x̄) 1[g(x) != y_x̄]
};

std::vector<int> predict(const Embedding& f, const Matrix& W);
double classification_error(const Embedding& f, const LinearHead& head, const AugmentedSpace& space,
                            ErrorMeasure measure = ErrorMeasure::node);
double majority_vote_error(const Embedding& f, const LinearHead& head, const AugmentedSpace& space);

// Index of the largest entry, ties to the smallest index.
std::size_t argmax(const double* v, std::size_t n);
double log_sum_exp(const double* v, std::size_t n);

}  // namespace ctlab
