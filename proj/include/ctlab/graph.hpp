#pragma once

#include <cstddef>
#include <vector>

#include "ctlab/embedding.hpp"
#include "ctlab/linalg.hpp"
#include "ctlab/world.hpp"

namespace ctlab {

struct AugmentationGraph {
  Matrix A;                       // n x n, sums to 1
  std::vector<double> degrees;    // row sums of A
  Matrix L;                       // I - D^{-1/2} A D^{-1/2}
  std::vector<std::size_t> kept;  // graph index -> space node index
  std::vector<std::size_t> pruned;
  std::size_t space_size = 0;

  std::size_t n() const { return degrees.size(); }
};

AugmentationGraph build_graph(const AugmentedSpace& space);

struct Spectrum {
  std::vector<double> values;  // ascending
  Matrix vectors;

  // 1-based accessor: lambda(1) is the smallest eigenvalue.
  double lambda(std::size_t i) const { return values.at(i - 1); }
};

Spectrum laplacian_spectrum(const AugmentationGraph& g);

// Rows for pruned nodes are zero. Throws if k > n.
Embedding spectral_embedding(const AugmentationGraph& g, std::size_t k);
Embedding spectral_embedding(const AugmentationGraph& g, const Spectrum& spec, std::size_t k);

// -sum_{i<=k} max(1 - lambda_i, 0)^2.
double spectral_loss_minimum(const Spectrum& spec, std::size_t k);

struct TraceReport {
  double trace_raw = 0.0;
  double trace_q = 0.0;
  bool within_bound = true;  // tr(A_q) <= 1 + 1e-12
  bool increased = false;
};

TraceReport trace_check(const AugmentationGraph& raw, const AugmentationGraph& q);

// Connected components of the support of A (A(x, x') > 0).
std::size_t count_components(const AugmentationGraph& g);

}  // namespace ctlab
