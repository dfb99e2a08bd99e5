#include "ctlab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ctlab {

AugmentationGraph build_graph(const AugmentedSpace& space) {
  const std::size_t ns = space.n();
  if (ns == 0) throw std::invalid_argument("build_graph: empty space");
  AugmentationGraph g;
  g.space_size = ns;
  for (std::size_t x = 0; x < ns; ++x) {
    double d = 0.0;
    for (std::size_t y = 0; y < ns; ++y) d += space.joint(x, y);
    if (d > 0.0) {
      g.kept.push_back(x);
    } else {
      g.pruned.push_back(x);
    }
  }
  if (g.kept.empty()) throw std::invalid_argument("build_graph: all nodes have zero mass");
  const std::size_t n = g.kept.size();
  g.A = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g.A(i, j) = space.joint(g.kept[i], g.kept[j]);
  g.degrees.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g.degrees[i] += g.A(i, j);
  g.L = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double nij = g.A(i, j) / std::sqrt(g.degrees[i] * g.degrees[j]);
      g.L(i, j) = (i == j ? 1.0 : 0.0) - nij;
    }
  return g;
}

Spectrum laplacian_spectrum(const AugmentationGraph& g) {
  SymEigen e = sym_eig(g.L);
  return {std::move(e.values), std::move(e.vectors)};
}

Embedding spectral_embedding(const AugmentationGraph& g, const Spectrum& spec, std::size_t k) {
  const std::size_t n = g.n();
  if (k < 1 || k > n) {
    throw std::invalid_argument("spectral_embedding: k = " + std::to_string(k) + " outside [1, " +
                                std::to_string(n) + "]");
  }
  Embedding f;
  f.k = k;
  f.normalized = false;
  f.table = Matrix(g.space_size, k);
  for (std::size_t i = 0; i < g.space_size; ++i) f.node_ids.push_back("n" + std::to_string(i));
  for (std::size_t c = 0; c < k; ++c) {
    const double gamma = std::max(1.0 - spec.values[c], 0.0);
    const double s = std::sqrt(gamma);
    for (std::size_t i = 0; i < n; ++i) {
      f.table(g.kept[i], c) = s * spec.vectors(i, c) / std::sqrt(g.degrees[i]);
    }
  }
  return f;
}

Embedding spectral_embedding(const AugmentationGraph& g, std::size_t k) {
  return spectral_embedding(g, laplacian_spectrum(g), k);
}

double spectral_loss_minimum(const Spectrum& spec, std::size_t k) {
  double acc = 0.0;
  for (std::size_t i = 0; i < k && i < spec.values.size(); ++i) {
    const double gamma = std::max(1.0 - spec.values[i], 0.0);
    acc -= gamma * gamma;
  }
  return acc;
}

TraceReport trace_check(const AugmentationGraph& raw, const AugmentationGraph& q) {
  TraceReport r;
  for (std::size_t i = 0; i < raw.n(); ++i) r.trace_raw += raw.A(i, i);
  for (std::size_t i = 0; i < q.n(); ++i) r.trace_q += q.A(i, i);
  r.within_bound = r.trace_q <= 1.0 + 1e-12;
  r.increased = r.trace_q > r.trace_raw + 1e-15;
  return r;
}

std::size_t count_components(const AugmentationGraph& g) {
  const std::size_t n = g.n();
  std::vector<int> seen(n, 0);
  std::size_t comps = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    ++comps;
    seen[s] = 1;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v = 0; v < n; ++v)
        if (!seen[v] && g.A(u, v) > 0.0) {
          seen[v] = 1;
          stack.push_back(v);
        }
    }
  }
  return comps;
}

}  // namespace ctlab
