#include "ctlab/embedding.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace ctlab {

void normalize_rows(Embedding& f) {
  for (std::size_t x = 0; x < f.n(); ++x) {
    double* r = f.table.row(x);
    const double nr = std::sqrt(dot(r, r, f.k));
    if (nr > 0.0) {
      for (std::size_t j = 0; j < f.k; ++j) r[j] /= nr;
    } else {
      for (std::size_t j = 0; j < f.k; ++j) r[j] = j == 0 ? 1.0 : 0.0;
    }
  }
  f.normalized = true;
}

void validate_embedding(const Embedding& f, std::size_t n) {
  if (f.k < 1 || f.table.cols() != f.k) throw std::invalid_argument("embedding: k does not match table");
  if (f.n() != n) {
    throw std::invalid_argument("embedding: " + std::to_string(f.n()) + " rows for " + std::to_string(n) +
                                " nodes");
  }
  if (!f.table.all_finite()) throw std::invalid_argument("embedding: non-finite entry");
  if (f.normalized) {
    for (std::size_t x = 0; x < f.n(); ++x) {
      const double nr = std::sqrt(dot(f.row(x), f.row(x), f.k));
      if (std::abs(nr - 1.0) > 1e-10) {
        throw std::invalid_argument("embedding: row " + std::to_string(x) + " has norm " + std::to_string(nr) +
                                    " but normalized is set");
      }
    }
  }
}

void save_embedding(const Embedding& f, const std::string& stem) {
  save_matrix(stem + ".mat", f.table);
  std::ofstream os(stem + ".nodes", std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + stem + ".nodes");
  os << "normalized = " << (f.normalized ? "true" : "false") << "\n";
  for (const auto& id : f.node_ids) os << id << "\n";
}

Embedding load_embedding(const std::string& stem) {
  Embedding f;
  f.table = load_matrix(stem + ".mat");
  f.k = f.table.cols();
  std::ifstream is(stem + ".nodes");
  if (!is) throw std::runtime_error("cannot read " + stem + ".nodes");
  std::string line;
  if (!std::getline(is, line) || (line != "normalized = true" && line != "normalized = false")) {
    throw std::runtime_error(stem + ".nodes: expected 'normalized = true|false' header");
  }
  f.normalized = line == "normalized = true";
  while (std::getline(is, line))
    if (!line.empty()) f.node_ids.push_back(line);
  if (f.node_ids.size() != f.n()) throw std::runtime_error(stem + ".nodes: id count does not match rows");
  return f;
}

}  // namespace ctlab
