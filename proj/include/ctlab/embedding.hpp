#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ctlab/linalg.hpp"

namespace ctlab {

// Node-indexed representation table: row i is f(node i).
struct Embedding {
  std::size_t k = 0;
  Matrix table;
  std::vector<std::string> node_ids;
  bool normalized = false;

  std::size_t n() const { return table.rows(); }
  const double* row(std::size_t i) const { return table.row(i); }
};

// Rescales every row to unit norm; zero rows become e_1.
void normalize_rows(Embedding& f);

// Checks the unit-norm invariant when normalized is set.
void validate_embedding(const Embedding& f, std::size_t n);

struct MeanHead {
  Matrix mu;  // K x k, row i is the class mean
  std::vector<double> class_mass;
};

struct LinearHead {
  Matrix W;  // k x K
  double final_risk = 0.0;
  double frobenius_norm() const { return W.frobenius_norm(); }
};

// Writes <stem>.mat (CTLAB-MAT) and <stem>.nodes (one id per line).
void save_embedding(const Embedding& f, const std::string& stem);
Embedding load_embedding(const std::string& stem);

}  // namespace ctlab
