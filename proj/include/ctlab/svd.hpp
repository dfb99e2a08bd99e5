#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ctlab/linalg.hpp"

namespace ctlab {

struct SvdFactors {
  Matrix U;               // m x r
  std::vector<double> S;  // length r, descending, >= 0
  Matrix V;               // m' x r
  std::size_t m = 0;
  std::size_t mp = 0;

  std::size_t rank_bound() const { return S.size(); }
};

enum class TruncationMode { keep_top_q, discard_pair, discard_single };

// Indices are 1-based, matching s_1 >= s_2 >= ...
struct TruncationSpec {
  TruncationMode mode = TruncationMode::keep_top_q;
  std::size_t q = 0;
  std::size_t index = 0;

  static TruncationSpec keep_top(std::size_t q) { return {TruncationMode::keep_top_q, q, 0}; }
  static TruncationSpec discard_pair(std::size_t i) { return {TruncationMode::discard_pair, 0, i}; }
  static TruncationSpec discard_single(std::size_t i) {
    return {TruncationMode::discard_single, 0, i};
  }
  std::string describe() const;
};

// Throws std::invalid_argument naming the offending field.
void validate_truncation(const TruncationSpec& spec, std::size_t m, std::size_t mp);

// Thin SVD through the Gram matrix of the smaller side.
SvdFactors svd_full(const Matrix& x);
Matrix reconstruct(const SvdFactors& f);
Matrix svd_truncate(const SvdFactors& f, const TruncationSpec& spec);
// Sum of squared discarded singular values.
double truncation_residual_sq(const SvdFactors& f, const TruncationSpec& spec);

SvdFactors rsvd(const Matrix& x, std::size_t q, std::size_t oversample = 8,
                std::size_t power_iters = 2, std::uint64_t seed = 0);

struct EckartYoungReport {
  double truncated_error = 0.0;       // ||X - X_q||_F
  double min_competitor_error = 0.0;  // min over competitors ||X - B||_F
  std::size_t trials = 0;
  std::size_t violations = 0;
  bool holds = true;
};

// Even trials use rank-q projections P P^T X of X onto a random subspace,
// odd trials use a Gaussian product G1 G2 scaled by its best scalar fit.
EckartYoungReport eckart_young_check(const Matrix& x, std::size_t q, std::size_t trials,
                                     std::uint64_t seed);

}  // namespace ctlab
