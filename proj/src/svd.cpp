#include "ctlab/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ctlab/rng.hpp"

namespace ctlab {

std::string TruncationSpec::describe() const {
  switch (mode) {
    case TruncationMode::keep_top_q:
      return "keep_top_q(q=" + std::to_string(q) + ")";
    case TruncationMode::discard_pair:
      return "discard_pair(i=" + std::to_string(index) + ")";
    case TruncationMode::discard_single:
      return "discard_single(i=" + std::to_string(index) + ")";
  }
  return "?";
}

void validate_truncation(const TruncationSpec& spec, std::size_t m, std::size_t mp) {
  const std::size_t r = std::min(m, mp);
  switch (spec.mode) {
    case TruncationMode::keep_top_q:
      if (spec.q < 1 || spec.q > r) {
        throw std::invalid_argument("svd.q: " + std::to_string(spec.q) + " outside [1, " +
                                    std::to_string(r) + "]");
      }
      break;
    case TruncationMode::discard_pair:
      if (spec.index < 1 || spec.index + 1 > r) {
        throw std::invalid_argument("svd.pair_index: " + std::to_string(spec.index) +
                                    " outside [1, " + std::to_string(r - 1) + "]");
      }
      break;
    case TruncationMode::discard_single:
      if (spec.index < 1 || spec.index > r) {
        throw std::invalid_argument("svd.pair_index: " + std::to_string(spec.index) +
                                    " outside [1, " + std::to_string(r) + "]");
      }
      break;
  }
}

namespace {

// Tall case, x is m x m' with m >= m'.
SvdFactors svd_tall(const Matrix& x) {
  const std::size_t m = x.rows();
  const std::size_t r = x.cols();
  SymEigen eg = sym_eig(transpose_times(x, x));

  Matrix v(r, r);
  for (std::size_t c = 0; c < r; ++c)
    for (std::size_t i = 0; i < r; ++i) v(i, c) = eg.vectors(i, r - 1 - c);
  Matrix b = x * v;

  std::vector<double> s(r);
  for (std::size_t c = 0; c < r; ++c) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) acc += b(i, c) * b(i, c);
    s[c] = std::sqrt(acc);
  }
  std::vector<std::size_t> order(r);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) { return s[a] > s[c]; });

  Matrix bs(m, r), vs(r, r);
  std::vector<double> ss(r);
  for (std::size_t c = 0; c < r; ++c) {
    ss[c] = s[order[c]];
    for (std::size_t i = 0; i < m; ++i) bs(i, c) = b(i, order[c]);
    for (std::size_t i = 0; i < r; ++i) vs(i, c) = v(i, order[c]);
  }

  Orthonormalized on = orthonormalize(bs);
  for (std::size_t c : on.completed_columns) ss[c] = 0.0;

  // Completed columns carry s = 0; re-sort so S stays descending.
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) { return ss[a] > ss[c]; });

  SvdFactors f;
  f.m = m;
  f.mp = r;
  f.U = Matrix(m, r);
  f.V = Matrix(r, r);
  f.S.resize(r);
  for (std::size_t c = 0; c < r; ++c) {
    f.S[c] = ss[order[c]];
    for (std::size_t i = 0; i < m; ++i) f.U(i, c) = on.basis(i, order[c]);
    for (std::size_t i = 0; i < r; ++i) f.V(i, c) = vs(i, order[c]);
  }
  return f;
}

Matrix synthesize(const SvdFactors& f, const std::vector<double>& s) {
  Matrix out(f.U.rows(), f.V.rows());
  for (std::size_t c = 0; c < s.size(); ++c) {
    if (s[c] == 0.0) continue;
    for (std::size_t i = 0; i < out.rows(); ++i) {
      const double ui = f.U(i, c) * s[c];
      if (ui == 0.0) continue;
      double* row = out.row(i);
      for (std::size_t j = 0; j < out.cols(); ++j) row[j] += ui * f.V(j, c);
    }
  }
  return out;
}

std::vector<double> kept_values(const SvdFactors& f, const TruncationSpec& spec) {
  validate_truncation(spec, f.m, f.mp);
  std::vector<double> s = f.S;
  switch (spec.mode) {
    case TruncationMode::keep_top_q:
      for (std::size_t c = spec.q; c < s.size(); ++c) s[c] = 0.0;
      break;
    case TruncationMode::discard_pair:
      s[spec.index - 1] = 0.0;
      s[spec.index] = 0.0;
      break;
    case TruncationMode::discard_single:
      s[spec.index - 1] = 0.0;
      break;
  }
  return s;
}

}  // namespace

SvdFactors svd_full(const Matrix& x) {
  if (x.empty()) throw std::invalid_argument("svd_full: empty matrix");
  if (x.rows() >= x.cols()) return svd_tall(x);
  SvdFactors t = svd_tall(x.transpose());
  std::swap(t.U, t.V);
  std::swap(t.m, t.mp);
  return t;
}

Matrix reconstruct(const SvdFactors& f) { return synthesize(f, f.S); }

Matrix svd_truncate(const SvdFactors& f, const TruncationSpec& spec) {
  return synthesize(f, kept_values(f, spec));
}

double truncation_residual_sq(const SvdFactors& f, const TruncationSpec& spec) {
  const std::vector<double> kept = kept_values(f, spec);
  double acc = 0.0;
  for (std::size_t c = 0; c < kept.size(); ++c)
    if (kept[c] == 0.0) acc += f.S[c] * f.S[c];
  return acc;
}

SvdFactors rsvd(const Matrix& x, std::size_t q, std::size_t oversample, std::size_t power_iters,
                std::uint64_t seed) {
  const std::size_t r = std::min(x.rows(), x.cols());
  const std::size_t l = q + oversample;
  if (q < 1 || l > r) {
    throw std::invalid_argument("rsvd: q + oversample = " + std::to_string(l) +
                                " must be in [1, " + std::to_string(r) + "]");
  }
  const Matrix omega = gaussian_matrix(x.cols(), l, seed);
  Matrix qm = orthonormalize(x * omega).basis;
  for (std::size_t it = 0; it < power_iters; ++it) {
    const Matrix z = orthonormalize(transpose_times(x, qm)).basis;
    qm = orthonormalize(x * z).basis;
  }
  const Matrix small = transpose_times(qm, x);  // l x m'
  const SvdFactors sf = svd_full(small);

  SvdFactors f;
  f.m = x.rows();
  f.mp = x.cols();
  const Matrix u_full = qm * sf.U;
  f.U = u_full.cols_range(0, q);
  f.V = sf.V.cols_range(0, q);
  f.S.assign(sf.S.begin(), sf.S.begin() + static_cast<std::ptrdiff_t>(q));
  return f;
}

EckartYoungReport eckart_young_check(const Matrix& x, std::size_t q, std::size_t trials,
                                     std::uint64_t seed) {
  const std::size_t m = x.rows();
  const std::size_t mp = x.cols();
  if (q < 1 || q > std::min(m, mp)) throw std::invalid_argument("eckart_young_check: q out of range");
  if (trials < 1) throw std::invalid_argument("eckart_young_check: trials must be >= 1");

  const SvdFactors f = svd_full(x);
  const Matrix xq = svd_truncate(f, TruncationSpec::keep_top(q));

  EckartYoungReport rep;
  rep.trials = trials;
  rep.truncated_error = std::sqrt(frobenius_distance_sq(x, xq));
  rep.min_competitor_error = INFINITY;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::uint64_t ts = hash_pair(seed, t);
    Matrix b;
    if (t % 2 == 0) {
      const Matrix p = orthonormalize(gaussian_matrix(m, q, ts)).basis;
      b = p * transpose_times(p, x);
    } else {
      const Matrix g1 = gaussian_matrix(m, q, ts);
      const Matrix g2 = gaussian_matrix(q, mp, hash_pair(ts, 1));
      b = g1 * g2;
      double xc = 0.0, cc = 0.0;
      for (std::size_t i = 0; i < b.size(); ++i) {
        xc += x.data()[i] * b.data()[i];
        cc += b.data()[i] * b.data()[i];
      }
      if (cc > 0.0) b *= xc / cc;
    }
    const double err = std::sqrt(frobenius_distance_sq(x, b));
    rep.min_competitor_error = std::min(rep.min_competitor_error, err);
    if (rep.truncated_error > err + 1e-10) ++rep.violations;
  }
  rep.holds = rep.violations == 0;
  return rep;
}

}  // namespace ctlab
