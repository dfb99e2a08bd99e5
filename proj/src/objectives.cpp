#include "ctlab/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ctlab/rng.hpp"

namespace ctlab {

namespace {

// Inverse-CDF sampler over nonnegative weights.
class Discrete {
 public:
  explicit Discrete(const std::vector<double>& w) {
    cum_.reserve(w.size());
    double acc = 0.0;
    for (double x : w) {
      acc += x;
      cum_.push_back(acc);
    }
    if (!(acc > 0.0)) throw std::invalid_argument("sampler: zero total mass");
  }
  std::size_t draw(double u) const {
    const double t = u * cum_.back();
    auto it = std::lower_bound(cum_.begin(), cum_.end(), t);
    std::size_t i = static_cast<std::size_t>(it - cum_.begin());
    // lower_bound never lands on a zero-weight entry since t > 0.
    if (i >= cum_.size()) i = cum_.size() - 1;
    return i;
  }

 private:
  std::vector<double> cum_;
};

double logaddexp(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

void check_cover(const Embedding& f, const AugmentedSpace& space, const char* who) {
  if (f.n() != space.n()) {
    throw std::invalid_argument(std::string(who) + ": embedding has " + std::to_string(f.n()) +
                                " rows, space has " + std::to_string(space.n()) + " nodes");
  }
}

// Per-tuple loss; fills pi (softmax over [s+, s_1..s_M]) when requested.
double tuple_loss(const Embedding& f, const std::size_t* t, std::size_t M, std::vector<double>* pi) {
  const std::size_t k = f.k;
  std::vector<double> s(M + 1);
  s[0] = dot(f.row(t[0]), f.row(t[1]), k);
  for (std::size_t i = 0; i < M; ++i) s[i + 1] = dot(f.row(t[0]), f.row(t[2 + i]), k);
  const double lse = log_sum_exp(s.data(), s.size());
  if (pi) {
    pi->resize(M + 1);
    for (std::size_t i = 0; i <= M; ++i) (*pi)[i] = std::exp(s[i] - lse);
  }
  return lse - s[0];
}

// Calls fn(tuple, weight) for every negative tuple in [0, n)^M with
// weight prod p(x_i).
template <typename Fn>
void for_each_negative_tuple(const std::vector<double>& p, std::size_t M, Fn fn) {
  const std::size_t n = p.size();
  std::vector<std::size_t> cur(M, 0);
  while (true) {
    double w = 1.0;
    for (std::size_t i = 0; i < M; ++i) w *= p[cur[i]];
    if (w > 0.0) fn(cur, w);
    std::size_t pos = 0;
    while (pos < M && ++cur[pos] == n) cur[pos++] = 0;
    if (pos == M) break;
  }
}

}  // namespace

std::size_t argmax(const double* v, std::size_t n) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

double log_sum_exp(const double* v, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, v[i]);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::exp(v[i] - m);
  return m + std::log(acc);
}

void Batch::add(std::size_t anchor, std::size_t positive, const std::vector<std::size_t>& negatives,
                double w) {
  if (negatives.size() != M) throw std::invalid_argument("batch: expected M negatives");
  idx.push_back(anchor);
  idx.push_back(positive);
  idx.insert(idx.end(), negatives.begin(), negatives.end());
  weight.push_back(w);
}

std::size_t full_support_size(const AugmentedSpace& space, std::size_t M) {
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < space.n(); ++a)
    for (std::size_t b = 0; b < space.n(); ++b)
      if (space.joint(a, b) > 0.0) ++pairs;
  std::size_t negs = 0;
  for (double p : space.marginal)
    if (p > 0.0) ++negs;
  double total = static_cast<double>(pairs);
  for (std::size_t i = 0; i < M; ++i) total *= static_cast<double>(negs);
  if (total > 1e15) return static_cast<std::size_t>(1e15);
  return static_cast<std::size_t>(total);
}

Batch full_support_batch(const AugmentedSpace& space, std::size_t M) {
  if (M < 1) throw std::invalid_argument("full_support_batch: M must be >= 1");
  Batch b;
  b.M = M;
  for (std::size_t a = 0; a < space.n(); ++a)
    for (std::size_t p = 0; p < space.n(); ++p) {
      const double w = space.joint(a, p);
      if (w <= 0.0) continue;
      for_each_negative_tuple(space.marginal, M, [&](const std::vector<std::size_t>& negs, double wn) {
        b.add(a, p, negs, w * wn);
      });
    }
  return b;
}

Batch sample_batch(const AugmentedSpace& space, std::size_t M, std::size_t count, std::uint64_t seed) {
  if (M < 1) throw std::invalid_argument("sample_batch: M must be >= 1");
  const std::size_t n = space.n();
  Discrete pairs(space.joint.data());
  Discrete marg(space.marginal);
  CounterRng rng(seed);
  Batch b;
  b.M = M;
  std::vector<std::size_t> negs(M);
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t pr = pairs.draw(rng.uniform());
    for (std::size_t i = 0; i < M; ++i) negs[i] = marg.draw(rng.uniform());
    b.add(pr / n, pr % n, negs);
  }
  return b;
}

Estimate infonce_population(const Embedding& f, const AugmentedSpace& space, std::size_t M,
                            const McConfig& cfg) {
  if (M < 1) throw std::invalid_argument("infonce_population: M must be >= 1");
  check_cover(f, space, "infonce_population");
  if (!(space.positive_mass + space.negative_mass > 0.0)) {
    throw std::invalid_argument("infonce_population: empty positive support");
  }
  const std::size_t n = space.n();
  const std::size_t k = f.k;
  Estimate est;
  if (cfg.exact_ok(n, M)) {
    est.exact = true;
    double total = 0.0;
    std::vector<double> log_neg;
    std::vector<double> wneg;
    for (std::size_t a = 0; a < n; ++a) {
      bool any = false;
      for (std::size_t p = 0; p < n; ++p) any = any || space.joint(a, p) > 0.0;
      if (!any) continue;
      log_neg.clear();
      wneg.clear();
      std::vector<double> s(M);
      for_each_negative_tuple(space.marginal, M, [&](const std::vector<std::size_t>& negs, double w) {
        for (std::size_t i = 0; i < M; ++i) s[i] = dot(f.row(a), f.row(negs[i]), k);
        log_neg.push_back(log_sum_exp(s.data(), M));
        wneg.push_back(w);
      });
      for (std::size_t p = 0; p < n; ++p) {
        const double wp = space.joint(a, p);
        if (wp <= 0.0) continue;
        const double sp = dot(f.row(a), f.row(p), k);
        double acc = 0.0;
        for (std::size_t t = 0; t < log_neg.size(); ++t) acc += wneg[t] * (logaddexp(sp, log_neg[t]) - sp);
        total += wp * acc;
      }
    }
    est.value = total;
    return est;
  }
  const Batch b = sample_batch(space, M, cfg.samples, derive_seed(cfg.seed, "infonce_population"));
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t t = 0; t < b.size(); ++t) {
    const double l = tuple_loss(f, b.tuple(t), M, nullptr);
    sum += l;
    sum2 += l * l;
  }
  const double N = static_cast<double>(b.size());
  est.value = sum / N;
  const double var = N > 1 ? std::max(0.0, (sum2 - N * est.value * est.value) / (N - 1)) : 0.0;
  est.std_error = std::sqrt(var / N);
  return est;
}

double infonce_empirical(const Embedding& f, const Batch& batch) {
  if (batch.size() == 0) throw std::invalid_argument("infonce_empirical: empty batch");
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < batch.size(); ++t) {
    num += batch.weight[t] * tuple_loss(f, batch.tuple(t), batch.M, nullptr);
    den += batch.weight[t];
  }
  return num / den;
}

Matrix infonce_gradient(const Embedding& f, const Batch& batch) {
  if (batch.size() == 0) throw std::invalid_argument("infonce_gradient: empty batch");
  const std::size_t k = f.k;
  const std::size_t M = batch.M;
  Matrix g(f.n(), k);
  double den = 0.0;
  for (double w : batch.weight) den += w;
  std::vector<double> pi;
  for (std::size_t t = 0; t < batch.size(); ++t) {
    const std::size_t* tp = batch.tuple(t);
    tuple_loss(f, tp, M, &pi);
    const double w = batch.weight[t] / den;
    const double* fa = f.row(tp[0]);
    double* ga = g.row(tp[0]);
    const double cp = w * (pi[0] - 1.0);
    const double* fp = f.row(tp[1]);
    double* gp = g.row(tp[1]);
    for (std::size_t j = 0; j < k; ++j) {
      ga[j] += cp * fp[j];
      gp[j] += cp * fa[j];
    }
    for (std::size_t i = 0; i < M; ++i) {
      const double ci = w * pi[i + 1];
      const double* fn = f.row(tp[2 + i]);
      double* gn = g.row(tp[2 + i]);
      for (std::size_t j = 0; j < k; ++j) {
        ga[j] += ci * fn[j];
        gn[j] += ci * fa[j];
      }
    }
  }
  if (f.normalized) {
    for (std::size_t x = 0; x < f.n(); ++x) {
      const double r = dot(g.row(x), f.row(x), k);
      for (std::size_t j = 0; j < k; ++j) g(x, j) -= r * f.table(x, j);
    }
  }
  return g;
}

double spectral_loss(const Embedding& f, const AugmentedSpace& space) {
  check_cover(f, space, "spectral_loss");
  const Matrix AF = space.joint * f.table;
  double first = 0.0;
  for (std::size_t i = 0; i < AF.size(); ++i) first += AF.data()[i] * f.table.data()[i];
  Matrix PF = f.table;
  for (std::size_t x = 0; x < PF.rows(); ++x)
    for (std::size_t j = 0; j < PF.cols(); ++j) PF(x, j) *= space.marginal[x];
  const Matrix C = transpose_times(f.table, PF);
  const double fro = C.frobenius_norm();
  return -2.0 * first + fro * fro;
}

Matrix spectral_loss_gradient(const Embedding& f, const AugmentedSpace& space) {
  check_cover(f, space, "spectral_loss_gradient");
  Matrix PF = f.table;
  for (std::size_t x = 0; x < PF.rows(); ++x)
    for (std::size_t j = 0; j < PF.cols(); ++j) PF(x, j) *= space.marginal[x];
  const Matrix C = transpose_times(f.table, PF);
  Matrix g = (PF * C) * 4.0;
  g -= (space.joint * f.table) * 4.0;
  return g;
}

TrainResult train_free_embeddings(const AugmentedSpace& space, const TrainConfig& cfg) {
  if (cfg.k < 1) throw std::invalid_argument("train.k: must be >= 1");
  if (!(cfg.step_size > 0.0)) throw std::invalid_argument("train.step_size: must be positive");
  const std::size_t n = space.n();
  TrainResult res;
  Embedding& f = res.f;
  f.k = cfg.k;
  for (const auto& nd : space.nodes) f.node_ids.push_back(nd.id);
  f.table = gaussian_matrix(n, cfg.k, derive_seed(cfg.seed, "init"));

  Batch batch;
  std::vector<double> precond(n, 0.0);
  if (cfg.loss == LossKind::infonce) {
    if (cfg.M < 1) throw std::invalid_argument("train.M: must be >= 1");
    f.normalized = true;
    normalize_rows(f);
    batch = full_support_size(space, cfg.M) <= cfg.full_support_max
                ? full_support_batch(space, cfg.M)
                : sample_batch(space, cfg.M, cfg.batch_size, derive_seed(cfg.seed, "batch"));
  } else {
    // Descent runs in the coordinates G = P^{1/2} F, where the problem is
    // well conditioned; in F this is a diagonal preconditioner P^{-1}.
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t x = 0; x < n; ++x) {
      const double p = space.marginal[x];
      precond[x] = p > 0.0 ? 1.0 / p : 0.0;
      for (std::size_t j = 0; j < cfg.k; ++j) f.table(x, j) = p > 0.0 ? f.table(x, j) * scale / std::sqrt(p) : 0.0;
    }
  }

  auto loss_of = [&](const Embedding& e) {
    return cfg.loss == LossKind::infonce ? infonce_empirical(e, batch) : spectral_loss(e, space);
  };
  double loss = loss_of(f);
  res.initial_loss = loss;
  double eta = cfg.step_size;
  for (std::size_t s = 0; s < cfg.steps; ++s) {
    Matrix g = cfg.loss == LossKind::infonce ? infonce_gradient(f, batch) : spectral_loss_gradient(f, space);
    Embedding trial = f;
    for (std::size_t x = 0; x < n; ++x) {
      const double c = cfg.loss == LossKind::infonce ? eta : eta * precond[x];
      for (std::size_t j = 0; j < cfg.k; ++j) trial.table(x, j) -= c * g(x, j);
    }
    if (cfg.loss == LossKind::infonce) normalize_rows(trial);
    const double tl = loss_of(trial);
    if (std::isnan(tl)) {
      throw std::runtime_error("train_free_embeddings: loss diverged (NaN) at step " + std::to_string(s));
    }
    if (tl <= loss) {
      f = std::move(trial);
      loss = tl;
      ++res.accepted_steps;
      res.loss_trace.push_back(loss);
      eta *= 1.2;
    } else {
      eta *= 0.5;
      if (eta < 1e-18) break;
    }
  }
  res.final_loss = loss;
  return res;
}

MeanHead mean_head(const Embedding& f, const AugmentedSpace& space) {
  check_cover(f, space, "mean_head");
  const std::size_t K = space.num_classes;
  MeanHead h;
  h.mu = Matrix(K, f.k);
  h.class_mass.assign(K, 0.0);
  for (std::size_t x = 0; x < space.n(); ++x) {
    const auto c = static_cast<std::size_t>(space.label(x));
    const double p = space.marginal[x];
    h.class_mass[c] += p;
    for (std::size_t j = 0; j < f.k; ++j) h.mu(c, j) += p * f.table(x, j);
  }
  for (std::size_t c = 0; c < K; ++c) {
    if (!(h.class_mass[c] > 0.0)) {
      throw std::invalid_argument("mean_head: class " + std::to_string(c) + " has zero marginal mass");
    }
    for (std::size_t j = 0; j < f.k; ++j) h.mu(c, j) /= h.class_mass[c];
  }
  return h;
}

namespace {

double ce_with_weights(const Embedding& f, const Matrix& W, const AugmentedSpace& space) {
  const std::size_t K = W.cols();
  const Matrix logits = f.table * W;
  double acc = 0.0;
  for (std::size_t x = 0; x < space.n(); ++x) {
    const double p = space.marginal[x];
    if (p <= 0.0) continue;
    const double* z = logits.row(x);
    acc += p * (log_sum_exp(z, K) - z[space.label(x)]);
  }
  return acc;
}

}  // namespace

double ce_risk(const Embedding& f, const MeanHead& head, const AugmentedSpace& space) {
  check_cover(f, space, "ce_risk");
  if (head.mu.cols() != f.k) throw std::invalid_argument("ce_risk: mean head dimension mismatch");
  return ce_with_weights(f, head.mu.transpose(), space);
}

double ce_risk(const Embedding& f, const LinearHead& head, const AugmentedSpace& space) {
  check_cover(f, space, "ce_risk");
  if (head.W.rows() != f.k || head.W.cols() != space.num_classes) {
    throw std::invalid_argument("ce_risk: linear head shape mismatch");
  }
  return ce_with_weights(f, head.W, space);
}

LinearHead fit_linear_head(const Embedding& f, const AugmentedSpace& space, const ProbeConfig& cfg) {
  check_cover(f, space, "fit_linear_head");
  if (cfg.l2 < 0.0) throw std::invalid_argument("probe.l2: must be >= 0");
  if (!(cfg.step_size > 0.0)) throw std::invalid_argument("probe.step_size: must be positive");
  const std::size_t k = f.k;
  const std::size_t K = space.num_classes;
  const std::size_t n = space.n();
  LinearHead head;
  head.W = Matrix(k, K);

  auto objective = [&](const Matrix& W) {
    const double fro = W.frobenius_norm();
    return ce_with_weights(f, W, space) + 0.5 * cfg.l2 * fro * fro;
  };
  auto gradient = [&](const Matrix& W) {
    const Matrix logits = f.table * W;
    Matrix R(n, K);
    for (std::size_t x = 0; x < n; ++x) {
      const double p = space.marginal[x];
      if (p <= 0.0) continue;
      const double* z = logits.row(x);
      const double lse = log_sum_exp(z, K);
      for (std::size_t c = 0; c < K; ++c) R(x, c) = p * std::exp(z[c] - lse);
      R(x, static_cast<std::size_t>(space.label(x))) -= p;
    }
    Matrix g = transpose_times(f.table, R);
    if (cfg.l2 > 0.0) g += W * cfg.l2;
    return g;
  };

  double J = objective(head.W);
  double eta = cfg.step_size;
  for (std::size_t s = 0; s < cfg.steps; ++s) {
    const Matrix g = gradient(head.W);
    if (g.frobenius_norm() < 1e-12) break;
    Matrix trial = head.W - g * eta;
    const double tj = objective(trial);
    if (std::isnan(tj)) throw std::runtime_error("fit_linear_head: objective diverged (NaN)");
    if (tj <= J) {
      head.W = std::move(trial);
      J = tj;
      eta *= 1.2;
    } else {
      eta *= 0.5;
      if (eta < 1e-18) break;
    }
  }
  head.final_risk = ce_with_weights(f, head.W, space);
  return head;
}

std::vector<int> predict(const Embedding& f, const Matrix& W) {
  if (W.rows() != f.k) throw std::invalid_argument("predict: head has wrong row count");
  const Matrix logits = f.table * W;
  std::vector<int> out(f.n());
  for (std::size_t x = 0; x < f.n(); ++x) out[x] = static_cast<int>(argmax(logits.row(x), W.cols()));
  return out;
}

double classification_error(const Embedding& f, const LinearHead& head, const AugmentedSpace& space,
                            ErrorMeasure measure) {
  check_cover(f, space, "classification_error");
  const std::vector<int> pred = predict(f, head.W);
  double err = 0.0;
  if (measure == ErrorMeasure::node) {
    for (std::size_t x = 0; x < space.n(); ++x)
      if (pred[x] != space.label(x)) err += space.marginal[x];
  } else {
    for (std::size_t o = 0; o < space.num_originals(); ++o)
      for (std::size_t x = 0; x < space.n(); ++x)
        if (pred[x] != space.original_labels[o]) err += space.original_weights[o] * space.cond(o, x);
  }
  return err;
}

double majority_vote_error(const Embedding& f, const LinearHead& head, const AugmentedSpace& space) {
  check_cover(f, space, "majority_vote_error");
  const std::vector<int> pred = predict(f, head.W);
  const std::size_t K = head.W.cols();
  double err = 0.0;
  std::vector<double> votes(K);
  for (std::size_t o = 0; o < space.num_originals(); ++o) {
    std::fill(votes.begin(), votes.end(), 0.0);
    for (std::size_t x = 0; x < space.n(); ++x) votes[static_cast<std::size_t>(pred[x])] += space.cond(o, x);
    if (static_cast<int>(argmax(votes.data(), K)) != space.original_labels[o]) err += space.original_weights[o];
  }
  return err;
}

}  // namespace ctlab
