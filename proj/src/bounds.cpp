#include "ctlab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "ctlab/graph.hpp"
#include "ctlab/rng.hpp"

namespace ctlab {

namespace {

double dist(const Embedding& f, std::size_t a, std::size_t b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < f.k; ++j) {
    const double d = f.table(a, j) - f.table(b, j);
    acc += d * d;
  }
  return std::sqrt(acc);
}

double dist_to(const Embedding& f, std::size_t a, const Matrix& mu, std::size_t c) {
  double acc = 0.0;
  for (std::size_t j = 0; j < f.k; ++j) {
    const double d = f.table(a, j) - mu(c, j);
    acc += d * d;
  }
  return std::sqrt(acc);
}

int rank(Verdict v) {
  switch (v) {
    case Verdict::holds: return 0;
    case Verdict::holds_vacuously: return 1;
    case Verdict::undefined: return 2;
    case Verdict::inconclusive: return 3;
    case Verdict::violated_within_mc_error: return 4;
    case Verdict::violated: return 5;
  }
  return 5;
}

Verdict side_verdict(const BoundSide& s) {
  const double sl = s.slack();
  if (sl >= -s.tolerance) return Verdict::holds;
  if (sl + s.mc_margin >= -s.tolerance) return Verdict::violated_within_mc_error;
  return Verdict::violated;
}

bool side_holds(const BoundSide& s) { return s.slack() >= -s.tolerance; }

void require_normalized(const Embedding& f, const char* who) {
  if (!f.normalized) throw std::invalid_argument(std::string(who) + ": embedding must be normalized");
}

struct Envelope {
  double core = 0.0;
  double margin = 0.0;
  double total() const { return core + margin; }
};

Envelope add_envelope_terms(BoundReport& r, const LseError& lse, const Estimate& inf) {
  Envelope e;
  e.core = lse.mean_abs_error;
  e.margin = 3.0 * lse.std + 3.0 * inf.std_error;
  r.set("lse_error_mean", lse.mean_abs_error);
  r.set("lse_error_std", lse.std);
  r.set("infonce_std_error", inf.std_error);
  r.set("envelope", e.total());
  r.set("exact", (lse.exact && inf.exact) ? 1.0 : 0.0);
  return e;
}

}  // namespace

VarianceTerms variance_terms(const Embedding& f, const AugmentedSpace& space) {
  const MeanHead mh = mean_head(f, space);
  const std::size_t n = space.n();
  VarianceTerms vt;
  double v_pos = 0.0, v_neg_branch = 0.0, v_minus = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      const double w = space.joint(a, b);
      if (w <= 0.0) continue;
      const auto ya = static_cast<std::size_t>(space.label(a));
      if (space.same_label(a, b)) {
        vt.mass_pos += w;
        const double da = dist_to(f, a, mh.mu, ya);
        v_pos += w * da * da;
        vt.first_moment_pos += w * da;
        const double db = dist_to(f, b, mh.mu, static_cast<std::size_t>(space.label(b)));
        v_neg_branch += w * db * db;
      } else {
        vt.mass_neg += w;
        const double db = dist_to(f, b, mh.mu, ya);
        v_minus += w * db * db;
        vt.first_moment_neg += w * db;
      }
    }
  if (!(vt.mass_pos > 0.0)) throw std::invalid_argument("variance_terms: empty X+ support");
  vt.V = v_pos / vt.mass_pos;
  if (vt.mass_neg > 0.0) vt.V_minus = v_minus / vt.mass_neg;
  double marg = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    const double d = dist_to(f, x, mh.mu, static_cast<std::size_t>(space.label(x)));
    marg += space.marginal[x] * d * d;
  }
  vt.V_neg = 0.5 * (v_neg_branch / vt.mass_pos) + 0.5 * marg;
  return vt;
}

LseError lse_approx_error(const Embedding& f, const AugmentedSpace& space, std::size_t M,
                          const McConfig& cfg) {
  if (M < 1) throw std::invalid_argument("lse_approx_error: M must be >= 1");
  const std::size_t n = space.n();
  const std::size_t k = f.k;
  const double logM = std::log(static_cast<double>(M));
  // Exact LSE per anchor.
  std::vector<double> lse(n, 0.0);
  std::vector<double> s(n);
  for (std::size_t x = 0; x < n; ++x) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t z = 0; z < n; ++z) {
      s[z] = dot(f.row(x), f.row(z), k);
      if (space.marginal[z] > 0.0) m = std::max(m, s[z]);
    }
    double acc = 0.0;
    for (std::size_t z = 0; z < n; ++z) acc += space.marginal[z] * std::exp(s[z] - m);
    lse[x] = m + std::log(acc);
  }
  LseError out;
  std::vector<double> sv(M);
  if (cfg.exact_ok(n, M)) {
    out.exact = true;
    double total = 0.0;
    std::vector<std::size_t> cur(M, 0);
    for (std::size_t x = 0; x < n; ++x) {
      if (space.marginal[x] <= 0.0) continue;
      double acc = 0.0;
      std::fill(cur.begin(), cur.end(), 0);
      while (true) {
        double w = 1.0;
        for (std::size_t i = 0; i < M; ++i) w *= space.marginal[cur[i]];
        if (w > 0.0) {
          for (std::size_t i = 0; i < M; ++i) sv[i] = dot(f.row(x), f.row(cur[i]), k);
          acc += w * std::abs(log_sum_exp(sv.data(), M) - logM - lse[x]);
        }
        std::size_t pos = 0;
        while (pos < M && ++cur[pos] == n) cur[pos++] = 0;
        if (pos == M) break;
      }
      total += space.marginal[x] * acc;
    }
    out.mean_abs_error = total;
    return out;
  }
  if (cfg.replicates < 2) throw std::invalid_argument("lse_approx_error: replicates must be >= 2");
  std::vector<double> cum(n);
  double c = 0.0;
  for (std::size_t x = 0; x < n; ++x) cum[x] = (c += space.marginal[x]);
  auto draw = [&](double u) {
    auto it = std::lower_bound(cum.begin(), cum.end(), u * cum.back());
    return std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()), n - 1);
  };
  std::vector<double> means;
  for (std::size_t r = 0; r < cfg.replicates; ++r) {
    CounterRng rng(derive_seed(cfg.seed, "lse/" + std::to_string(r)));
    double acc = 0.0;
    for (std::size_t t = 0; t < cfg.samples; ++t) {
      const std::size_t x = draw(rng.uniform());
      for (std::size_t i = 0; i < M; ++i) sv[i] = dot(f.row(x), f.row(draw(rng.uniform())), k);
      acc += std::abs(log_sum_exp(sv.data(), M) - logM - lse[x]);
    }
    means.push_back(acc / static_cast<double>(cfg.samples));
  }
  double mean = 0.0;
  for (double v : means) mean += v;
  mean /= static_cast<double>(means.size());
  double var = 0.0;
  for (double v : means) var += (v - mean) * (v - mean);
  var /= static_cast<double>(means.size() - 1);
  out.mean_abs_error = mean;
  out.std = std::sqrt(var);
  return out;
}

EpsAlignment alignment_eps(const Embedding& f, const AugmentedSpace& space) {
  EpsAlignment e;
  const std::size_t n = space.n();
  bool first_pos = true;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      if (space.joint(a, b) <= 0.0) continue;
      const double d = dist(f, a, b);
      if (space.same_label(a, b)) {
        if (first_pos || d > e.pos_max) {
          e.pos_max = d;
          e.pos_argmax = {a, b};
          first_pos = false;
        }
      } else if (!e.has_false_positives) {
        e.has_false_positives = true;
        e.eps_min = e.eps_max = d;
        e.argmin = e.argmax = {a, b};
      } else {
        if (d < e.eps_min) {
          e.eps_min = d;
          e.argmin = {a, b};
        }
        if (d > e.eps_max) {
          e.eps_max = d;
          e.argmax = {a, b};
        }
      }
    }
  return e;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::holds_vacuously: return "holds_vacuously";
    case Verdict::violated_within_mc_error: return "violated_within_mc_error";
    case Verdict::violated: return "violated";
    case Verdict::inconclusive: return "inconclusive";
    case Verdict::undefined: return "undefined";
  }
  return "undefined";
}

Verdict parse_verdict(const std::string& s) {
  for (Verdict v : {Verdict::holds, Verdict::holds_vacuously, Verdict::violated_within_mc_error,
                    Verdict::violated, Verdict::inconclusive, Verdict::undefined})
    if (to_string(v) == s) return v;
  throw std::invalid_argument("unknown verdict '" + s + "'");
}

std::optional<double> BoundReport::term(const std::string& name) const {
  for (const auto& [k, v] : terms)
    if (k == name) return v;
  return std::nullopt;
}

void BoundReport::set(const std::string& name, double v) {
  for (auto& [k, val] : terms)
    if (k == name) {
      val = v;
      return;
    }
  terms.emplace_back(name, v);
}

Verdict worst(const std::vector<Verdict>& vs) {
  Verdict w = Verdict::holds;
  for (Verdict v : vs)
    if (rank(v) > rank(w)) w = v;
  return w;
}

bool is_violation(Verdict v) { return v == Verdict::violated; }

Verdict derive_verdict(const BoundReport& r) {
  if (r.undefined) return Verdict::undefined;
  for (const auto& s : r.sides)
    if (s.kind == BoundSide::Kind::gate && !side_holds(s)) return Verdict::inconclusive;
  if (r.vacuous_at) {
    const auto b = r.term("bound");
    if (b && *b >= *r.vacuous_at) return Verdict::holds_vacuously;
  }
  bool any_witness = false, any_witness_holds = false, conclusive_witness = false;
  bool premise_failed = false;
  std::vector<Verdict> bound_verdicts;
  for (const auto& s : r.sides) {
    switch (s.kind) {
      case BoundSide::Kind::witness:
        any_witness = true;
        any_witness_holds = any_witness_holds || side_holds(s);
        conclusive_witness = conclusive_witness || s.name == "search";
        break;
      case BoundSide::Kind::premise:
        premise_failed = premise_failed || !side_holds(s);
        break;
      case BoundSide::Kind::bound:
        bound_verdicts.push_back(side_verdict(s));
        break;
      case BoundSide::Kind::gate:
        break;
    }
  }
  if (any_witness) {
    if (any_witness_holds) return Verdict::holds;
    return conclusive_witness ? Verdict::violated : Verdict::inconclusive;
  }
  Verdict v = worst(bound_verdicts);
  if (premise_failed && (v == Verdict::violated || v == Verdict::violated_within_mc_error)) {
    return Verdict::inconclusive;
  }
  return v;
}

double derive_slack(const BoundReport& r) {
  double bound_slack = std::numeric_limits<double>::infinity();
  double witness_slack = -std::numeric_limits<double>::infinity();
  bool any_bound = false, any_witness = false;
  for (const auto& s : r.sides) {
    if (s.kind == BoundSide::Kind::bound) {
      bound_slack = std::min(bound_slack, s.slack());
      any_bound = true;
    } else if (s.kind == BoundSide::Kind::witness) {
      witness_slack = std::max(witness_slack, s.slack());
      any_witness = true;
    }
  }
  if (any_witness) return witness_slack;
  return any_bound ? bound_slack : 0.0;
}

void finalize(BoundReport& r) {
  r.verdict = derive_verdict(r);
  r.slack = derive_slack(r);
}

BoundReport theorem1_check(const Embedding& f, const AugmentedSpace& space, const CheckConfig& cfg) {
  require_normalized(f, "theorem1_check");
  if (cfg.M < 1) throw std::invalid_argument("theorem1_check: M must be >= 1");
  const double M = static_cast<double>(cfg.M);
  const double K = static_cast<double>(space.num_classes);
  BoundReport r;
  r.theorem = "t1";
  const MeanHead mh = mean_head(f, space);
  const double ce = ce_risk(f, mh, space);
  const Estimate inf = infonce_population(f, space, cfg.M, cfg.mc);
  const VarianceTerms vt = variance_terms(f, space);
  const LseError lse = lse_approx_error(f, space, cfg.M, cfg.mc);
  const double gap = ce - inf.value;
  r.set("M", M);
  r.set("K", K);
  r.set("ce_mean", ce);
  r.set("infonce", inf.value);
  r.set("gap", gap);
  r.set("V", vt.V);
  if (vt.V_minus) r.set("V_minus", *vt.V_minus);
  r.set("V_neg", vt.V_neg);
  r.set("mass_pos", vt.mass_pos);
  r.set("mass_neg", vt.mass_neg);
  const Envelope env = add_envelope_terms(r, lse, inf);
  r.set("log_M_over_K", std::log(M / K));
  r.set("log_M1_over_K", std::log((M + 1.0) / K));
  const double sv = std::sqrt(vt.V) + (vt.V_minus ? std::sqrt(*vt.V_minus) : 0.0);
  BoundSide up{"upper", BoundSide::Kind::bound, true, gap, sv + env.total() - std::log(M / K), 1e-10, env.margin};
  BoundSide lo{"lower", BoundSide::Kind::bound, false, gap,
               -sv - 0.5 * vt.V_neg - env.total() - std::log((M + 1.0) / K), 1e-10, env.margin};
  r.sides = {up, lo};
  r.notes.push_back("V_neg: equal-weight mixture of z = f(x+) over X+ and z = f(x) over the marginal");
  if (!vt.V_minus) r.notes.push_back("V_minus absent: X- has zero mass");
  finalize(r);
  return r;
}

BoundReport theorem3_check(const Embedding& f, const AugmentedSpace& space, const CheckConfig& cfg) {
  require_normalized(f, "theorem3_check");
  if (cfg.M < 1) throw std::invalid_argument("theorem3_check: M must be >= 1");
  const double M = static_cast<double>(cfg.M);
  const double K = static_cast<double>(space.num_classes);
  BoundReport r;
  r.theorem = "t3";
  const MeanHead mh = mean_head(f, space);
  const double ce = ce_risk(f, mh, space);
  const Estimate inf = infonce_population(f, space, cfg.M, cfg.mc);
  const VarianceTerms vt = variance_terms(f, space);
  const LseError lse = lse_approx_error(f, space, cfg.M, cfg.mc);
  const EpsAlignment eps = alignment_eps(f, space);
  const double gap = ce - inf.value;
  r.set("M", M);
  r.set("K", K);
  r.set("ce_mean", ce);
  r.set("infonce", inf.value);
  r.set("gap", gap);
  r.set("V_neg", vt.V_neg);
  r.set("mass_pos", vt.mass_pos);
  r.set("mass_neg", vt.mass_neg);
  r.set("first_moment_pos", vt.first_moment_pos);
  r.set("first_moment_neg", vt.first_moment_neg);
  const Envelope env = add_envelope_terms(r, lse, inf);
  r.set("log_M_over_K", std::log(M / K));
  r.set("log_M1_over_K", std::log((M + 1.0) / K));
  if (eps.has_false_positives) {
    const double es = eps.eps_min, eq = eps.eps_max;
    r.set("eps_q_star", es);
    r.set("eps_q", eq);
    r.sides.push_back({"upper", BoundSide::Kind::bound, true, gap, es + eq + env.total() - std::log(M / K), 1e-10,
                       env.margin});
    r.sides.push_back({"lower", BoundSide::Kind::bound, false, gap,
                       -es - eq - 0.5 * vt.V_neg - env.total() - std::log((M + 1.0) / K), 1e-10, env.margin});
    r.sides.push_back({"premise_pos", BoundSide::Kind::premise, true, vt.first_moment_pos, es, 1e-10, 0.0});
    r.sides.push_back({"premise_neg", BoundSide::Kind::premise, true, vt.first_moment_neg, eq, 1e-10, 0.0});
  } else {
    // No false positives: the q = q* form, with eps_{q*} bounding X+ distances.
    const double es = eps.pos_max;
    r.set("eps_q_star", es);
    r.sides.push_back({"upper", BoundSide::Kind::bound, true, gap, es + env.total() - std::log(M / K), 1e-10,
                       env.margin});
    r.sides.push_back({"lower", BoundSide::Kind::bound, false, gap,
                       -es - vt.V_neg - env.total() - std::log((M + 1.0) / K), 1e-10, env.margin});
    r.sides.push_back({"premise_pos", BoundSide::Kind::premise, true, vt.first_moment_pos, es, 1e-10, 0.0});
    r.notes.push_back("no false positives: q = q* form, eps_q dropped, eps_q_star = max X+ distance");
  }
  r.notes.push_back("V_neg: equal-weight mixture of z = f(x+) over X+ and z = f(x) over the marginal");
  finalize(r);
  return r;
}

Theorem4Result theorem4_check(const AugmentedSpace& space, std::size_t k, const Theorem4Config& cfg) {
  Theorem4Result out;
  BoundReport& r = out.report;
  r.theorem = "t4";
  r.vacuous_at = 1.0;
  const AugmentationGraph g = build_graph(space);
  const std::size_t n = g.n();
  out.n = n;
  if (k < 1 || k > n) {
    throw std::invalid_argument("theorem4_check: k = " + std::to_string(k) + " outside [1, n = " +
                                std::to_string(n) + "]");
  }
  const Spectrum spec = laplacian_spectrum(g);
  out.alpha = labeling_error(space).alpha;
  out.lambda_k = spec.lambda(k);
  r.set("k", static_cast<double>(k));
  r.set("n", static_cast<double>(n));
  r.set("alpha", out.alpha);
  r.set("lambda_k", *out.lambda_k);
  if (k < n) {
    out.lambda_k1 = spec.lambda(k + 1);
    r.set("lambda_k1", *out.lambda_k1);
  }

  const Embedding fs = spectral_embedding(g, spec, k);
  const LinearHead head = fit_linear_head(fs, space, cfg.probe);
  out.error = classification_error(fs, head, space, cfg.measure);
  r.set("error", out.error);
  r.set("w_norm", head.frobenius_norm());
  if (*out.lambda_k < 1.0) {
    const double budget = 1.0 / (1.0 - *out.lambda_k);
    r.set("norm_budget", budget);
    r.set("norm_within_budget", head.frobenius_norm() <= budget ? 1.0 : 0.0);
  }
  r.notes.push_back(cfg.measure == ErrorMeasure::latent ? "error measure: latent labels of originals"
                                                        : "error measure: node labels");

  if (!out.lambda_k1) {
    r.undefined = true;
    r.notes.push_back("k = n: lambda_{k+1} does not exist");
    finalize(r);
    return out;
  }
  if (*out.lambda_k1 <= 1e-12) {
    r.undefined = true;
    r.notes.push_back("lambda_{k+1} = 0: graph disconnected at level k");
    finalize(r);
    return out;
  }
  const double bound = 4.0 * out.alpha / *out.lambda_k1 + 8.0 * out.alpha;
  out.bound = bound;
  r.set("bound", bound);
  r.sides.push_back({"fitted", BoundSide::Kind::witness, true, out.error, bound, 1e-10, 0.0});
  if (bound < 1.0 && out.error > bound + 1e-10) {
    if (k <= cfg.search_k_max && n <= cfg.search_n_max) {
      const std::size_t K = space.num_classes;
      double best = out.error;
      LinearHead cand;
      for (std::size_t i = 0; i < cfg.search_candidates && best > 0.0; ++i) {
        cand.W = gaussian_matrix(k, K, derive_seed(cfg.seed, "t4search/" + std::to_string(i)));
        best = std::min(best, classification_error(fs, cand, space, cfg.measure));
      }
      r.set("search_error", best);
      r.set("search_candidates", static_cast<double>(cfg.search_candidates));
      r.sides.push_back({"search", BoundSide::Kind::witness, true, best, bound, 1e-10, 0.0});
    } else {
      r.notes.push_back("fitted probe exceeds the bound; head search not applicable at this size");
    }
  }
  finalize(r);
  return out;
}

Theorem4Result theorem4_check(const World& world_q, const std::vector<Transform>& transforms, std::size_t k,
                              const Theorem4Config& cfg) {
  return theorem4_check(build_augmented_space(world_q, transforms), k, cfg);
}

std::vector<BoundReport> corollary_reports(const Embedding& f, const LinearHead& head,
                                           const AugmentedSpace& space, const CheckConfig& cfg) {
  require_normalized(f, "corollary_reports");
  const double M = static_cast<double>(cfg.M);
  const double K = static_cast<double>(space.num_classes);
  const double ce_mean = ce_risk(f, mean_head(f, space), space);
  const double ce_lin = ce_risk(f, head, space);
  const Estimate inf = infonce_population(f, space, cfg.M, cfg.mc);
  const VarianceTerms vt = variance_terms(f, space);
  const LseError lse = lse_approx_error(f, space, cfg.M, cfg.mc);
  const EpsAlignment eps = alignment_eps(f, space);

  auto base = [&](const std::string& id) {
    BoundReport r;
    r.theorem = id;
    r.set("M", M);
    r.set("K", K);
    r.set("ce_linear", ce_lin);
    r.set("ce_mean", ce_mean);
    r.set("infonce", inf.value);
    r.set("log_M_over_K", std::log(M / K));
    r.sides.push_back({"lemma5", BoundSide::Kind::gate, true, ce_lin, ce_mean + 1e-3, 0.0, 0.0});
    return r;
  };
  std::vector<BoundReport> out;

  BoundReport c1 = base("corollary_t1");
  const Envelope e1 = add_envelope_terms(c1, lse, inf);
  const double sv = std::sqrt(vt.V) + (vt.V_minus ? std::sqrt(*vt.V_minus) : 0.0);
  c1.set("V", vt.V);
  if (vt.V_minus) c1.set("V_minus", *vt.V_minus);
  c1.sides.push_back({"upper", BoundSide::Kind::bound, true, ce_lin,
                      inf.value + sv + e1.total() - std::log(M / K), 1e-10, e1.margin});
  out.push_back(std::move(c1));

  BoundReport c3 = base("corollary_t3");
  const Envelope e3 = add_envelope_terms(c3, lse, inf);
  double eps_sum;
  if (eps.has_false_positives) {
    eps_sum = eps.eps_min + eps.eps_max;
    c3.set("eps_q_star", eps.eps_min);
    c3.set("eps_q", eps.eps_max);
    c3.sides.push_back({"premise_pos", BoundSide::Kind::premise, true, vt.first_moment_pos, eps.eps_min, 1e-10, 0.0});
    c3.sides.push_back({"premise_neg", BoundSide::Kind::premise, true, vt.first_moment_neg, eps.eps_max, 1e-10, 0.0});
  } else {
    eps_sum = eps.pos_max;
    c3.set("eps_q_star", eps.pos_max);
    c3.sides.push_back({"premise_pos", BoundSide::Kind::premise, true, vt.first_moment_pos, eps.pos_max, 1e-10, 0.0});
    c3.notes.push_back("no false positives: q = q* form");
  }
  c3.sides.push_back({"upper", BoundSide::Kind::bound, true, ce_lin,
                      inf.value + eps_sum + e3.total() - std::log(M / K), 1e-10, e3.margin});
  out.push_back(std::move(c3));

  for (auto& r : out) {
    if (ce_lin > ce_mean + 1e-3) r.notes.push_back("optimization-inadequate: linear head risk exceeds mean head risk");
    finalize(r);
  }
  return out;
}

namespace {

nlohmann::ordered_json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

const char* kind_name(BoundSide::Kind k) {
  switch (k) {
    case BoundSide::Kind::bound: return "bound";
    case BoundSide::Kind::premise: return "premise";
    case BoundSide::Kind::gate: return "gate";
    case BoundSide::Kind::witness: return "witness";
  }
  return "bound";
}

nlohmann::ordered_json to_json(const BoundReport& r) {
  nlohmann::ordered_json j;
  j["theorem"] = r.theorem;
  j["verdict"] = to_string(r.verdict);
  j["slack"] = number(r.slack);
  j["undefined"] = r.undefined;
  if (r.vacuous_at) j["vacuous_at"] = *r.vacuous_at;
  nlohmann::ordered_json terms = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.terms) terms[k] = number(v);
  j["terms"] = terms;
  nlohmann::ordered_json sides = nlohmann::ordered_json::array();
  for (const auto& s : r.sides) {
    nlohmann::ordered_json sj;
    sj["name"] = s.name;
    sj["kind"] = kind_name(s.kind);
    sj["relation"] = s.upper ? "<=" : ">=";
    sj["lhs"] = number(s.lhs);
    sj["rhs"] = number(s.rhs);
    sj["tolerance"] = s.tolerance;
    sj["mc_margin"] = s.mc_margin;
    sj["slack"] = number(s.slack());
    sides.push_back(sj);
  }
  j["sides"] = sides;
  j["notes"] = r.notes;
  return j;
}

}  // namespace

std::string report_to_json(const BoundReport& r, int indent) { return to_json(r).dump(indent); }

std::string reports_to_json(const std::vector<BoundReport>& rs, int indent) {
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (const auto& r : rs) a.push_back(to_json(r));
  return a.dump(indent);
}

}  // namespace ctlab
