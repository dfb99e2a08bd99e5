#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ctlab/embedding.hpp"
#include "ctlab/objectives.hpp"
#include "ctlab/world.hpp"

namespace ctlab {

struct VarianceTerms {
  double V = 0.0;                       // E_{X+} ||f(x) - mu_{y_x}||^2, conditional on X+
  std::optional<double> V_minus;        // E_{X-} ||f(x+) - mu_{y_x}||^2, conditional on X-
  double V_neg = 0.0;                   // equal-weight two-branch mixture
  double mass_pos = 0.0;
  double mass_neg = 0.0;
  // Unconditional first moments used by the alignment premise:
  // E[1_{X+} ||f(x) - mu_{y_x}||] and E[1_{X-} ||f(x+) - mu_{y_x}||].
  double first_moment_pos = 0.0;
  double first_moment_neg = 0.0;
};

VarianceTerms variance_terms(const Embedding& f, const AugmentedSpace& space);

struct LseError {
  double mean_abs_error = 0.0;
  double std = 0.0;
  bool exact = false;
};

// LSE(x) = log E_{z~p} exp(f(x).f(z)); LSE_M(x) = log (1/M) sum_i exp(f(x).f(z_i)).
// Exact enumeration of E_x E_z |LSE_M - LSE| under the thresholds in cfg,
// replicated Monte Carlo otherwise (std is the spread of replicate means).
LseError lse_approx_error(const Embedding& f, const AugmentedSpace& space, std::size_t M,
                          const McConfig& cfg);

struct EpsAlignment {
  bool has_false_positives = false;
  double eps_min = 0.0;
  double eps_max = 0.0;
  std::pair<std::size_t, std::size_t> argmin{0, 0};
  std::pair<std::size_t, std::size_t> argmax{0, 0};
  double pos_max = 0.0;  // max over X+ of ||f(x) - f(x+)||
  std::pair<std::size_t, std::size_t> pos_argmax{0, 0};
};

EpsAlignment alignment_eps(const Embedding& f, const AugmentedSpace& space);

enum class Verdict {
  holds,
  holds_vacuously,
  violated_within_mc_error,
  violated,
  inconclusive,
  undefined,
};

std::string to_string(Verdict v);
Verdict parse_verdict(const std::string& s);

// One inequality. Upper sides read lhs <= rhs, lower sides lhs >= rhs.
struct BoundSide {
  enum class Kind {
    bound,    // the inequality under test
    premise,  // an assumption; when it fails, bound violations are inconclusive
    gate,     // an adequacy check; when it fails the verdict is withheld
    witness,  // existential: the report holds if any witness holds
  };
  std::string name;
  Kind kind = Kind::bound;
  bool upper = true;
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 1e-10;
  double mc_margin = 0.0;  // already included in rhs

  double slack() const { return upper ? rhs - lhs : lhs - rhs; }
};

struct BoundReport {
  std::string theorem;
  std::vector<std::pair<std::string, double>> terms;
  std::vector<BoundSide> sides;
  std::vector<std::string> notes;
  // Set when the bound is not defined (e.g. lambda_{k+1} = 0).
  bool undefined = false;
  // Reports whose "bound" term at or above this value hold vacuously.
  std::optional<double> vacuous_at;
  Verdict verdict = Verdict::inconclusive;
  double slack = 0.0;

  std::optional<double> term(const std::string& name) const;
  void set(const std::string& name, double v);
};

// Recomputes the verdict and slack from sides, terms and flags.
Verdict derive_verdict(const BoundReport& r);
double derive_slack(const BoundReport& r);
void finalize(BoundReport& r);

// Worst of a set of verdicts, for summaries.
Verdict worst(const std::vector<Verdict>& vs);
bool is_violation(Verdict v);

struct CheckConfig {
  std::size_t M = 1;
  McConfig mc;
};

BoundReport theorem1_check(const Embedding& f, const AugmentedSpace& space, const CheckConfig& cfg);
BoundReport theorem3_check(const Embedding& f, const AugmentedSpace& space, const CheckConfig& cfg);

struct Theorem4Config {
  ProbeConfig probe;
  ErrorMeasure measure = ErrorMeasure::latent;
  std::size_t search_k_max = 3;
  std::size_t search_n_max = 12;
  std::size_t search_candidates = 20000;
  std::uint64_t seed = 0;
};

struct Theorem4Result {
  BoundReport report;
  double alpha = 0.0;
  std::optional<double> lambda_k;
  std::optional<double> lambda_k1;
  std::optional<double> bound;
  double error = 0.0;  // fitted probe on the spectral embedding
  std::size_t n = 0;
};

Theorem4Result theorem4_check(const World& world_q, const std::vector<Transform>& transforms,
                              std::size_t k, const Theorem4Config& cfg);
Theorem4Result theorem4_check(const AugmentedSpace& space, std::size_t k, const Theorem4Config& cfg);

// Corollary-style re-rendering of the Theorem 1 and 3 upper sides with the
// fitted linear head's risk in place of the mean head's.
std::vector<BoundReport> corollary_reports(const Embedding& f, const LinearHead& head,
                                           const AugmentedSpace& space, const CheckConfig& cfg);

// Stable-key JSON text.
std::string report_to_json(const BoundReport& r, int indent = 2);
std::string reports_to_json(const std::vector<BoundReport>& rs, int indent = 2);

}  // namespace ctlab
