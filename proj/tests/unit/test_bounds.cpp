#include <cmath>

#include <gtest/gtest.h>
#include <json.hpp>

#include "ctlab/bounds.hpp"
#include "ctlab/graph.hpp"

using namespace ctlab;

namespace {

AugmentedSpace toy_space() { return build_augmented_space(toy_world(), toy_transforms()); }

Embedding unit_rows(const Matrix& m) {
  Embedding f;
  f.k = m.cols();
  f.table = m;
  for (std::size_t i = 0; i < m.rows(); ++i) f.node_ids.push_back("n" + std::to_string(i));
  f.normalized = true;
  normalize_rows(f);
  return f;
}

Embedding constant_unit(std::size_t n, std::size_t k) {
  Matrix m(n, k);
  for (std::size_t i = 0; i < n; ++i) m(i, 0) = 1.0;
  return unit_rows(m);
}

WorldSpec planted_spec(std::uint64_t seed) {
  WorldSpec s;
  s.per_class = 3;
  s.m = 18;
  s.mp = 12;
  s.seed = seed;
  return s;
}

double sq_dist(const double* a, const double* b, std::size_t k) {
  double s = 0.0;
  for (std::size_t j = 0; j < k; ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return s;
}

}  // namespace

TEST(VarianceTerms, ConstantEmbeddingIsZero) {
  const VarianceTerms v = variance_terms(constant_unit(3, 2), toy_space());
  EXPECT_EQ(v.V, 0.0);
  ASSERT_TRUE(v.V_minus.has_value());
  EXPECT_EQ(*v.V_minus, 0.0);
  EXPECT_EQ(v.V_neg, 0.0);
}

TEST(VarianceTerms, LabelConsistentWorldHasNoVMinus) {
  const World w = generate_world(planted_spec(1));
  const AugmentedSpace s = build_augmented_space(w, identity_transforms());
  Matrix m = gaussian_matrix(s.n(), 3, 2);
  const VarianceTerms v = variance_terms(unit_rows(m), s);
  EXPECT_FALSE(v.V_minus.has_value());
  EXPECT_EQ(v.mass_neg, 0.0);
}

TEST(VarianceTerms, ToyMatchesBruteForce) {
  const AugmentedSpace s = toy_space();
  const Embedding f = unit_rows(Matrix{{1, 0}, {0.6, 0.8}, {0, 1}});
  const MeanHead mh = mean_head(f, s);
  double pos = 0, neg = 0, V = 0, Vm = 0, Vp = 0, Vmarg = 0, m1p = 0, m1n = 0;
  for (std::size_t a = 0; a < 3; ++a) {
    const double* mu = mh.mu.row(std::size_t(s.label(a)));
    Vmarg += s.marginal[a] * sq_dist(f.row(a), mu, 2);
    for (std::size_t b = 0; b < 3; ++b) {
      const double j = s.joint(a, b);
      if (s.same_label(a, b)) {
        pos += j;
        V += j * sq_dist(f.row(a), mu, 2);
        Vp += j * sq_dist(f.row(b), mh.mu.row(std::size_t(s.label(b))), 2);
        m1p += j * std::sqrt(sq_dist(f.row(a), mu, 2));
      } else {
        neg += j;
        Vm += j * sq_dist(f.row(b), mu, 2);
        m1n += j * std::sqrt(sq_dist(f.row(b), mu, 2));
      }
    }
  }
  const VarianceTerms v = variance_terms(f, s);
  EXPECT_NEAR(v.mass_pos, pos, 1e-15);
  EXPECT_NEAR(v.mass_neg, neg, 1e-15);
  EXPECT_NEAR(v.V, V / pos, 1e-14);
  EXPECT_NEAR(*v.V_minus, Vm / neg, 1e-14);
  EXPECT_NEAR(v.V_neg, 0.5 * Vp / pos + 0.5 * Vmarg, 1e-14);
  EXPECT_NEAR(v.first_moment_pos, m1p, 1e-14);
  EXPECT_NEAR(v.first_moment_neg, m1n, 1e-14);
}

TEST(LseError, ConstantEmbeddingIsZero) {
  const AugmentedSpace s = toy_space();
  McConfig mc;
  for (std::size_t M : {1u, 2u, 5u}) EXPECT_NEAR(lse_approx_error(constant_unit(3, 2), s, M, mc).mean_abs_error, 0.0, 1e-12);
}

TEST(LseError, TwoPointClosedForm) {
  std::vector<AugNode> nodes(2);
  for (std::size_t i = 0; i < 2; ++i) {
    nodes[i].id = "v" + std::to_string(i);
    nodes[i].payload = Matrix{{double(i)}};
    nodes[i].label = int(i);
  }
  const AugmentedSpace s = make_space(nodes, Matrix::identity(2), {0.5, 0.5}, {0, 1}, 2);
  const Embedding f = unit_rows(Matrix{{1, 0}, {0, 1}});
  // Both anchors: LSE = log((e + 1)/2); LSE_1 is 1 or 0 with probability 1/2.
  const double lse = std::log((std::exp(1.0) + 1.0) / 2.0);
  const double expected = 0.5 * std::abs(1.0 - lse) + 0.5 * std::abs(0.0 - lse);
  McConfig mc;
  const LseError ex = lse_approx_error(f, s, 1, mc);
  EXPECT_TRUE(ex.exact);
  EXPECT_NEAR(ex.mean_abs_error, expected, 1e-14);
  mc.exact_n_max = 0;
  mc.samples = 4000;
  mc.seed = 5;
  const LseError e = lse_approx_error(f, s, 1, mc);
  EXPECT_FALSE(e.exact);
  EXPECT_NEAR(e.mean_abs_error, expected, 3.0 * e.std + 1e-3);
}

TEST(LseError, DoublingMDoesNotGrow) {
  const World w = generate_world(planted_spec(2));
  const AugmentedSpace s = build_augmented_space(w, planted_transforms(w, {}));
  const Embedding f = unit_rows(gaussian_matrix(s.n(), 4, 3));
  McConfig mc;
  mc.samples = 4000;
  mc.seed = 1;
  double prev = lse_approx_error(f, s, 1, mc).mean_abs_error;
  for (std::size_t M : {2u, 4u, 8u}) {
    const LseError e = lse_approx_error(f, s, M, mc);
    EXPECT_LE(e.mean_abs_error, prev + 3.0 * e.std);
    prev = e.mean_abs_error;
  }
}

TEST(AlignmentEps, ConstantAndSinglePair) {
  const AugmentedSpace s = toy_space();
  const EpsAlignment c = alignment_eps(constant_unit(3, 2), s);
  EXPECT_TRUE(c.has_false_positives);
  EXPECT_EQ(c.eps_min, 0.0);
  EXPECT_EQ(c.eps_max, 0.0);
  // The only cross-label pairs are (a, b) and (b, a).
  const Embedding f = unit_rows(Matrix{{1, 0}, {0, 1}, {0.6, 0.8}});
  const EpsAlignment e = alignment_eps(f, s);
  EXPECT_NEAR(e.eps_min, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(e.eps_max, std::sqrt(2.0), 1e-15);
}

TEST(AlignmentEps, MatchesExhaustiveScan) {
  const World w = generate_world(planted_spec(3));
  const AugmentedSpace s = build_augmented_space(w, planted_transforms(w, {}));
  const Embedding f = unit_rows(gaussian_matrix(s.n(), 3, 4));
  double lo = 1e9, hi = -1;
  for (std::size_t a = 0; a < s.n(); ++a)
    for (std::size_t b = 0; b < s.n(); ++b)
      if (s.joint(a, b) > 0 && !s.same_label(a, b)) {
        const double d = std::sqrt(sq_dist(f.row(a), f.row(b), 3));
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
  const EpsAlignment e = alignment_eps(f, s);
  ASSERT_TRUE(e.has_false_positives);
  EXPECT_NEAR(e.eps_min, lo, 1e-15);
  EXPECT_NEAR(e.eps_max, hi, 1e-15);
}

TEST(Theorem1, ConstantEmbeddingAnalytic) {
  CheckConfig cfg;
  const BoundReport r = theorem1_check(constant_unit(3, 2), toy_space(), cfg);
  EXPECT_NEAR(*r.term("gap"), 0.0, 1e-15);
  EXPECT_EQ(*r.term("V"), 0.0);
  EXPECT_EQ(r.verdict, Verdict::holds);
  ASSERT_EQ(r.sides.size(), 2u);
  EXPECT_NEAR(r.sides[0].rhs, std::log(2.0), 1e-12);
  EXPECT_NEAR(r.sides[1].rhs, 0.0, 1e-12);
  EXPECT_NEAR(r.slack, 0.0, 1e-12);
}

TEST(Theorem1, LabelConsistentWorldOmitsVMinus) {
  const World w = generate_world(planted_spec(1));
  const AugmentedSpace s = build_augmented_space(w, identity_transforms());
  const BoundReport r = theorem1_check(unit_rows(gaussian_matrix(s.n(), 3, 6)), s, CheckConfig{});
  EXPECT_FALSE(r.term("V_minus").has_value());
  EXPECT_EQ(r.verdict, Verdict::holds);
}

TEST(Theorem1, RandomEmbeddingsOnToyHold) {
  const AugmentedSpace s = toy_space();
  for (std::uint64_t t = 0; t < 50; ++t) {
    const BoundReport r = theorem1_check(unit_rows(gaussian_matrix(3, 3, 50 + t)), s, CheckConfig{});
    EXPECT_EQ(r.verdict, Verdict::holds) << "seed " << 50 + t;
  }
}

TEST(Theorem1, RequiresNormalizedEmbedding) {
  Embedding f = constant_unit(3, 2);
  f.normalized = false;
  EXPECT_THROW(theorem1_check(f, toy_space(), CheckConfig{}), std::invalid_argument);
}

TEST(Theorem3, ConstantEmbedding) {
  const BoundReport r = theorem3_check(constant_unit(3, 2), toy_space(), CheckConfig{});
  EXPECT_EQ(*r.term("eps_q_star"), 0.0);
  EXPECT_EQ(*r.term("eps_q"), 0.0);
  EXPECT_EQ(r.verdict, Verdict::holds);
}

TEST(Theorem3, NoFalsePositivesUsesQStarForm) {
  const World w = generate_world(planted_spec(1));
  const AugmentedSpace s = build_augmented_space(w, identity_transforms());
  const BoundReport r = theorem3_check(unit_rows(gaussian_matrix(s.n(), 3, 6)), s, CheckConfig{});
  EXPECT_FALSE(r.term("eps_q").has_value());
  EXPECT_TRUE(r.term("eps_q_star").has_value());
  EXPECT_NE(r.verdict, Verdict::violated);
}

TEST(Theorem3, TrainedOnPreprocessedWorld) {
  WorldSpec ws = planted_spec(5);
  const World w = preprocess_world(generate_world(ws), TruncationSpec::keep_top(4));
  const AugmentedSpace s = build_augmented_space(w, planted_transforms(w, {}));
  TrainConfig tc;
  tc.loss = LossKind::infonce;
  tc.k = 4;
  tc.steps = 100;
  tc.seed = 2;
  const TrainResult tr = train_free_embeddings(s, tc);
  const BoundReport r = theorem3_check(tr.f, s, CheckConfig{});
  EXPECT_TRUE(r.term("eps_q_star").has_value());
  EXPECT_TRUE(r.term("gap").has_value());
  EXPECT_FALSE(is_violation(r.verdict)) << to_string(r.verdict);
}

TEST(Theorem4, ToyIsVacuous) {
  Theorem4Config cfg;
  const Theorem4Result r = theorem4_check(toy_world(), toy_transforms(), 2, cfg);
  EXPECT_NEAR(r.alpha, 0.25, 1e-15);
  ASSERT_TRUE(r.bound.has_value());
  EXPECT_NEAR(*r.bound, 3.0, 1e-10);
  EXPECT_NEAR(*r.lambda_k1, 1.0, 1e-10);
  EXPECT_EQ(r.report.verdict, Verdict::holds_vacuously);
}

TEST(Theorem4, ZeroAlphaGivesZeroError) {
  const World w = preprocess_world(generate_world(planted_spec(1)), TruncationSpec::keep_top(3));
  Theorem4Config cfg;
  const Theorem4Result r = theorem4_check(w, planted_transforms(w, {}), 3, cfg);
  EXPECT_EQ(r.alpha, 0.0);
  EXPECT_NEAR(*r.bound, 0.0, 1e-12);
  EXPECT_EQ(r.error, 0.0);
  EXPECT_EQ(r.report.verdict, Verdict::holds);
}

TEST(Theorem4, KEqualsNIsUndefined) {
  const Theorem4Result r = theorem4_check(toy_world(), toy_transforms(), 3, Theorem4Config{});
  EXPECT_FALSE(r.bound.has_value());
  EXPECT_EQ(r.report.verdict, Verdict::undefined);
}

TEST(Corollary, ConstantEmbeddingEquality) {
  const AugmentedSpace s = toy_space();
  const Embedding f = constant_unit(3, 2);
  LinearHead h;
  h.W = Matrix(2, 2);
  const auto rs = corollary_reports(f, h, s, CheckConfig{});
  ASSERT_EQ(rs.size(), 2u);
  for (const auto& r : rs) {
    EXPECT_NEAR(*r.term("ce_linear"), std::log(2.0), 1e-15);
    EXPECT_NEAR(*r.term("ce_mean"), std::log(2.0), 1e-15);
    EXPECT_EQ(r.verdict, Verdict::holds);
  }
}

TEST(Corollary, ZeroHeadWithholdsVerdict) {
  const AugmentedSpace s = toy_space();
  const Embedding f = unit_rows(Matrix{{1, 0}, {0, 1}, {0, 1}});
  LinearHead h;
  h.W = Matrix(2, 2);
  for (const auto& r : corollary_reports(f, h, s, CheckConfig{})) {
    EXPECT_EQ(r.verdict, Verdict::inconclusive);
    bool flagged = false;
    for (const auto& n : r.notes) flagged |= n.find("optimization-inadequate") != std::string::npos;
    EXPECT_TRUE(flagged);
  }
}

TEST(Verdicts, DerivationRules) {
  BoundReport r;
  r.sides.push_back({"upper", BoundSide::Kind::bound, true, 1.0, 2.0, 1e-10, 0.0});
  finalize(r);
  EXPECT_EQ(r.verdict, Verdict::holds);
  EXPECT_NEAR(r.slack, 1.0, 1e-15);

  r.sides[0] = {"upper", BoundSide::Kind::bound, true, 2.05, 2.0, 1e-10, 0.1};
  EXPECT_EQ(derive_verdict(r), Verdict::violated_within_mc_error);
  r.sides[0].mc_margin = 0.0;
  EXPECT_EQ(derive_verdict(r), Verdict::violated);

  r.sides.push_back({"premise", BoundSide::Kind::premise, true, 2.0, 1.0, 1e-10, 0.0});
  EXPECT_EQ(derive_verdict(r), Verdict::inconclusive);

  BoundReport v;
  v.set("bound", 1.5);
  v.vacuous_at = 1.0;
  v.sides.push_back({"witness", BoundSide::Kind::witness, true, 0.9, 1.5, 1e-10, 0.0});
  EXPECT_EQ(derive_verdict(v), Verdict::holds_vacuously);
  v.undefined = true;
  EXPECT_EQ(derive_verdict(v), Verdict::undefined);

  EXPECT_EQ(worst({Verdict::holds, Verdict::inconclusive, Verdict::violated_within_mc_error}),
            Verdict::violated_within_mc_error);
  for (Verdict x : {Verdict::holds, Verdict::holds_vacuously, Verdict::violated_within_mc_error, Verdict::violated,
                    Verdict::inconclusive, Verdict::undefined})
    EXPECT_EQ(parse_verdict(to_string(x)), x);
}

TEST(ReportJson, StableKeysAndNulls) {
  BoundReport r;
  r.theorem = "t4";
  r.set("b", 2.0);
  r.set("a", std::nan(""));
  finalize(r);
  const auto j = nlohmann::ordered_json::parse(report_to_json(r));
  EXPECT_EQ(j["theorem"], "t4");
  EXPECT_TRUE(j["terms"]["a"].is_null());
  EXPECT_EQ(j["terms"].begin().key(), "b");
  EXPECT_EQ(report_to_json(r), report_to_json(r));
}
