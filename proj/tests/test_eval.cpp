#include <gtest/gtest.h>

#include <sstream>

#include "scout/app/experiment.hpp"
#include "scout/app/run_dir.hpp"
#include "scout/eval/sim_grader.hpp"
#include "support.hpp"

using namespace scout;
using namespace scout::eval;
using scout::testing::scratch;
using scout::testing::u200;

namespace {

// Frozen from tests/oracles/ucb_oracle.py.
constexpr double kF1HighPair = 0.79677660236465463597;  // f1(0.877, 0.730)
constexpr double kF1LowPair = 0.5615865546218487395;    // f1(0.736, 0.454)

// Final recall of the scripted fixture experiment, recomputed by
// tests/oracles/sim_oracle.py from each run's assets.jsonl.
constexpr double kRecallTree = 0.60;
constexpr double kRecallFlat = 0.36;
constexpr double kRecallTreeEnglish = 0.38;

RecallVerdict hit(const std::string& id, const std::string& name) { return {id, 1, name, {}}; }
RecallVerdict miss(const std::string& id) { return {id, 0, std::nullopt, {}}; }

const std::string kQuery =
    "modality in {small molecule, monoclonal antibody, antibody-drug conjugate, bispecific "
    "antibody} AND stage in {phase 1, phase 2, phase 3}";

class ThrowingGrader : public Grader {
 public:
  RecallVerdict grade_recall(const BenchmarkExample& ex, std::span<const std::string>) override {
    if (ex.id == "bad") throw ScoutError("grader timeout");
    return {ex.id, 0, std::nullopt, {}};
  }
  PrecisionVerdict grade_precision(const std::string& q, const std::string&,
                                   const std::string& p) override {
    if (p == "boom") throw ScoutError("grader timeout");
    return {q, p, true, {{"x", true}}, "d0"};
  }
};

}  // namespace

TEST(Metrics, RecallIsMeanOfVerdicts) {
  std::vector<RecallVerdict> v{hit("a", "x"), miss("b"), hit("c", "y"), miss("d")};
  EXPECT_DOUBLE_EQ(recall_score(v), 0.5);
  EXPECT_THROW(recall_score(std::vector<RecallVerdict>{}), EmptyBenchmark);
  std::vector<RecallVerdict> broken{{"a", 1, std::nullopt, {}}};
  EXPECT_THROW(recall_score(broken), InvariantViolation);
}

TEST(Metrics, PrecisionOverPairs) {
  std::set<PredictedPair> all{{"q1", "a"}, {"q1", "b"}, {"q2", "a"}, {"q2", "c"}};
  std::set<PredictedPair> good{{"q1", "a"}, {"q2", "a"}, {"q2", "c"}};
  EXPECT_DOUBLE_EQ(*precision_score(all, good), 0.75);
  EXPECT_FALSE(precision_score({}, {}).has_value());
  EXPECT_THROW(precision_score(all, {{"q3", "z"}}), SubsetViolation);
}

TEST(Metrics, F1Examples) {
  EXPECT_NEAR(f1(0.877, 0.730), kF1HighPair, 1e-12);
  EXPECT_NEAR(f1(0.736, 0.454), kF1LowPair, 1e-12);
  EXPECT_DOUBLE_EQ(f1(0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(f1(1.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(f1(1.0, 1.0), 1.0);
  EXPECT_THROW(f1(1.2, 0.5), InvariantViolation);
}

// Published (recall, precision, F1) rows must agree with the formula to the
// three reported digits.
TEST(Metrics, F1AgreesWithReportedRows) {
  const double rows[][3] = {{0.730, 0.877, 0.797}, {0.454, 0.736, 0.562}, {0.500, 0.512, 0.506},
                            {0.372, 0.713, 0.489}, {0.364, 0.648, 0.466}, {0.409, 0.481, 0.442},
                            {0.182, 0.683, 0.287}, {0.182, 0.515, 0.269}};
  for (const auto& r : rows) EXPECT_NEAR(f1(r[1], r[0]), r[2], 0.0005) << r[0] << " " << r[1];
}

TEST(MetricsProperty, F1SymmetricBoundedMonotone) {
  SeededRng rng(3);
  for (int i = 0; i < 5000; ++i) {
    const double p = rng.uniform();
    const double r = rng.uniform();
    const double d = rng.uniform() * (1.0 - p);
    const double v = f1(p, r);
    ASSERT_DOUBLE_EQ(v, f1(r, p));
    ASSERT_LE(v, std::max(p, r) + 1e-12);
    ASSERT_GE(v, std::min(p, r) - 1e-12);
    ASSERT_GE(f1(p + d, r), v - 1e-12);
  }
}

TEST(Grading, AliasCountsAsRecallHit) {
  const auto u = u200();
  OracleGrader grader(u);
  const auto examples = sim_examples(*u, "q0", kQuery);
  ASSERT_EQ(examples.size(), 100u);
  const auto* e = u->resolve(examples.front().expected_asset);
  ASSERT_GE(e->aliases.size(), 2u);
  const std::string alias = e->aliases.back().text;
  const auto v = grader.grade_recall(examples.front(), std::vector<std::string>{"nothing", alias});
  EXPECT_EQ(v.verdict, 1);
  EXPECT_EQ(v.matched_predicted_name, alias);
  ASSERT_EQ(v.alias_evidence.size(), 1u);
  EXPECT_EQ(v.alias_evidence[0].url, "https://registry.sim/" + e->id);
}

TEST(Grading, LookalikeFlaggedOnFailingDimension) {
  const auto u = u200();
  OracleGrader grader(u);
  const auto pred = sim::parse_predicate(kQuery);
  const sim::Entity* wrong = nullptr;
  for (const auto& e : u->entities()) {
    if (e.lookalike && !pred.eval(e.lookup()) && pred.conjuncts()[0].eval(e.lookup())) {
      wrong = &e;
      break;
    }
  }
  ASSERT_NE(wrong, nullptr);
  const auto v = grader.grade_precision("q0", kQuery, wrong->canonical());
  EXPECT_FALSE(v.is_match);
  EXPECT_EQ(v.logic, "d0 AND d1");
  ASSERT_EQ(v.dimensions.size(), 2u);
  EXPECT_TRUE(v.dimensions[0].pass);
  EXPECT_FALSE(v.dimensions[1].pass);
  const auto unknown = grader.grade_precision("q0", kQuery, "made-up-mab");
  EXPECT_FALSE(unknown.is_match);
  EXPECT_EQ(unknown.dimensions.size(), 1u);
}

TEST(Grading, GraderFailuresAreExcludedNotScored) {
  ThrowingGrader grader;
  std::vector<BenchmarkExample> ex{{"ok", "q", "query", "a"}, {"bad", "q", "query", "b"}};
  const auto report = evaluate_run(ex, {{"q", {"a", "boom", "A "}}}, grader);
  EXPECT_EQ(report.recall_verdicts.size(), 1u);
  EXPECT_EQ(report.precision_verdicts.size(), 1u);
  EXPECT_EQ(report.excluded.size(), 2u);
  EXPECT_DOUBLE_EQ(*report.precision, 1.0);
  EXPECT_DOUBLE_EQ(*report.recall, 0.0);
}

TEST(Grading, EmptyPredictionsHaveNoPrecision) {
  const auto u = u200();
  const auto report = app::sim_metrics(u, kQuery, {});
  EXPECT_FALSE(report.precision);
  EXPECT_DOUBLE_EQ(*report.recall, 0.0);
  EXPECT_DOUBLE_EQ(*report.f1, 0.0);
  std::ostringstream tsv;
  const QualityPoint pt = quality_point(report, 1, 2.0);
  write_quality_tsv(tsv, std::vector<QualityPoint>{pt});
  EXPECT_EQ(tsv.str(),
            "epoch\ttime\tpredicted\tcorrect\tprecision\trecall\tf1\n"
            "1\t2.000\t0\t0\tNA\t0.000000\t0.000000\n");
}

TEST(Grading, DuplicateAliasesScoredOnce) {
  const auto u = u200();
  const auto examples = sim_examples(*u, "q0", kQuery);
  const auto* e = u->resolve(examples[0].expected_asset);
  const auto report = app::sim_metrics(u, kQuery, {e->canonical(), ascii_lower(e->canonical())});
  EXPECT_EQ(report.precision_verdicts.size(), 1u);
  EXPECT_NEAR(*report.recall, 0.01, 1e-12);
}

class Ablation : public ::testing::TestWithParam<std::pair<std::string, double>> {};

TEST_P(Ablation, FinalRecallMatchesOracle) {
  const auto [name, expected] = GetParam();
  const auto exp = app::load_experiment(scout::testing::fixture("u200.experiment.json"));
  const auto cfg = app::ablation_config(exp, name);
  const auto dir = scratch("ablation-" + name);
  const auto out = app::execute_run(cfg, dir, u200());
  ASSERT_TRUE(out.metrics);
  EXPECT_NEAR(*out.metrics->recall, expected, 1e-12);
  EXPECT_DOUBLE_EQ(*out.metrics->precision, 1.0);
  ASSERT_EQ(out.quality.size(), 10u);
  for (std::size_t i = 1; i < out.quality.size(); ++i) {
    EXPECT_GE(*out.quality[i].recall, *out.quality[i - 1].recall);
    EXPECT_GT(out.quality[i].time, out.quality[i - 1].time);
  }
}

INSTANTIATE_TEST_SUITE_P(Fixture, Ablation,
                         ::testing::Values(std::make_pair(std::string("none"), kRecallTree),
                                           std::make_pair(std::string("flat"), kRecallFlat),
                                           std::make_pair(std::string("lang-free"),
                                                          kRecallTreeEnglish)),
                         [](const auto& info) {
                           std::string n = info.param.first;
                           std::erase(n, '-');
                           return n;
                         });

TEST(Ablation, TreeRecallCurveIsFrozen) {
  const auto exp = app::load_experiment(scout::testing::fixture("u200.experiment.json"));
  const auto out = app::execute_run(app::ablation_config(exp, "none"), scratch("curve"), u200());
  const double expected[] = {0.09, 0.17, 0.25, 0.34, 0.39, 0.43, 0.48, 0.53, 0.56, 0.60};
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_NEAR(*out.quality[i].recall, expected[i], 1e-12) << "epoch " << i + 1;
    EXPECT_DOUBLE_EQ(out.quality[i].time, 2.0 * static_cast<double>(i + 1));
  }
}
