#include <gtest/gtest.h>

#include "scout/app/experiment.hpp"
#include "scout/app/run_dir.hpp"
#include "support.hpp"

using namespace scout;
using namespace scout::app;
using scout::testing::fixture;
using scout::testing::scratch;

namespace {

AppConfig fixture_config(int epochs) {
  AppConfig cfg;
  apply_json(cfg, load_json_file(fixture("u200.config.json")));
  cfg.sim.universe = fixture(cfg.sim.universe).string();
  cfg.run.epochs = epochs;
  return cfg;
}

}  // namespace

TEST(Config, DefaultsThenFile) {
  AppConfig cfg;
  EXPECT_EQ(cfg.run.epochs, 10);
  EXPECT_EQ(cfg.run.k, 3);
  EXPECT_EQ(cfg.run.m, 1);
  EXPECT_DOUBLE_EQ(cfg.run.c, 1.2);
  EXPECT_EQ(cfg.run.languages, (std::vector<Language>{"en", "zh"}));
  apply_json(cfg, Json{{"epochs", 4}, {"dedup", "heavy"}, {"sim", {{"per_call", 9}}}});
  EXPECT_EQ(cfg.run.epochs, 4);
  EXPECT_EQ(cfg.run.k, 3);
  EXPECT_EQ(cfg.run.dedup_mode, DedupMode::kHeavy);
  EXPECT_EQ(cfg.sim.budget.per_call, 9u);
  EXPECT_DOUBLE_EQ(cfg.sim.budget.distractor_rate, 0.2);
}

TEST(Config, UnknownKeysAndBadValuesAreErrors) {
  AppConfig cfg;
  EXPECT_THROW(apply_json(cfg, Json{{"epoch", 3}}), ConfigError);
  EXPECT_THROW(apply_json(cfg, Json{{"sim", {{"budget", 3}}}}), ConfigError);
  EXPECT_THROW(apply_json(cfg, Json{{"chat", {{"api_key", "sk"}}}}), ConfigError);
  EXPECT_THROW(apply_json(cfg, Json{{"epochs", "ten"}}), ConfigError);
  EXPECT_THROW(apply_json(cfg, Json{{"strategy", "random"}}), ConfigError);
  EXPECT_THROW(apply_json(cfg, Json{{"dedup", "medium"}}), ConfigError);
  EXPECT_THROW(apply_json(cfg, Json::array()), ConfigError);
}

TEST(Config, CheckCatchesInvalidRuns) {
  auto cfg = fixture_config(3);
  EXPECT_NO_THROW(cfg.check());
  auto bad = cfg;
  bad.run.query = "  ";
  EXPECT_THROW(bad.check(), ConfigError);
  bad = cfg;
  bad.run.languages = {"en", "en"};
  EXPECT_THROW(bad.check(), ConfigError);
  bad = cfg;
  bad.run.epochs = 0;
  EXPECT_THROW(bad.check(), ConfigError);
  bad = cfg;
  bad.backend = "chat";
  EXPECT_THROW(bad.check(), ConfigError);
  bad.chat.model = "some-model";
  EXPECT_NO_THROW(bad.check());
}

TEST(Config, SnapshotRoundTrips) {
  const auto cfg = fixture_config(3);
  const Json snap = to_json(cfg);
  AppConfig back;
  apply_json(back, snap);
  EXPECT_EQ(to_json(back), snap);
  EXPECT_FALSE(snap.dump().find("api_key\":\"sk") != std::string::npos);
}

TEST(Experiment, AblationsShapeTheRun) {
  const auto exp = load_experiment(fixture("u200.experiment.json"));
  EXPECT_EQ(exp.epochs, 10);
  EXPECT_EQ(exp.budget.per_call, 5u);
  EXPECT_TRUE(std::filesystem::exists(exp.universe));
  const auto none = ablation_config(exp, "none");
  EXPECT_EQ(none.run.strategy, SearchStrategy::kTree);
  EXPECT_EQ(none.run.languages, (std::vector<Language>{"en", "zh"}));
  const auto flat = ablation_config(exp, "flat");
  EXPECT_EQ(flat.run.strategy, SearchStrategy::kFlat);
  EXPECT_EQ(flat.run.languages, std::vector<Language>{"en"});
  const auto en = ablation_config(exp, "lang-free");
  EXPECT_EQ(en.run.strategy, SearchStrategy::kTree);
  EXPECT_EQ(en.run.languages, std::vector<Language>{"en"});
  EXPECT_THROW(ablation_config(exp, "no-coach"), ConfigError);
}

TEST(RunDir, RefusesToOverwriteACompletedRun) {
  const auto dir = scratch("reuse");
  execute_run(fixture_config(1), dir);
  EXPECT_THROW(execute_run(fixture_config(1), dir), ConfigError);
}

TEST(RunDir, WritesEveryArtifact) {
  const auto dir = scratch("artifacts");
  const auto out = execute_run(fixture_config(3), dir);
  for (const auto& name : replay_artifacts()) EXPECT_TRUE(std::filesystem::exists(dir / name)) << name;
  EXPECT_TRUE(std::filesystem::exists(dir / "config.json"));
  const Json status = Json::parse(read_file(dir / kStatusFile));
  EXPECT_EQ(status.at("status"), "complete");
  EXPECT_EQ(status.at("epochs_completed"), 3);
  EXPECT_EQ(split(read_file(dir / "quality.tsv"), '\n').size(), 5u);
}

TEST(RunDir, IdenticalSeedsGiveByteIdenticalArtifacts) {
  const auto a = scratch("det-a");
  const auto b = scratch("det-b");
  execute_run(fixture_config(10), a);
  execute_run(fixture_config(10), b);
  EXPECT_TRUE(diff_runs(a, b).empty());
  auto other = fixture_config(10);
  other.run.seed = 8;
  other.run.languages = {"en"};
  const auto c = scratch("det-c");
  execute_run(other, c);
  EXPECT_FALSE(diff_runs(a, c).empty());
}
