#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "scout/benchgen/pipeline.hpp"
#include "support.hpp"

using namespace scout;
using namespace scout::benchgen;
using scout::testing::fixture;
using scout::testing::u200;

namespace {

std::vector<RegionSources> regions() {
  std::ifstream in(fixture("regions.json"));
  return load_regions(in);
}

std::vector<QueryGroup> groups() {
  std::ifstream in(fixture("query_groups.json"));
  return load_query_groups(in);
}

const QueryGroup& group(const std::vector<QueryGroup>& gs, const std::string& id) {
  for (const auto& g : gs) {
    if (g.id == id) return g;
  }
  throw std::runtime_error("no group " + id);
}

AssetRecord dmd_asset() {
  AssetRecord a;
  a.canonical_name = "zelodystrogene";
  a.aliases = {"zelodystrogene", "ZDG-2291"};
  a.origin_language = "ja";
  a.stage_class = StageClass::kClinical;
  a.stage_detail = "phase 2";
  a.modality = "gene therapy";
  a.targets = {"dystrophin"};
  a.indications = {"duchenne muscular dystrophy"};
  return a;
}

class LeakyGenerator : public QueryGenerator {
 public:
  int leaks = 0;
  int calls = 0;
  std::string generate(const GenerationRequest& r) override {
    ++calls;
    if (calls <= leaks) return "Find programs like " + *r.asset->aliases.rbegin();
    return "Find all gene therapy programs";
  }
};

}  // namespace

TEST(Schedule, FixtureCycleCoversEveryTupleOnce) {
  const auto rs = regions();
  ASSERT_EQ(rs.size(), 10u);
  std::size_t sources = 0;
  for (const auto& r : rs) sources += r.sources.size();
  EXPECT_EQ(sources, 31u);
  TupleSchedule s(rs);
  EXPECT_EQ(s.cycle_length(), 62u);
  std::set<MiningTuple> expected;
  for (const auto& r : rs) {
    for (const auto& src : r.sources) {
      for (auto st : {StageClass::kPreclinical, StageClass::kClinical}) {
        expected.insert({r.region, r.language, src, st});
      }
    }
  }
  for (int cycle = 0; cycle < 3; ++cycle) {
    std::vector<MiningTuple> visited;
    for (std::size_t i = 0; i < 62; ++i) visited.push_back(s.next());
    EXPECT_EQ(std::set<MiningTuple>(visited.begin(), visited.end()), expected);
    EXPECT_EQ(visited, s.cycle());
  }
  EXPECT_EQ(s.position(), 186u);
}

TEST(Schedule, RoundRobinAcrossRegions) {
  const TupleSchedule s(regions());
  std::set<std::string> first;
  for (std::size_t i = 0; i < 10; ++i) first.insert(s.cycle()[i].region);
  EXPECT_EQ(first.size(), 10u);
}

TEST(Schedule, SingleSourceCycleOfTwo) {
  TupleSchedule s({{"Japan", "ja", {"Nikkei Biotech"}}});
  EXPECT_EQ(s.cycle_length(), 2u);
  EXPECT_EQ(s.next().stage, StageClass::kPreclinical);
  EXPECT_EQ(s.next().stage, StageClass::kClinical);
  EXPECT_EQ(s.next().stage, StageClass::kPreclinical);
  EXPECT_THROW(TupleSchedule({}), ConfigError);
}

TEST(SchedulePropertyTest, RandomFixturesArePermutations) {
  SeededRng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<RegionSources> rs;
    const auto n = 1 + rng.below(6);
    std::size_t total = 0;
    for (std::uint64_t r = 0; r < n; ++r) {
      RegionSources region{"R" + std::to_string(r), "l" + std::to_string(r), {}};
      const auto k = 1 + rng.below(5);
      for (std::uint64_t j = 0; j < k; ++j) region.sources.push_back("s" + std::to_string(j));
      total += region.sources.size();
      rs.push_back(region);
    }
    TupleSchedule s(rs);
    ASSERT_EQ(s.cycle_length(), 2 * total);
    const std::set<MiningTuple> unique(s.cycle().begin(), s.cycle().end());
    ASSERT_EQ(unique.size(), s.cycle_length());
  }
}

TEST(UnderRadar, TruthTable) {
  EXPECT_TRUE(under_radar_filter({5, 2}));
  EXPECT_FALSE(under_radar_filter({12, 3}));
  EXPECT_FALSE(under_radar_filter({3, 0}));
  EXPECT_TRUE(under_radar_filter({9, 1}));
  EXPECT_FALSE(under_radar_filter({10, 1}));
  EXPECT_FALSE(under_radar_filter({9, 0}));
  EXPECT_TRUE(under_radar_filter({0, 1}));
  EXPECT_THROW(under_radar_filter({-1, 1}), InvariantViolation);
}

TEST(UnderRadar, MonotoneInBothCounts) {
  for (std::int64_t e = 0; e <= 20; ++e) {
    for (std::int64_t l = 0; l <= 20; ++l) {
      if (!under_radar_filter({e, l})) continue;
      if (e > 0) {
        ASSERT_TRUE(under_radar_filter({e - 1, l}));
      }
      ASSERT_TRUE(under_radar_filter({e, l + 1}));
    }
  }
}

TEST(UnderRadar, SimSerpProfilesVisibility) {
  const auto u = u200();
  SimSerp serp(u);
  for (const auto& e : u->entities()) {
    const auto rec = u->record(e);
    const auto p = profile_asset(rec, e.origin_language, serp);
    EXPECT_EQ(p.english_pages, static_cast<std::int64_t>(std::floor(e.visibility.at("en") * 20)));
    if (e.origin_language == "en") {
      EXPECT_EQ(p.local_pages, p.english_pages);
    }
  }
}

TEST(UnderRadar, FractionLimitsTestedAssets) {
  std::vector<AssetRecord> assets;
  for (int i = 0; i < 10; ++i) assets.push_back(scout::testing::record("a" + std::to_string(i)));
  auto reject_all = [](const AssetRecord&) { return DiscoverabilityProfile{100, 0}; };
  EXPECT_EQ(filter_under_radar(assets, reject_all, 1.0, 1).size(), 0u);
  EXPECT_EQ(filter_under_radar(assets, reject_all, 0.0, 1).size(), 10u);
  EXPECT_EQ(filter_under_radar(assets, reject_all, 0.3, 1).size(), 7u);
  EXPECT_THROW(filter_under_radar(assets, reject_all, 1.5, 1), ConfigError);
}

TEST(QueryGroups, FixtureLoads) {
  const auto gs = groups();
  ASSERT_EQ(gs.size(), 4u);
  EXPECT_EQ(intents().size(), 10u);
  for (const auto& g : gs) EXPECT_NO_THROW(g.check());
  EXPECT_EQ(template_slots("Find [a] and [b c] for [a]"), (std::vector<std::string>{"a", "b c"}));
}

TEST(QueryGen, BroadIndicationExample) {
  const auto gs = groups();
  ScriptedGenerator gen;
  const auto out = generate_query(dmd_asset(), {group(gs, "G4")}, gen);
  EXPECT_EQ(out.query,
            "Find all drug assets currently in preclinical or clinical development for treatment "
            "of DMD.");
  EXPECT_EQ(out.attempts, 1);
}

TEST(QueryGen, GroupsNeedingMissingAttributesAreSkipped) {
  const auto gs = groups();
  const auto asset = dmd_asset();
  EXPECT_FALSE(group_satisfiable(group(gs, "G1"), asset));
  EXPECT_TRUE(group_satisfiable(group(gs, "G4"), asset));
  ScriptedGenerator gen;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    EXPECT_NE(generate_query(asset, gs, gen, seed).group->id, "G1");
  }
  AssetRecord bare = scout::testing::record("bare");
  EXPECT_THROW(generate_query(bare, {group(gs, "G1")}, gen), Unresolvable);
}

TEST(QueryGen, LeakDetection) {
  const auto asset = dmd_asset();
  EXPECT_EQ(find_leak("Find zdg 2291 analogues", asset), "ZDG-2291");
  EXPECT_EQ(find_leak("Find ZDG2291 analogues", asset), "ZDG-2291");
  EXPECT_EQ(find_leak("Programs like Zelodystrogene", asset), "zelodystrogene");
  EXPECT_FALSE(find_leak("Find all gene therapy programs for DMD", asset));
  LeakyGenerator once;
  once.leaks = 1;
  const auto gs = groups();
  EXPECT_EQ(generate_query(asset, {group(gs, "G4")}, once).attempts, 2);
  LeakyGenerator always;
  always.leaks = 100;
  try {
    generate_query(asset, {group(gs, "G4")}, always, 0, 3);
    FAIL() << "expected leakage";
  } catch (const LeakageDetected& e) {
    EXPECT_EQ(e.identifier(), "zelodystrogene");
  }
  EXPECT_EQ(always.calls, 4);
}

TEST(QueryGenProperty, FiveHundredQueriesCarryNoAliases) {
  const auto u = u200();
  const auto gs = groups();
  ScriptedGenerator gen;
  std::size_t generated = 0;
  for (std::uint64_t seed = 0; generated < 500; ++seed) {
    for (const auto& e : u->entities()) {
      if (generated == 500) break;
      const auto rec = u->record(e);
      const auto out = generate_query(rec, gs, gen, seed);
      ++generated;
      const std::string q = normalize_name(out.query);
      for (const auto& alias : rec.aliases) {
        ASSERT_EQ(q.find(normalize_name(alias)), std::string::npos) << out.query << " / " << alias;
      }
      ASSERT_FALSE(find_leak(out.query, rec));
    }
  }
  EXPECT_EQ(generated, 500u);
}

TEST(Revise, ValidFirstRoundReturnsUnchanged) {
  const auto gs = groups();
  ScriptedGenerator gen;
  FunctionValidator ok([](const std::string&, const AssetRecord& a) {
    MatchVerdict v;
    v.is_match = true;
    v.normalized_attributes = a;
    return v;
  });
  const auto pair = validate_and_revise("Find DMD programs", dmd_asset(), group(gs, "G3"), ok, gen);
  EXPECT_EQ(pair.query, "Find DMD programs");
  EXPECT_EQ(pair.rounds, 1);
}

TEST(Revise, StageRejectedOnceThenLoosened) {
  const auto gs = groups();
  const auto& g3 = group(gs, "G3");
  ScriptedGenerator gen;
  const auto asset = dmd_asset();
  const auto first = gen.generate({&asset, &g3, "", "", 0});
  EXPECT_NE(first.find("Phase 2"), std::string::npos) << first;
  int calls = 0;
  FunctionValidator stage_strict([&](const std::string& q, const AssetRecord& a) {
    ++calls;
    if (q.find("Phase 2") != std::string::npos) {
      return MatchVerdict::rejected("stage too narrow: registry lists phase 1/2");
    }
    MatchVerdict v;
    v.is_match = true;
    v.normalized_attributes = a;
    return v;
  });
  const auto pair = validate_and_revise(first, asset, g3, stage_strict, gen);
  EXPECT_EQ(pair.rounds, 2);
  EXPECT_EQ(calls, 2);
  EXPECT_NE(pair.query.find("preclinical or clinical"), std::string::npos);
}

TEST(Revise, AlwaysRejectingValidatorIsBounded) {
  const auto gs = groups();
  ScriptedGenerator gen;
  int calls = 0;
  FunctionValidator never([&](const std::string&, const AssetRecord&) {
    ++calls;
    return MatchVerdict::rejected("no");
  });
  EXPECT_THROW(validate_and_revise("Find DMD programs", dmd_asset(), group(gs, "G4"), never, gen, 3),
               Unresolvable);
  EXPECT_EQ(calls, 3);
  EXPECT_THROW(validate_and_revise("q", dmd_asset(), group(gs, "G4"), never, gen, 0), ConfigError);
}

TEST(Pipeline, SimBenchmarkIsLeakFreeAndDeterministic) {
  const auto u = u200();
  const auto rs = regions();
  const auto gs = groups();
  auto run = [&] {
    SimMiner miner(u, rs);
    SimEnricher enricher(u);
    SimSerp serp(u);
    ScriptedGenerator gen;
    PipelineBackends b{&miner, &enricher, &serp, &gen,
                       [](const QueryGroup& g) { return std::make_unique<SimPairValidator>(g); }};
    return build_benchmark(TupleSchedule(rs), gs, b, {});
  };
  const auto report = run();
  EXPECT_EQ(report.tuples, 62u);
  EXPECT_GT(report.records.size(), 10u);
  EXPECT_LE(report.under_radar, report.enriched);
  SimSerp serp(u);
  for (const auto& r : report.records) {
    EXPECT_FALSE(find_leak(r.query, r.asset)) << r.query;
    EXPECT_NE(r.group_id, "G1");
    EXPECT_TRUE(under_radar_filter(profile_asset(r.asset, r.asset.origin_language, serp)));
  }
  std::ostringstream a, b;
  write_benchmark_jsonl(a, report.records);
  write_benchmark_jsonl(b, run().records);
  EXPECT_EQ(a.str(), b.str());
}
