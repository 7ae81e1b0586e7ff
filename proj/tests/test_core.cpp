#include <gtest/gtest.h>

#include <sstream>

#include "scout/core/stores.hpp"
#include "support.hpp"

using namespace scout;
using scout::testing::candidate;
using scout::testing::record;

TEST(Text, NormalizeNameFoldsCaseSpaceAndEdgePunctuation) {
  EXPECT_EQ(normalize_name("  Drug-A  "), "drug-a");
  EXPECT_EQ(normalize_name("DRUG   a."), "drug a");
  EXPECT_EQ(normalize_name("(BGB-3111)"), "bgb-3111");
}

TEST(Text, TokenAndCompactForms) {
  EXPECT_EQ(token_form("BGB-3111 trial"), " bgb 3111 trial ");
  EXPECT_EQ(compact_form("BGB-3111"), "bgb3111");
}

TEST(Text, UrlDomain) {
  EXPECT_EQ(url_domain("https://www.fiercebiotech.com/a/b?c"), "www.fiercebiotech.com");
}

TEST(Rng, SeededStreamsRepeat) {
  SeededRng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
  SeededRng c(1);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(c.below(7), 7u);
}

TEST(AssetRecord, CanonicalNameMustBeAnAlias) {
  AssetRecord r;
  r.canonical_name = "x";
  EXPECT_THROW(r.check(), InvariantViolation);
  r.aliases = {"x"};
  EXPECT_NO_THROW(r.check());
}

TEST(AssetRecord, PopulatedFieldNeedsProvenance) {
  auto r = record("x");
  r.modality = "sirna";
  EXPECT_FALSE(r.valid());
  r.provenance.push_back({"modality", "https://a.sim/x", "an siRNA"});
  EXPECT_TRUE(r.valid());
}

TEST(AssetRecord, ClinicalNeedsTrialOrPhase) {
  auto r = record("x");
  r.stage_class = StageClass::kClinical;
  EXPECT_FALSE(r.valid());
  r.stage_detail = "phase 2";
  r.provenance.push_back({"stage_detail", "https://a.sim/x", "phase 2"});
  EXPECT_TRUE(r.valid());
}

TEST(AssetRecord, JsonRoundTrip) {
  auto r = record("vodulosiran", {"BJF-1806"});
  r.modality = "sirna";
  r.provenance.push_back({"modality", "https://a.sim/x", "siRNA"});
  r.amplification_flags.insert(AmplificationFlag::kLargePharmaDeal);
  TrialRecord t;
  t.indication = "obesity";
  t.phase = "phase 1";
  r.trials.push_back(t);
  r.provenance.push_back({"trials", "https://a.sim/x", "phase 1"});
  const Json j = r;
  EXPECT_EQ(j.get<AssetRecord>(), r);
}

TEST(CandidateStore, DeduplicatesByNormalizedName) {
  CandidateStore store;
  std::vector<Candidate> batch{candidate("Drug-A"), candidate("drug-a "), candidate("Drug B")};
  EXPECT_EQ(store.merge(batch), 2u);
  EXPECT_TRUE(store.contains("DRUG-A"));
  EXPECT_EQ(store.size(), 2u);
}

TEST(CandidateStore, RejectsEmptyNamesAndEpochRegression) {
  CandidateStore store;
  std::vector<Candidate> empty{candidate("")};
  EXPECT_THROW(store.merge(empty), InvariantViolation);
  std::vector<Candidate> later{candidate("a", 3)};
  store.merge(later);
  std::vector<Candidate> earlier{candidate("b", 2)};
  EXPECT_THROW(store.merge(earlier), InvariantViolation);
}

TEST(CandidateStore, SnapshotOrderedByEpochThenNode) {
  CandidateStore store;
  std::vector<Candidate> e1{candidate("x", 1, 2), candidate("y", 1, 1)};
  std::vector<Candidate> e2{candidate("z", 2, 0)};
  store.merge(e1);
  store.merge(e2);
  const auto snap = store.snapshot();
  ASSERT_EQ(snap.size(), 3u);
  EXPECT_EQ(snap[0].raw_name, "y");
  EXPECT_EQ(snap[1].raw_name, "x");
  EXPECT_EQ(snap[2].raw_name, "z");
}

TEST(GlobalAssetStore, AliasHitMergesIntoExistingAsset) {
  GlobalAssetStore store;
  EXPECT_TRUE(store.register_asset(record("Drug-A", {"DA-101"})).inserted());
  auto res = store.register_asset(record("da-101", {"Brandix"}));
  EXPECT_FALSE(res.inserted());
  EXPECT_EQ(res.canonical_name, "Drug-A");
  EXPECT_EQ(store.size(), 1u);
  EXPECT_EQ(store.resolve("BRANDIX"), "Drug-A");
  EXPECT_TRUE(store.consistent());
}

TEST(GlobalAssetStore, RegistrationIsIdempotent) {
  GlobalAssetStore store;
  auto r = record("Drug-A", {"DA-101"});
  r.provenance.push_back({"modality", "https://a.sim", "q"});
  r.modality = "peptide";
  store.register_asset(r);
  const auto before = store.assets();
  store.register_asset(r);
  EXPECT_EQ(store.assets(), before);
}

TEST(GlobalAssetStore, BridgingTwoAssetsIsAnInvariantViolation) {
  GlobalAssetStore store;
  store.register_asset(record("A", {"a-1"}));
  store.register_asset(record("B", {"b-1"}));
  EXPECT_THROW(store.register_asset(record("C", {"a-1", "b-1"})), InvariantViolation);
  EXPECT_EQ(store.size(), 2u);
  EXPECT_TRUE(store.consistent());
}

TEST(GlobalAssetStore, InvalidRecordRejected) {
  GlobalAssetStore store;
  auto r = record("A");
  r.modality = "peptide";  // no provenance
  EXPECT_THROW(store.register_asset(r), InvariantViolation);
}

TEST(GlobalAssetStore, SnapshotLinesCarrySchemaVersion) {
  GlobalAssetStore store;
  store.register_asset(record("A"));
  std::ostringstream out;
  store.write_jsonl(out);
  const Json line = Json::parse(out.str());
  EXPECT_EQ(line.at("schema"), kSchemaVersion);
  EXPECT_EQ(line.at("kind"), "asset");
}

TEST(EvidenceLog, KeepsAppendOrderAndAttribution) {
  EvidenceLog log;
  log.append_query({"q1", "en", 0, 1});
  log.append_query({"q2", "zh", 3, 2});
  log.append_domain({"yaozhi.sim", "zh", 3, 2});
  ASSERT_EQ(log.queries().size(), 2u);
  EXPECT_EQ(log.queries()[1].language, "zh");
  EXPECT_EQ(log.queries()[1].node, 3u);
  EXPECT_EQ(log.domains().front().domain, "yaozhi.sim");
}
