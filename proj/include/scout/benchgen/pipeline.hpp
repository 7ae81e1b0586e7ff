#pragma once

#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "scout/benchgen/discoverability.hpp"
#include "scout/benchgen/query_gen.hpp"
#include "scout/benchgen/schedule.hpp"
#include "scout/sim/universe.hpp"

namespace scout::benchgen {

// Returns raw program mentions for one mining tuple.
class Miner {
 public:
  virtual ~Miner() = default;
  virtual std::vector<Candidate> mine(const MiningTuple& tuple) = 0;
};

// Validates a mention and returns its enriched record, or nullopt for
// invalid or inactive programs.
class Enricher {
 public:
  virtual ~Enricher() = default;
  virtual std::optional<AssetRecord> enrich(const Candidate& candidate, const MiningTuple& tuple) = 0;
};

namespace detail {

inline bool region_matches(const std::string& tuple_region, const std::string& entity_region) {
  return ascii_lower(tuple_region).find(ascii_lower(entity_region)) != std::string::npos;
}

}  // namespace detail

// Entities announced in the tuple's region and stage class, split across the
// region's sources by id hash, named by their local alias when they have one.
class SimMiner final : public Miner {
 public:
  SimMiner(std::shared_ptr<const sim::Universe> universe, std::vector<RegionSources> regions)
      : universe_(std::move(universe)), regions_(std::move(regions)) {}

  std::vector<Candidate> mine(const MiningTuple& tuple) override {
    std::vector<std::string> sources;
    for (const auto& r : regions_) {
      if (r.region == tuple.region) sources = r.sources;
    }
    std::vector<Candidate> out;
    if (sources.empty()) return out;
    for (const auto& e : universe_->entities()) {
      if (!detail::region_matches(tuple.region, e.region)) continue;
      if (e.stage_class() != tuple.stage) continue;
      if (sources[fnv1a(e.id) % sources.size()] != tuple.source) continue;
      Candidate c;
      c.raw_name = e.canonical();
      for (const auto& a : e.aliases) {
        if (a.language == e.origin_language) c.raw_name = a.text;
      }
      c.source_url = "https://" + compact_form(tuple.source) + ".sim/" + e.id;
      c.discovered_language = tuple.language;
      out.push_back(std::move(c));
    }
    return out;
  }

 private:
  std::shared_ptr<const sim::Universe> universe_;
  std::vector<RegionSources> regions_;
};

class SimEnricher final : public Enricher {
 public:
  explicit SimEnricher(std::shared_ptr<const sim::Universe> universe) : universe_(std::move(universe)) {}

  std::optional<AssetRecord> enrich(const Candidate& candidate, const MiningTuple&) override {
    const auto* e = universe_->resolve(candidate.raw_name);
    if (e == nullptr) return std::nullopt;
    return universe_->record(*e);
  }

 private:
  std::shared_ptr<const sim::Universe> universe_;
};

// Confirms a pair when every attribute the group draws on is phrased
// consistently with the asset.
class SimPairValidator final : public QueryValidator {
 public:
  explicit SimPairValidator(const QueryGroup& group) : group_(group) {}

  MatchVerdict validate(const std::string& query, const AssetRecord& asset) override {
    std::vector<std::string> failing;
    const std::string lower = ascii_lower(query);
    for (const auto& slot : template_slots(group_.realization)) {
      const std::string& field = group_.slot_fields.at(slot);
      if (field.empty() || field == "stage") continue;
      const auto value = asset_attribute(asset, field);
      if (!value) continue;
      const std::string phrase = ascii_lower(abstract_value(field, *value, group_.tier, false));
      if (lower.find(phrase) == std::string::npos) failing.push_back("wrong " + field);
    }
    if (failing.empty()) {
      MatchVerdict v;
      v.is_match = true;
      v.normalized_attributes = asset;
      return v;
    }
    return MatchVerdict::rejected(join(failing, "; "));
  }

 private:
  QueryGroup group_;
};

struct PipelineOptions {
  std::size_t steps = 0;  // tuples to process; 0 = one full cycle
  double filter_fraction = 1.0;
  std::size_t probes_per_language = kDefaultProbesPerLanguage;
  int max_rounds = kDefaultMaxRounds;
  std::uint64_t seed = 0;
};

struct PipelineReport {
  std::size_t tuples = 0;
  std::size_t mined = 0;
  std::size_t enriched = 0;
  std::size_t under_radar = 0;
  std::size_t unresolvable = 0;
  std::vector<BenchmarkRecord> records;
  std::vector<std::string> warnings;
};

struct PipelineBackends {
  Miner* miner = nullptr;
  Enricher* enricher = nullptr;
  SerpBackend* serp = nullptr;
  QueryGenerator* generator = nullptr;
  // Builds the pair validator for a chosen group.
  std::function<std::unique_ptr<QueryValidator>(const QueryGroup&)> validator_for;
};

inline PipelineReport build_benchmark(TupleSchedule schedule, const std::vector<QueryGroup>& groups,
                                      const PipelineBackends& b, const PipelineOptions& options) {
  PipelineReport report;
  const std::size_t steps = options.steps == 0 ? schedule.cycle_length() : options.steps;

  std::vector<AssetRecord> assets;
  std::vector<MiningTuple> origin;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < steps; ++i) {
    const MiningTuple tuple = schedule.next();
    ++report.tuples;
    for (const auto& c : b.miner->mine(tuple)) {
      ++report.mined;
      auto record = b.enricher->enrich(c, tuple);
      if (!record || !record->is_valid_drug || !record->is_active ||
          !record->amplification_flags.empty()) {
        continue;
      }
      if (!seen.insert(record->canonical_name).second) continue;
      ++report.enriched;
      assets.push_back(std::move(*record));
      origin.push_back(tuple);
    }
  }

  auto profile = [&](const AssetRecord& a) {
    return profile_asset(a, a.origin_language, *b.serp, options.probes_per_language);
  };
  const auto kept = filter_under_radar(assets, profile, options.filter_fraction, options.seed);
  report.under_radar = kept.size();

  std::size_t next_origin = 0;
  for (const auto& asset : kept) {
    while (assets[next_origin].canonical_name != asset.canonical_name) ++next_origin;
    try {
      auto generated = generate_query(asset, groups, *b.generator, options.seed);
      auto validator = b.validator_for(*generated.group);
      auto pair = validate_and_revise(generated.query, asset, *generated.group, *validator,
                                      *b.generator, options.max_rounds);
      report.records.push_back({pair.query, generated.group->id, asset, origin[next_origin]});
    } catch (const ScoutError& e) {
      ++report.unresolvable;
      report.warnings.push_back(asset.canonical_name + ": " + e.what());
    }
  }
  return report;
}

inline void write_benchmark_jsonl(std::ostream& out, const std::vector<BenchmarkRecord>& records) {
  for (const auto& r : records) {
    Json j{{"schema", 1},
           {"kind", "benchmark_pair"},
           {"query", r.query},
           {"group", r.group_id},
           {"gt_asset", r.asset.canonical_name},
           {"tuple",
            {{"region", r.tuple.region},
             {"language", r.tuple.language},
             {"source", r.tuple.source},
             {"stage", std::string(to_string(r.tuple.stage))}}},
           {"record", Json(r.asset)}};
    out << j.dump() << '\n';
  }
}

}  // namespace scout::benchgen
