#pragma once

#include <istream>
#include <string>
#include <vector>

#include "scout/core/asset.hpp"

namespace scout::benchgen {

struct RegionSources {
  std::string region;
  Language language;  // one region-language pair; multi-language rows use "ru/uk" style codes
  std::vector<std::string> sources;
};

struct MiningTuple {
  std::string region;
  Language language;
  std::string source;
  StageClass stage = StageClass::kPreclinical;

  friend bool operator==(const MiningTuple&, const MiningTuple&) = default;
  friend auto operator<=>(const MiningTuple&, const MiningTuple&) = default;
};

inline std::vector<RegionSources> load_regions(std::istream& in) {
  std::vector<RegionSources> out;
  const Json doc = Json::parse(in);
  for (const auto& row : doc.at("regions")) {
    RegionSources r;
    r.region = row.at("region").get<std::string>();
    r.language = row.at("language").get<std::string>();
    r.sources = row.at("sources").get<std::vector<std::string>>();
    if (r.region.empty() || r.language.empty() || r.sources.empty()) {
      throw ConfigError("region rows need a name, a language and at least one source");
    }
    out.push_back(std::move(r));
  }
  if (out.empty()) throw ConfigError("region fixture is empty");
  return out;
}

// Cyclic round-robin over region x language x source x stage. Consecutive
// steps rotate across region-language pairs; within a pair, sources advance
// in fixture order with both stages per source.
class TupleSchedule {
 public:
  explicit TupleSchedule(const std::vector<RegionSources>& regions) {
    if (regions.empty()) throw ConfigError("region fixture is empty");
    std::vector<std::vector<MiningTuple>> lanes;
    for (const auto& r : regions) {
      std::vector<MiningTuple> lane;
      for (const auto& s : r.sources) {
        for (StageClass stage : {StageClass::kPreclinical, StageClass::kClinical}) {
          lane.push_back({r.region, r.language, s, stage});
        }
      }
      lanes.push_back(std::move(lane));
    }
    for (std::size_t depth = 0;; ++depth) {
      bool any = false;
      for (const auto& lane : lanes) {
        if (depth < lane.size()) {
          cycle_.push_back(lane[depth]);
          any = true;
        }
      }
      if (!any) break;
    }
  }

  std::size_t cycle_length() const { return cycle_.size(); }
  const std::vector<MiningTuple>& cycle() const { return cycle_; }

  const MiningTuple& next() {
    const MiningTuple& t = cycle_[position_ % cycle_.size()];
    ++position_;
    return t;
  }

  std::size_t position() const { return position_; }

 private:
  std::vector<MiningTuple> cycle_;
  std::size_t position_ = 0;
};

inline TupleSchedule schedule_tuples(const std::vector<RegionSources>& regions) {
  return TupleSchedule(regions);
}

}  // namespace scout::benchgen
