#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "scout/common.hpp"
#include "scout/core/text.hpp"

namespace scout {

using Json = nlohmann::ordered_json;

enum class StageClass { kPreclinical, kClinical };

inline std::string_view to_string(StageClass stage) {
  return stage == StageClass::kClinical ? "clinical" : "preclinical";
}

inline StageClass parse_stage_class(std::string_view text) {
  if (text == "clinical") return StageClass::kClinical;
  if (text == "preclinical") return StageClass::kPreclinical;
  throw ParseError("unknown stage class: " + std::string(text));
}

enum class AmplificationFlag { kMajorUsTradePress, kLargePharmaDeal };

inline std::string_view to_string(AmplificationFlag flag) {
  return flag == AmplificationFlag::kMajorUsTradePress ? "major_us_trade_press"
                                                       : "large_pharma_deal";
}

inline AmplificationFlag parse_amplification_flag(std::string_view text) {
  if (text == "major_us_trade_press") return AmplificationFlag::kMajorUsTradePress;
  if (text == "large_pharma_deal") return AmplificationFlag::kLargePharmaDeal;
  throw ParseError("unknown amplification flag: " + std::string(text));
}

// One atomic claim's justification. `field` names the attribute it supports.
struct Provenance {
  std::string field;
  std::string source_url;
  std::string verbatim_quote;

  friend bool operator==(const Provenance&, const Provenance&) = default;
  friend auto operator<=>(const Provenance&, const Provenance&) = default;
};

struct TrialRecord {
  std::string indication;
  std::string phase;
  std::string regimen;
  std::string efficacy_data;
  std::string safety_data;
  std::string line_of_therapy;
  std::vector<std::string> biomarkers;
  std::vector<std::string> site_countries;
  std::vector<std::string> endpoints;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;

  void check() const {
    if (indication.empty() || phase.empty()) {
      throw InvariantViolation("trial record requires indication and phase");
    }
  }
};

struct AssetRecord {
  std::string canonical_name;
  std::set<std::string> aliases;
  Language origin_language;
  bool is_valid_drug = true;
  bool is_active = true;
  StageClass stage_class = StageClass::kPreclinical;
  std::string stage_detail;
  std::vector<std::string> developers;
  std::string modality;
  std::vector<std::string> targets;
  std::string moa_short;
  std::string moa_detailed;
  std::vector<std::string> indications;
  std::vector<std::string> patents;
  std::vector<TrialRecord> trials;
  std::vector<std::string> approved_geographies;
  std::vector<std::string> regulatory_labels;
  std::vector<Provenance> provenance;
  std::set<AmplificationFlag> amplification_flags;

  friend bool operator==(const AssetRecord&, const AssetRecord&) = default;

  // Attribute names that carry a value and therefore need provenance.
  std::vector<std::string> populated_fields() const {
    std::vector<std::string> fields;
    if (!stage_detail.empty()) fields.emplace_back("stage_detail");
    if (!developers.empty()) fields.emplace_back("developers");
    if (!modality.empty()) fields.emplace_back("modality");
    if (!targets.empty()) fields.emplace_back("targets");
    if (!moa_short.empty()) fields.emplace_back("moa_short");
    if (!moa_detailed.empty()) fields.emplace_back("moa_detailed");
    if (!indications.empty()) fields.emplace_back("indications");
    if (!patents.empty()) fields.emplace_back("patents");
    if (!trials.empty()) fields.emplace_back("trials");
    if (!approved_geographies.empty()) fields.emplace_back("approved_geographies");
    if (!regulatory_labels.empty()) fields.emplace_back("regulatory_labels");
    return fields;
  }

  bool has_provenance_for(std::string_view field) const {
    for (const auto& p : provenance) {
      if (p.field == field) return true;
    }
    return false;
  }

  // Throws InvariantViolation naming the first broken rule.
  void check() const {
    if (canonical_name.empty()) {
      throw InvariantViolation("asset record has an empty canonical name");
    }
    if (!aliases.contains(canonical_name)) {
      throw InvariantViolation("canonical name '" + canonical_name + "' missing from aliases");
    }
    for (const auto& field : populated_fields()) {
      if (!has_provenance_for(field)) {
        throw InvariantViolation("asset '" + canonical_name + "' field '" + field +
                                 "' has no provenance");
      }
    }
    if (stage_class == StageClass::kClinical && trials.empty() &&
        ascii_lower(stage_detail).find("phase") == std::string::npos) {
      throw InvariantViolation("clinical asset '" + canonical_name +
                               "' has neither trials nor a clinical phase");
    }
    for (const auto& trial : trials) trial.check();
  }

  bool valid() const {
    try {
      check();
      return true;
    } catch (const InvariantViolation&) {
      return false;
    }
  }
};

struct Candidate {
  std::string raw_name;
  std::string source_url;
  NodeId discovered_by_node = kRootNode;
  Language discovered_language;
  int epoch = 1;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

// ---- serialization -------------------------------------------------------
// Field order is fixed by insertion order (ordered_json), which keeps snapshot
// lines stable.

inline void to_json(Json& j, const Provenance& p) {
  j = Json{{"field", p.field}, {"source_url", p.source_url}, {"quote", p.verbatim_quote}};
}

inline void from_json(const Json& j, Provenance& p) {
  j.at("field").get_to(p.field);
  j.at("source_url").get_to(p.source_url);
  j.at("quote").get_to(p.verbatim_quote);
}

inline void to_json(Json& j, const TrialRecord& t) {
  j = Json{{"indication", t.indication},       {"phase", t.phase},
           {"regimen", t.regimen},             {"efficacy_data", t.efficacy_data},
           {"safety_data", t.safety_data},     {"line_of_therapy", t.line_of_therapy},
           {"biomarkers", t.biomarkers},       {"site_countries", t.site_countries},
           {"endpoints", t.endpoints}};
}

inline void from_json(const Json& j, TrialRecord& t) {
  j.at("indication").get_to(t.indication);
  j.at("phase").get_to(t.phase);
  t.regimen = j.value("regimen", "");
  t.efficacy_data = j.value("efficacy_data", "");
  t.safety_data = j.value("safety_data", "");
  t.line_of_therapy = j.value("line_of_therapy", "");
  t.biomarkers = j.value("biomarkers", std::vector<std::string>{});
  t.site_countries = j.value("site_countries", std::vector<std::string>{});
  t.endpoints = j.value("endpoints", std::vector<std::string>{});
}

inline void to_json(Json& j, const AssetRecord& a) {
  Json flags = Json::array();
  for (auto flag : a.amplification_flags) flags.push_back(to_string(flag));
  j = Json{{"canonical_name", a.canonical_name},
           {"aliases", a.aliases},
           {"origin_language", a.origin_language},
           {"is_valid_drug", a.is_valid_drug},
           {"is_active", a.is_active},
           {"stage_class", to_string(a.stage_class)},
           {"stage_detail", a.stage_detail},
           {"developers", a.developers},
           {"modality", a.modality},
           {"targets", a.targets},
           {"moa_short", a.moa_short},
           {"moa_detailed", a.moa_detailed},
           {"indications", a.indications},
           {"patents", a.patents},
           {"trials", a.trials},
           {"approved_geographies", a.approved_geographies},
           {"regulatory_labels", a.regulatory_labels},
           {"provenance", a.provenance},
           {"amplification_flags", flags}};
}

inline void from_json(const Json& j, AssetRecord& a) {
  j.at("canonical_name").get_to(a.canonical_name);
  a.aliases = j.value("aliases", std::set<std::string>{});
  a.origin_language = j.value("origin_language", "");
  a.is_valid_drug = j.value("is_valid_drug", true);
  a.is_active = j.value("is_active", true);
  a.stage_class = parse_stage_class(j.value("stage_class", "preclinical"));
  a.stage_detail = j.value("stage_detail", "");
  a.developers = j.value("developers", std::vector<std::string>{});
  a.modality = j.value("modality", "");
  a.targets = j.value("targets", std::vector<std::string>{});
  a.moa_short = j.value("moa_short", "");
  a.moa_detailed = j.value("moa_detailed", "");
  a.indications = j.value("indications", std::vector<std::string>{});
  a.patents = j.value("patents", std::vector<std::string>{});
  a.trials = j.value("trials", std::vector<TrialRecord>{});
  a.approved_geographies = j.value("approved_geographies", std::vector<std::string>{});
  a.regulatory_labels = j.value("regulatory_labels", std::vector<std::string>{});
  a.provenance = j.value("provenance", std::vector<Provenance>{});
  a.amplification_flags.clear();
  for (const auto& flag : j.value("amplification_flags", std::vector<std::string>{})) {
    a.amplification_flags.insert(parse_amplification_flag(flag));
  }
}

inline void to_json(Json& j, const Candidate& c) {
  j = Json{{"raw_name", c.raw_name},
           {"source_url", c.source_url},
           {"node", c.discovered_by_node},
           {"language", c.discovered_language},
           {"epoch", c.epoch}};
}

inline void from_json(const Json& j, Candidate& c) {
  j.at("raw_name").get_to(c.raw_name);
  c.source_url = j.value("source_url", "");
  c.discovered_by_node = j.value("node", kRootNode);
  c.discovered_language = j.value("language", "");
  c.epoch = j.value("epoch", 1);
}

}  // namespace scout
