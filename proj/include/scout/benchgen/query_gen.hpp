#pragma once

#include <algorithm>
#include <cctype>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scout/agents/roles.hpp"
#include "scout/benchgen/schedule.hpp"
#include "scout/core/asset.hpp"

namespace scout::benchgen {

class LeakageDetected : public ScoutError {
 public:
  LeakageDetected(const std::string& query, const std::string& identifier)
      : ScoutError("query leaks identifier '" + identifier + "': " + query),
        identifier_(identifier) {}
  const std::string& identifier() const { return identifier_; }

 private:
  std::string identifier_;
};

class Unresolvable : public ScoutError {
 public:
  using ScoutError::ScoutError;
};

enum class Tier { kBroad, kTight, kComplex };

inline std::string_view to_string(Tier t) {
  switch (t) {
    case Tier::kBroad: return "broad";
    case Tier::kTight: return "tight";
    case Tier::kComplex: return "complex";
  }
  return "broad";
}

inline Tier parse_tier(std::string_view text) {
  const std::string t = ascii_lower(text);
  if (t == "broad") return Tier::kBroad;
  if (t == "tight") return Tier::kTight;
  if (t == "complex") return Tier::kComplex;
  throw ConfigError("unknown difficulty tier: " + std::string(text));
}

inline const std::vector<std::string>& intents() {
  static const std::vector<std::string> v{
      "Program attrition and suspended or terminated programs",
      "Business development screening for in-licensing or acquisition",
      "Indication landscape mapping",
      "Target-first landscape mapping",
      "Precision oncology sub-landscapes",
      "White-space and low-competition target hunting",
      "Geography and origin constraints",
      "Platform and modality scouting",
      "Catalysts and upcoming readouts",
      "Combination regimen opportunity discovery"};
  return v;
}

// Bracketed slot names of a template, in order of first appearance.
inline std::vector<std::string> template_slots(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = text.find('[', pos)) != std::string_view::npos) {
    const auto end = text.find(']', pos);
    if (end == std::string_view::npos) break;
    std::string slot(text.substr(pos + 1, end - pos - 1));
    if (std::find(out.begin(), out.end(), slot) == out.end()) out.push_back(std::move(slot));
    pos = end + 1;
  }
  return out;
}

struct QueryGroup {
  std::string id;
  std::string intent;
  Tier tier = Tier::kBroad;
  std::string template_text;
  // Phrasing the scripted generator fills; same slot names as the template.
  std::string realization;
  // Slot -> asset attribute it draws from; "" for slots that need none.
  std::map<std::string, std::string> slot_fields;

  void check() const {
    if (template_slots(template_text).empty()) {
      throw InvariantViolation("group " + id + ": template has no slots");
    }
    if (std::find(intents().begin(), intents().end(), intent) == intents().end()) {
      throw InvariantViolation("group " + id + ": unknown intent '" + intent + "'");
    }
    for (const auto& slot : template_slots(realization)) {
      if (!slot_fields.contains(slot)) {
        throw InvariantViolation("group " + id + ": slot [" + slot + "] has no attribute mapping");
      }
    }
  }
};

inline std::vector<QueryGroup> load_query_groups(std::istream& in) {
  std::vector<QueryGroup> out;
  const Json doc = Json::parse(in);
  for (const auto& g : doc.at("groups")) {
    QueryGroup q;
    q.id = g.at("id").get<std::string>();
    q.intent = g.at("intent").get<std::string>();
    q.tier = parse_tier(g.at("tier").get<std::string>());
    q.template_text = g.at("template").get<std::string>();
    q.realization = g.value("realization", q.template_text);
    for (const auto& [slot, field] : g.at("slots").items()) {
      q.slot_fields[slot] = field.get<std::string>();
    }
    q.check();
    out.push_back(std::move(q));
  }
  return out;
}

// ---- attribute access ---------------------------------------------------

inline std::string region_of(const AssetRecord& asset) {
  static const std::map<std::string, std::string> regions{
      {"zh", "China"}, {"ja", "Japan"}, {"ko", "Korea"}, {"pt", "Brazil"}, {"de", "Germany"},
      {"fr", "France"}, {"es", "Spain"}, {"ru", "CIS"}, {"uk", "CIS"}, {"en", "US"}};
  auto it = regions.find(asset.origin_language);
  return it == regions.end() ? "" : it->second;
}

// Raw attribute value, or nullopt when the asset lacks it.
inline std::optional<std::string> asset_attribute(const AssetRecord& asset, const std::string& field) {
  auto first = [](const std::vector<std::string>& v) -> std::optional<std::string> {
    if (v.empty() || v.front().empty()) return std::nullopt;
    return v.front();
  };
  if (field.empty()) return std::string();
  if (field == "stage") {
    if (asset.stage_detail.empty()) return std::string(to_string(asset.stage_class));
    return asset.stage_detail;
  }
  if (field == "modality") return asset.modality.empty() ? std::nullopt : std::optional(asset.modality);
  if (field == "target") return first(asset.targets);
  if (field == "indication") return first(asset.indications);
  if (field == "region") {
    auto r = region_of(asset);
    return r.empty() ? std::nullopt : std::optional(r);
  }
  if (field == "trial_evidence") {
    for (const auto& t : asset.trials) {
      if (!t.biomarkers.empty()) return t.biomarkers.front();
      if (!t.endpoints.empty()) return t.endpoints.front();
      if (!t.efficacy_data.empty()) return "early efficacy";
    }
    return std::nullopt;
  }
  return std::nullopt;  // e.g. competitor counts: not an asset attribute
}

inline bool group_satisfiable(const QueryGroup& group, const AssetRecord& asset) {
  for (const auto& slot : template_slots(group.realization)) {
    if (!asset_attribute(asset, group.slot_fields.at(slot))) return false;
  }
  return true;
}

// ---- leakage ------------------------------------------------------------

// Aliases, canonical name and asset-specific source URLs.
inline std::vector<std::string> forbidden_identifiers(const AssetRecord& asset) {
  std::set<std::string> ids(asset.aliases.begin(), asset.aliases.end());
  ids.insert(asset.canonical_name);
  for (const auto& p : asset.provenance) {
    if (!p.source_url.empty()) ids.insert(p.source_url);
  }
  ids.erase("");
  return {ids.begin(), ids.end()};
}

inline constexpr std::size_t kMinCompactLeak = 5;

// First forbidden identifier found in the query, by normalized substring:
// token-bounded match, plus punctuation-blind match for longer identifiers.
inline std::optional<std::string> find_leak(const std::string& query, const AssetRecord& asset) {
  const std::string tokens = token_form(query);
  const std::string compact = compact_form(query);
  for (const auto& id : forbidden_identifiers(asset)) {
    const std::string id_tokens = token_form(id);
    if (id_tokens.size() > 2 && tokens.find(id_tokens) != std::string::npos) return id;
    const std::string id_compact = compact_form(id);
    if (id_compact.size() >= kMinCompactLeak && compact.find(id_compact) != std::string::npos) {
      return id;
    }
  }
  return std::nullopt;
}

// ---- generation ---------------------------------------------------------

struct GenerationRequest {
  const AssetRecord* asset = nullptr;
  const QueryGroup* group = nullptr;
  // Validator or leak-check feedback from the previous attempt; empty at first.
  std::string feedback;
  std::string previous_query;
  int attempt = 0;
};

class QueryGenerator {
 public:
  virtual ~QueryGenerator() = default;
  virtual std::string generate(const GenerationRequest& request) = 0;
};

// Judges a (query, asset) pair.
class QueryValidator {
 public:
  virtual ~QueryValidator() = default;
  virtual MatchVerdict validate(const std::string& query, const AssetRecord& asset) = 0;
};

class FunctionValidator final : public QueryValidator {
 public:
  using Fn = std::function<MatchVerdict(const std::string&, const AssetRecord&)>;
  explicit FunctionValidator(Fn fn) : fn_(std::move(fn)) {}
  MatchVerdict validate(const std::string& query, const AssetRecord& asset) override {
    return fn_(query, asset);
  }

 private:
  Fn fn_;
};

// Class-level wording for raw attribute values.
inline std::string abstract_value(const std::string& field, const std::string& value, Tier tier,
                                  bool loosened) {
  static const std::map<std::string, std::string> indications{
      {"duchenne muscular dystrophy", "DMD"},
      {"non-small cell lung cancer", "NSCLC"},
      {"acute myeloid leukemia", "AML"},
      {"chronic hepatitis b", "chronic hepatitis B"}};
  static const std::map<std::string, std::string> modalities{
      {"monoclonal antibody", "biologic (mAb)"},
      {"bispecific antibody", "biologic (bispecific)"},
      {"antibody-drug conjugate", "ADC"},
      {"sirna", "RNAi"},
      {"small molecule", "small-molecule"}};
  const std::string lower = ascii_lower(value);
  if (field == "stage") {
    if (loosened || tier == Tier::kBroad) return "preclinical or clinical";
    if (lower.rfind("phase", 0) == 0) return "Phase " + trim(lower.substr(5));
    return lower;
  }
  if (field == "indication") {
    auto it = indications.find(lower);
    return it == indications.end() ? lower : it->second;
  }
  if (field == "modality") {
    if (loosened) return "any-modality";
    auto it = modalities.find(lower);
    return it == modalities.end() ? lower : it->second;
  }
  if (field == "target") {
    std::string out = value;
    for (auto& ch : out) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return out;
  }
  return value;
}

// Fills the group's realization from asset attributes. Feedback naming a
// slot's attribute loosens that slot on the next attempt.
class ScriptedGenerator final : public QueryGenerator {
 public:
  std::string generate(const GenerationRequest& request) override {
    const auto& group = *request.group;
    const auto& asset = *request.asset;
    const std::string feedback = ascii_lower(request.feedback);
    std::string text = group.realization;
    for (const auto& slot : template_slots(group.realization)) {
      const std::string& field = group.slot_fields.at(slot);
      const auto value = asset_attribute(asset, field);
      if (!value) throw ScoutError("slot [" + slot + "] unsatisfiable for this asset");
      const bool loosened = !field.empty() && feedback.find(field) != std::string::npos;
      const std::string filled = abstract_value(field, *value, group.tier, loosened);
      const std::string marker = "[" + slot + "]";
      for (std::size_t pos = 0; (pos = text.find(marker, pos)) != std::string::npos;) {
        text.replace(pos, marker.size(), filled);
        pos += filled.size();
      }
    }
    return text;
  }
};

struct GeneratedQuery {
  std::string query;
  const QueryGroup* group = nullptr;
  int attempts = 0;
};

inline constexpr int kDefaultLeakRetries = 3;

// Picks a satisfiable group (seeded by the asset) and generates a leak-free
// query, regenerating on leakage up to `retries` extra times.
inline GeneratedQuery generate_query(const AssetRecord& asset, const std::vector<QueryGroup>& groups,
                                     QueryGenerator& generator, std::uint64_t seed = 0,
                                     int retries = kDefaultLeakRetries) {
  if (groups.empty()) throw ConfigError("no query groups");
  std::vector<const QueryGroup*> usable;
  for (const auto& g : groups) {
    if (group_satisfiable(g, asset)) usable.push_back(&g);
  }
  if (usable.empty()) throw Unresolvable("no query group fits asset " + asset.canonical_name);
  SeededRng rng(mix_seed(seed, asset.canonical_name));
  GeneratedQuery out;
  out.group = usable[static_cast<std::size_t>(rng.below(usable.size()))];

  GenerationRequest request{&asset, out.group, "", "", 0};
  std::optional<std::string> leak;
  for (int attempt = 0; attempt <= retries; ++attempt) {
    request.attempt = attempt;
    out.query = generator.generate(request);
    out.attempts = attempt + 1;
    leak = find_leak(out.query, asset);
    if (!leak) return out;
    request.previous_query = out.query;
    request.feedback = "remove identifier '" + *leak + "'";
  }
  throw LeakageDetected(out.query, *leak);
}

struct ValidatedPair {
  std::string query;
  int rounds = 0;
};

inline constexpr int kDefaultMaxRounds = 5;

// Validate, revise on rejection, repeat. Bounded by max_rounds validations.
inline ValidatedPair validate_and_revise(std::string query, const AssetRecord& asset,
                                         const QueryGroup& group, QueryValidator& validator,
                                         QueryGenerator& generator,
                                         int max_rounds = kDefaultMaxRounds) {
  if (max_rounds < 1) throw ConfigError("max_rounds must be >= 1");
  std::string feedback;
  for (int round = 1; round <= max_rounds; ++round) {
    std::string rationale;
    if (auto leak = find_leak(query, asset)) {
      rationale = "remove identifier '" + *leak + "'";
    } else {
      MatchVerdict verdict = validator.validate(query, asset);
      if (verdict.is_match) return {query, round};
      rationale = verdict.failure_rationale;
    }
    if (round == max_rounds) break;
    feedback += (feedback.empty() ? "" : "; ") + rationale;
    query = generator.generate({&asset, &group, feedback, query, round});
  }
  throw Unresolvable("validator did not confirm the pair for " + asset.canonical_name + " within " +
                     std::to_string(max_rounds) + " rounds");
}

struct BenchmarkRecord {
  std::string query;
  std::string group_id;
  AssetRecord asset;
  MiningTuple tuple;
};

}  // namespace scout::benchgen
