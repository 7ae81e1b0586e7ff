#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scout/agents/roles.hpp"
#include "scout/sim/investigate.hpp"
#include "scout/sim/universe.hpp"

// Deterministic role implementations. Each is a pure function of its request
// and the world it was built over, so runs replay exactly.
namespace scout::scripted {

using sim::Entity;
using sim::Predicate;
using sim::Universe;

class Investigator final : public scout::Investigator {
 public:
  Investigator(std::shared_ptr<const Universe> universe, sim::InvestigateBudget budget)
      : universe_(std::move(universe)), budget_(budget) {}

  InvestigatorResult investigate(const InvestigatorRequest& request) override {
    return sim::sim_investigate(*universe_, request, budget_);
  }

 private:
  std::shared_ptr<const Universe> universe_;
  sim::InvestigateBudget budget_;
};

class Validator final : public scout::Validator {
 public:
  explicit Validator(std::shared_ptr<const Universe> universe) : universe_(std::move(universe)) {}

  MatchVerdict validate(const std::string& query, const Candidate& candidate) override {
    const Entity* e = universe_->resolve(candidate.raw_name);
    if (e == nullptr) {
      return MatchVerdict::rejected("'" + candidate.raw_name +
                                    "' does not resolve to a known drug program");
    }
    const Predicate predicate = sim::parse_predicate(query);
    const auto lookup = e->lookup();
    const std::string url = "https://registry.sim/" + e->id;

    MatchVerdict verdict;
    for (const auto& part : predicate.conjuncts()) {
      CriterionVerdict cv;
      cv.criterion = part.to_string();
      cv.pass = part.eval(lookup);
      std::vector<const Predicate*> atoms;
      part.collect_atoms(atoms);
      for (const auto* atom : atoms) {
        cv.evidence.push_back({url, atom->field + ": " + e->attribute(atom->field)});
      }
      verdict.per_criterion.push_back(std::move(cv));
    }
    verdict.is_match = predicate.eval(lookup);
    if (!verdict.is_match) {
      verdict.failure_rationale = "fails " + join(predicate.failing_clauses(lookup), "; ");
    }
    // Attributes are normalized, names are not: alias resolution belongs to
    // the deduplicator.
    AssetRecord attrs = universe_->record(*e);
    attrs.canonical_name = candidate.raw_name;
    attrs.aliases = {candidate.raw_name};
    verdict.normalized_attributes = std::move(attrs);
    return verdict;
  }

 private:
  std::shared_ptr<const Universe> universe_;
};

// Alias knowledge: maps any known name to the full canonical record.
using AliasKnowledge = std::function<std::optional<AssetRecord>(std::string_view name)>;

inline AliasKnowledge universe_aliases(std::shared_ptr<const Universe> universe) {
  return [universe](std::string_view name) -> std::optional<AssetRecord> {
    if (const Entity* e = universe->resolve(name)) return universe->record(*e);
    return std::nullopt;
  };
}

class Deduplicator final : public DedupBackend {
 public:
  explicit Deduplicator(AliasKnowledge knowledge) : knowledge_(std::move(knowledge)) {}

  std::vector<DedupGroup> group_pass(std::span<const AssetRecord> items,
                                     const GlobalAssetStore& store) override {
    std::vector<DedupGroup> groups;
    std::map<std::string, std::size_t> by_canonical;
    for (std::size_t i = 0; i < items.size(); ++i) {
      AssetRecord enriched = enrich(items[i]);
      auto [it, fresh] = by_canonical.emplace(enriched.canonical_name, groups.size());
      if (fresh) {
        groups.push_back({std::move(enriched), {i}, std::nullopt});
      } else {
        auto& group = groups[it->second];
        group.members.push_back(i);
        group.representative.aliases.insert(enriched.aliases.begin(), enriched.aliases.end());
      }
    }
    for (auto& group : groups) {
      for (const auto& alias : group.representative.aliases) {
        if (auto hit = store.resolve(alias)) {
          group.existing = *hit;
          break;
        }
      }
    }
    return groups;
  }

  HeavyCheck check_item(const AssetRecord& item, std::span<const AssetRecord> existing) override {
    HeavyCheck check;
    check.enriched = enrich(item);
    for (std::size_t i = 0; i < existing.size() && !check.duplicate_of; ++i) {
      for (const auto& alias : existing[i].aliases) {
        if (check.enriched.aliases.contains(alias) ||
            resolved_name(alias) == check.enriched.canonical_name) {
          check.duplicate_of = i;
          break;
        }
      }
    }
    return check;
  }

 private:
  AssetRecord enrich(const AssetRecord& item) const {
    for (const auto& alias : item.aliases) {
      if (auto known = knowledge_(alias)) {
        AssetRecord out = *known;
        out.aliases.insert(item.aliases.begin(), item.aliases.end());
        return out;
      }
    }
    return item;
  }

  std::string resolved_name(const std::string& alias) const {
    if (auto known = knowledge_(alias)) return known->canonical_name;
    return {};
  }

  AliasKnowledge knowledge_;
};

// Partitions the node's slice of the world (matches of query AND directive)
// by the first attribute that still splits it, producing at most k disjoint
// child directives whose union covers the slice.
class Coach final : public scout::Coach {
 public:
  explicit Coach(std::shared_ptr<const Universe> universe) : universe_(std::move(universe)) {}

  static const std::vector<std::string>& partition_fields() {
    static const std::vector<std::string> fields{"modality", "target", "indication", "region",
                                                 "stage"};
    return fields;
  }

  CoachOutput expand(const CoachContext& context) override {
    const Predicate query = sim::parse_predicate(context.query);
    const Predicate directive = sim::directive_predicate(context.current.directive);
    const auto slice = universe_->oracle_answer(Predicate::all_of({query, directive}));

    std::set<std::string> constrained;
    std::vector<const Predicate*> atoms;
    directive.collect_atoms(atoms);
    for (const auto* a : atoms) constrained.insert(a->field);

    CoachOutput out;
    auto split_on = [&](const std::string& field) -> std::optional<std::vector<std::set<std::string>>> {
      std::map<std::string, std::size_t> counts;
      for (const Entity* e : slice) ++counts[e->attribute(field)];
      if (counts.size() < 2) return std::nullopt;
      std::vector<std::pair<std::string, std::size_t>> ordered(counts.begin(), counts.end());
      std::stable_sort(ordered.begin(), ordered.end(),
                       [](const auto& a, const auto& b) { return a.second > b.second; });
      const std::size_t group_count = std::min<std::size_t>(static_cast<std::size_t>(std::max(context.k, 1)), ordered.size());
      std::vector<std::set<std::string>> groups(group_count);
      std::vector<std::size_t> load(group_count, 0);
      for (const auto& [value, count] : ordered) {
        const auto slot = static_cast<std::size_t>(
            std::min_element(load.begin(), load.end()) - load.begin());
        groups[slot].insert(value);
        load[slot] += count;
      }
      return groups;
    };

    std::optional<std::vector<std::set<std::string>>> groups;
    std::string chosen;
    for (int pass = 0; pass < 2 && !groups; ++pass) {
      for (const auto& field : partition_fields()) {
        if ((pass == 0) == constrained.contains(field)) continue;
        if ((groups = split_on(field))) {
          chosen = field;
          break;
        }
      }
    }
    if (!groups) {
      out.rationale = "slice cannot be partitioned further";
      return out;
    }
    for (const auto& values : *groups) {
      std::vector<Predicate> parts = directive.conjuncts();
      parts.push_back(Predicate::atom(chosen, values));
      DirectiveSpec spec;
      spec.directive = sim::render_directive(Predicate::all_of(std::move(parts)));
      spec.instructions = "Prioritize primary regional sources covering " + chosen + " " +
                          join({values.begin(), values.end()}, " / ") +
                          "; skip assets already known.";
      if (!context.failure_summary.empty()) {
        spec.instructions += " Watch for: " + split(context.failure_summary, '\n').front();
      }
      out.children.push_back(std::move(spec));
    }
    out.rationale = "partitioned slice of " + std::to_string(slice.size()) + " assets by " + chosen;
    return out;
  }

  // Frequency-ranked recurring patterns, one line per pattern.
  std::string summarize_failures(const std::vector<std::string>& rationales,
                                 std::size_t cap) override {
    std::map<std::string, std::size_t> counts;
    for (const auto& rationale : rationales) {
      std::set<std::string> seen;
      for (const auto& clause : split(rationale, ';')) {
        std::string key = pattern_key(clause);
        if (!key.empty() && seen.insert(key).second) ++counts[key];
      }
    }
    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    std::string summary;
    for (const auto& [key, count] : ranked) {
      std::string line = "- " + key + " (" + std::to_string(count) + "x)\n";
      if (summary.size() + line.size() > cap) break;
      summary += line;
    }
    return summary;
  }

 private:
  static std::string pattern_key(const std::string& clause) {
    static const std::vector<std::string> fields{"modality", "target",       "indication",
                                                 "stage",    "origin_language", "region"};
    const std::string lowered = ascii_lower(clause);
    for (const auto& field : fields) {
      if (lowered.find(field) != std::string::npos) return "wrong " + field;
    }
    if (lowered.find("does not resolve") != std::string::npos) return "unresolvable entity";
    return trim(lowered).substr(0, 80);
  }

  std::shared_ptr<const Universe> universe_;
};

struct SimSetup {
  std::shared_ptr<const Universe> universe;
  sim::InvestigateBudget budget;
};

inline Backends make_backends(const SimSetup& setup) {
  Backends b;
  b.investigator = std::make_shared<Investigator>(setup.universe, setup.budget);
  b.validator = std::make_shared<Validator>(setup.universe);
  b.deduplicator = std::make_shared<Deduplicator>(universe_aliases(setup.universe));
  b.coach = std::make_shared<Coach>(setup.universe);
  return b;
}

}  // namespace scout::scripted
