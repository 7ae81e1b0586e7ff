#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "scout/agents/roles.hpp"
#include "scout/sim/universe.hpp"

namespace scout::sim {

struct InvestigateBudget {
  // Most candidates a single investigator call returns.
  std::size_t per_call = 5;
  // Chance that any returned slot is a near-miss instead of a match.
  double distractor_rate = 0.2;
  // How deep into the prominence-ranked results of a slice a call can see;
  // 0 means unlimited. Broad slices hide their long tail.
  std::size_t search_depth = 12;
};

inline constexpr std::string_view kDirectivePrefix = "Focus on ";

// Parses a scripted directive ("Focus on <predicate>"); empty means no constraint.
inline Predicate directive_predicate(std::string_view directive) {
  std::string text = trim(directive);
  if (text.empty()) return Predicate::always();
  if (std::string_view(text).substr(0, kDirectivePrefix.size()) == kDirectivePrefix) {
    text = text.substr(kDirectivePrefix.size());
  }
  return parse_predicate(text);
}

inline std::string render_directive(const Predicate& constraint) {
  return std::string(kDirectivePrefix) + constraint.to_string();
}

namespace detail {

inline bool near_miss(const Entity& e, const Predicate& query) {
  const auto lookup = e.lookup();
  if (query.eval(lookup)) return false;
  const auto parts = query.conjuncts();
  if (parts.size() <= 1) return true;
  std::size_t failing = 0;
  for (const auto& p : parts) failing += p.eval(lookup) ? 0 : 1;
  return failing == 1;
}

inline std::string domain_for(const Language& language, const std::string& entity_id) {
  static const std::map<std::string, std::vector<std::string>> outlets{
      {"en", {"fiercebiotech.sim", "endpoints.sim", "biotechdispatch.sim"}},
      {"zh", {"yaozhi.sim", "pharmcube.sim", "vbdata.sim"}},
      {"ja", {"nikkei-biotech.sim", "pharmajapan.sim"}},
      {"ko", {"medigate.sim", "etnews.sim", "biospectator.sim"}}};
  auto it = outlets.find(language);
  if (it == outlets.end()) return language + ".news.sim";
  return it->second[fnv1a(entity_id) % it->second.size()];
}

}  // namespace detail

// Investigator over the simulated world: matches of query AND directive that
// are discoverable in the request language, minus already-known names, plus
// near-miss distractors, capped by the per-call budget. Pure in (request,
// universe seed).
inline InvestigatorResult sim_investigate(const Universe& universe,
                                          const InvestigatorRequest& request,
                                          const InvestigateBudget& budget) {
  const Predicate query = parse_predicate(request.query);
  const Predicate directive = directive_predicate(request.directive);
  const double threshold = universe.spec().visibility_threshold;

  std::set<const Entity*> known;
  std::vector<std::string> known_keys;
  for (const auto* names : {&request.known_assets, &request.known_candidates}) {
    for (const auto& name : *names) {
      known_keys.push_back(normalize_name(name));
      if (const Entity* e = universe.resolve(name)) known.insert(e);
    }
  }
  std::sort(known_keys.begin(), known_keys.end());

  auto ranked = [&](bool matching) {
    std::vector<const Entity*> pool;
    for (const auto& e : universe.entities()) {
      if (!e.visible_in(request.language, threshold)) continue;
      if (!directive.eval(e.lookup())) continue;
      const bool ok = matching ? query.eval(e.lookup()) : detail::near_miss(e, query);
      if (ok) pool.push_back(&e);
    }
    std::sort(pool.begin(), pool.end(), [](const Entity* a, const Entity* b) {
      if (a->prominence != b->prominence) return a->prominence > b->prominence;
      return a->id < b->id;
    });
    if (budget.search_depth > 0 && pool.size() > budget.search_depth) {
      pool.resize(budget.search_depth);
    }
    std::erase_if(pool, [&](const Entity* e) { return known.contains(e); });
    return pool;
  };
  std::vector<const Entity*> matches = ranked(true);
  std::vector<const Entity*> distractors = ranked(false);

  std::string context = request.query + "|" + request.directive + "|" + request.language;
  for (const auto& key : known_keys) context += "|" + key;
  SeededRng rng(mix_seed(universe.spec().seed, context));

  auto take = [&](std::vector<const Entity*>& pool) {
    const auto index = static_cast<std::size_t>(rng.below(pool.size()));
    const Entity* e = pool[index];
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(index));
    return e;
  };

  InvestigatorResult result;
  const std::string base = request.directive.empty()
                               ? request.query
                               : request.directive + " | " + request.query;
  result.executed_queries.push_back("[" + request.language + "] " + base);
  result.executed_queries.push_back("[" + request.language + "] " + base +
                                    " pipeline announcements");
  std::set<std::string> domains;
  for (std::size_t slot = 0; slot < budget.per_call; ++slot) {
    const bool distract = rng.chance(budget.distractor_rate);
    const Entity* e = nullptr;
    if (distract && !distractors.empty()) {
      e = take(distractors);
    } else if (!matches.empty()) {
      e = take(matches);
    } else {
      break;
    }
    std::vector<const Alias*> local;
    std::vector<const Alias*> neutral;
    for (const auto& a : e->aliases) {
      if (a.language == request.language) local.push_back(&a);
      if (a.language.empty()) neutral.push_back(&a);
    }
    const Alias* alias = (!local.empty() && rng.chance(0.7)) ? local[rng.below(local.size())]
                                                             : neutral[rng.below(neutral.size())];
    const std::string domain = detail::domain_for(request.language, e->id);
    domains.insert(domain);
    Candidate c;
    c.raw_name = alias->text;
    c.source_url = "https://" + domain + "/news/" + e->id;
    c.discovered_by_node = request.node;
    c.discovered_language = request.language;
    c.epoch = request.epoch;
    result.candidates.push_back(std::move(c));
  }
  result.visited_domains.assign(domains.begin(), domains.end());
  return result;
}

}  // namespace scout::sim
