#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "scout/app/config.hpp"

namespace scout::app {

// A sim experiment: universe, query and loop shape.
struct Experiment {
  std::filesystem::path universe;
  std::string query;
  int epochs = 10;
  int m = 1;
  int k = 3;
  std::uint64_t seed = 0;
  std::vector<Language> languages{"en", "zh"};
  sim::InvestigateBudget budget;
};

inline std::filesystem::path resolve_relative(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return std::filesystem::weakly_canonical(path.is_absolute() ? path : base / path);
}

inline Experiment load_experiment(const std::filesystem::path& path) {
  const Json j = load_json_file(path);
  Experiment e;
  e.universe = resolve_relative(path.parent_path(), j.at("universe").get<std::string>());
  e.query = j.at("query").get<std::string>();
  e.epochs = j.value("epochs", e.epochs);
  e.m = j.value("m", e.m);
  e.k = j.value("k", e.k);
  e.seed = j.value("seed", e.seed);
  e.languages = j.value("languages", e.languages);
  e.budget.per_call = j.value("per_call", e.budget.per_call);
  e.budget.distractor_rate = j.value("distractor_rate", e.budget.distractor_rate);
  e.budget.search_depth = j.value("search_depth", e.budget.search_depth);
  return e;
}

// none: tree search over the experiment's languages.
// flat: no tree (k directives off the root each epoch), English only.
// lang-free: tree search, English only.
inline AppConfig ablation_config(const Experiment& exp, const std::string& ablation) {
  AppConfig cfg;
  cfg.run.query = exp.query;
  cfg.run.epochs = exp.epochs;
  cfg.run.m = exp.m;
  cfg.run.k = exp.k;
  cfg.run.seed = exp.seed;
  cfg.run.languages = exp.languages;
  cfg.run.record_wall_clock = false;
  cfg.sim.universe = exp.universe.string();
  cfg.sim.budget = exp.budget;
  if (ablation == "flat") {
    cfg.run.strategy = SearchStrategy::kFlat;
    cfg.run.languages = {"en"};
  } else if (ablation == "lang-free") {
    cfg.run.languages = {"en"};
  } else if (ablation != "none") {
    throw ConfigError("unknown ablation '" + ablation + "' (expected none, flat, lang-free)");
  }
  return cfg;
}

}  // namespace scout::app
