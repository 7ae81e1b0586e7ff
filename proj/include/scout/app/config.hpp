#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "scout/agents/chat.hpp"
#include "scout/orchestrator/run_config.hpp"
#include "scout/sim/investigate.hpp"

// Experiment definition file. JSON object; every key optional; unknown keys
// are errors. Resolution order: command-line flags, then this file, then
// built-in defaults.
//
//   query, epochs, m, k, languages, dedup ("light"|"heavy"), c, seed,
//   strategy ("tree"|"flat"), dedup_batch_size, failure_summary_cap,
//   share_candidates, max_calls_per_epoch, parallel, record_wall_clock,
//   investigator_prompt, backend ("scripted"|"chat"),
//   sim:  { universe, per_call, distractor_rate, search_depth }
//   chat: { base_url, model, api_key_env, timeout_seconds, max_concurrent,
//           temperature }
namespace scout::app {

struct SimOptions {
  std::string universe;  // path to a universe JSONL file
  sim::InvestigateBudget budget;
};

struct AppConfig {
  RunConfig run;
  std::string backend = "scripted";
  SimOptions sim;
  chat::ChatConfig chat;

  void check() const {
    run.check();
    if (backend != "scripted" && backend != "chat") {
      throw ConfigError("backend must be 'scripted' or 'chat', got '" + backend + "'");
    }
    if (backend == "scripted" && sim.universe.empty()) {
      throw ConfigError("scripted backend needs sim.universe");
    }
    if (!(sim.budget.distractor_rate >= 0.0 && sim.budget.distractor_rate <= 1.0)) {
      throw ConfigError("sim.distractor_rate must be in [0, 1]");
    }
    if (sim.budget.per_call == 0) throw ConfigError("sim.per_call must be positive");
    if (backend == "chat") chat.check();
  }
};

namespace detail {

inline void reject_unknown(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown config key '" + where + key + "'");
  }
}

template <typename T>
void read(const Json& obj, const char* key, T& into) {
  if (!obj.contains(key)) return;
  try {
    into = obj.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace detail

inline void apply_json(AppConfig& cfg, const Json& j) {
  detail::reject_unknown(j,
                         {"query", "epochs", "m", "k", "languages", "dedup", "c", "seed", "strategy",
                          "dedup_batch_size", "failure_summary_cap", "share_candidates",
                          "max_calls_per_epoch", "parallel", "record_wall_clock",
                          "investigator_prompt", "backend", "sim", "chat"},
                         "");
  auto& r = cfg.run;
  detail::read(j, "query", r.query);
  detail::read(j, "epochs", r.epochs);
  detail::read(j, "m", r.m);
  detail::read(j, "k", r.k);
  detail::read(j, "languages", r.languages);
  if (j.contains("dedup")) r.dedup_mode = parse_dedup_mode(j.at("dedup").get<std::string>());
  detail::read(j, "c", r.c);
  detail::read(j, "seed", r.seed);
  if (j.contains("strategy")) {
    const auto s = j.at("strategy").get<std::string>();
    if (s != "tree" && s != "flat") throw ConfigError("strategy must be 'tree' or 'flat'");
    r.strategy = s == "flat" ? SearchStrategy::kFlat : SearchStrategy::kTree;
  }
  detail::read(j, "dedup_batch_size", r.dedup_batch_size);
  detail::read(j, "failure_summary_cap", r.failure_summary_cap);
  detail::read(j, "share_candidates", r.share_candidates);
  detail::read(j, "max_calls_per_epoch", r.max_calls_per_epoch);
  detail::read(j, "parallel", r.parallel);
  detail::read(j, "record_wall_clock", r.record_wall_clock);
  detail::read(j, "investigator_prompt", r.investigator_prompt);
  detail::read(j, "backend", cfg.backend);
  if (j.contains("sim")) {
    const auto& s = j.at("sim");
    detail::reject_unknown(s, {"universe", "per_call", "distractor_rate", "search_depth"}, "sim.");
    detail::read(s, "universe", cfg.sim.universe);
    detail::read(s, "per_call", cfg.sim.budget.per_call);
    detail::read(s, "distractor_rate", cfg.sim.budget.distractor_rate);
    detail::read(s, "search_depth", cfg.sim.budget.search_depth);
  }
  if (j.contains("chat")) {
    const auto& c = j.at("chat");
    detail::reject_unknown(c, {"base_url", "model", "api_key_env", "timeout_seconds", "max_concurrent", "temperature"},
                           "chat.");
    detail::read(c, "base_url", cfg.chat.base_url);
    detail::read(c, "model", cfg.chat.model);
    detail::read(c, "api_key_env", cfg.chat.api_key_env);
    detail::read(c, "timeout_seconds", cfg.chat.timeout_seconds);
    detail::read(c, "max_concurrent", cfg.chat.max_concurrent);
    detail::read(c, "temperature", cfg.chat.temperature);
  }
}

inline Json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// Snapshot sufficient to replay a scripted run. Holds no credentials.
inline Json to_json(const AppConfig& cfg) {
  const auto& r = cfg.run;
  return Json{{"query", r.query},
              {"epochs", r.epochs},
              {"m", r.m},
              {"k", r.k},
              {"languages", r.languages},
              {"dedup", std::string(to_string(r.dedup_mode))},
              {"c", r.c},
              {"seed", r.seed},
              {"strategy", std::string(to_string(r.strategy))},
              {"dedup_batch_size", r.dedup_batch_size},
              {"failure_summary_cap", r.failure_summary_cap},
              {"share_candidates", r.share_candidates},
              {"max_calls_per_epoch", r.max_calls_per_epoch},
              {"parallel", r.parallel},
              {"record_wall_clock", r.record_wall_clock},
              {"investigator_prompt", r.investigator_prompt},
              {"backend", cfg.backend},
              {"sim",
               {{"universe", cfg.sim.universe},
                {"per_call", cfg.sim.budget.per_call},
                {"distractor_rate", cfg.sim.budget.distractor_rate},
                {"search_depth", cfg.sim.budget.search_depth}}},
              {"chat",
               {{"base_url", cfg.chat.base_url},
                {"model", cfg.chat.model},
                {"api_key_env", cfg.chat.api_key_env},
                {"timeout_seconds", cfg.chat.timeout_seconds},
                {"max_concurrent", cfg.chat.max_concurrent},
                {"temperature", cfg.chat.temperature}}}};
}

}  // namespace scout::app
