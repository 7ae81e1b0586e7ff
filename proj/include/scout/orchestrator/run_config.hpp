#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scout/agents/dedup.hpp"
#include "scout/core/asset.hpp"
#include "scout/tree/directive_tree.hpp"

namespace scout {

enum class SearchStrategy {
  kTree,  // UCB selection, backpropagation, coach expansion per selected node
  kFlat,  // every epoch: k directives straight off the root, no UCB, no backprop
};

inline std::string_view to_string(SearchStrategy s) {
  return s == SearchStrategy::kFlat ? "flat" : "tree";
}

inline constexpr const char* kDefaultInvestigatorPrompt =
    "You are a biomedical asset scout. Find every drug development program that matches the "
    "user query. Search primarily in your assigned language, prefer primary regional sources, "
    "and return each program with a source URL.";

struct RunConfig {
  std::string query;
  int epochs = 10;
  int m = 1;
  int k = 3;
  std::vector<Language> languages{"en", "zh"};
  DedupMode dedup_mode = DedupMode::kLight;
  double c = kDefaultExploration;
  std::uint64_t seed = 0;
  SearchStrategy strategy = SearchStrategy::kTree;
  std::size_t dedup_batch_size = kDefaultDedupBatch;
  std::size_t failure_summary_cap = 2000;
  // Show unvalidated candidates to investigators and the coach.
  bool share_candidates = true;
  // Ceiling on investigator + validator calls per epoch; 0 = unlimited.
  std::size_t max_calls_per_epoch = 0;
  bool parallel = true;
  bool record_wall_clock = true;
  std::string investigator_prompt = kDefaultInvestigatorPrompt;

  void check() const {
    if (trim(query).empty()) throw ConfigError("query must not be empty");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (m < 1) throw ConfigError("m must be >= 1");
    if (k < 1) throw ConfigError("k must be >= 1");
    if (!(c > 0.0)) throw ConfigError("exploration constant c must be > 0");
    if (languages.empty()) throw ConfigError("at least one language is required");
    for (std::size_t i = 0; i < languages.size(); ++i) {
      if (languages[i].empty()) throw ConfigError("empty language code");
      for (std::size_t j = 0; j < i; ++j) {
        if (languages[i] == languages[j]) throw ConfigError("duplicate language " + languages[i]);
      }
    }
    if (dedup_batch_size == 0) throw ConfigError("dedup batch size must be positive");
  }
};

struct NodeReport {
  NodeId node = kRootNode;
  std::string directive;
  std::size_t candidate_count = 0;
  std::size_t validated_count = 0;
  double precision = 0.0;
  std::size_t new_unique_count = 0;
  double reward = 0.0;
};

struct CallCounts {
  std::size_t investigator = 0;
  std::size_t validator = 0;
  std::size_t dedup = 0;
  std::size_t coach = 0;
};

struct EpochReport {
  int epoch = 1;
  std::vector<NodeReport> nodes;
  std::size_t cumulative_asset_count = 0;
  std::size_t tree_size = 1;
  CallCounts calls;
  std::optional<double> wall_clock_ms;
  std::vector<std::string> warnings;

  std::vector<NodeId> selected_nodes() const {
    std::vector<NodeId> ids;
    for (const auto& n : nodes) ids.push_back(n.node);
    return ids;
  }

  Json to_json() const {
    Json nodes_json = Json::array();
    for (const auto& n : nodes) {
      nodes_json.push_back({{"node", n.node},
                            {"directive", n.directive},
                            {"candidates", n.candidate_count},
                            {"validated", n.validated_count},
                            {"precision", n.precision},
                            {"new_unique", n.new_unique_count},
                            {"reward", n.reward}});
    }
    Json j{{"schema", 1},
           {"kind", "epoch"},
           {"epoch", epoch},
           {"nodes", nodes_json},
           {"cumulative_assets", cumulative_asset_count},
           {"tree_size", tree_size},
           {"calls",
            {{"investigator", calls.investigator},
             {"validator", calls.validator},
             {"dedup", calls.dedup},
             {"coach", calls.coach}}},
           {"warnings", warnings}};
    if (wall_clock_ms) j["wall_clock_ms"] = *wall_clock_ms;
    return j;
  }
};

}  // namespace scout
