#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "scout/core/asset.hpp"
#include "scout/sim/universe.hpp"

namespace scout::testing {

inline AssetRecord record(const std::string& name, std::vector<std::string> aliases = {}) {
  AssetRecord r;
  r.canonical_name = name;
  r.aliases = {name};
  for (auto& a : aliases) r.aliases.insert(std::move(a));
  return r;
}

inline Candidate candidate(const std::string& name, int epoch = 1, NodeId node = kRootNode) {
  Candidate c;
  c.raw_name = name;
  c.source_url = "https://example.sim/" + compact_form(name);
  c.discovered_by_node = node;
  c.discovered_language = "en";
  c.epoch = epoch;
  return c;
}

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(SCOUT_FIXTURE_DIR) / name;
}

inline std::shared_ptr<const sim::Universe> u200() {
  static const auto universe = [] {
    std::ifstream in(fixture("u200.universe.jsonl"));
    return std::make_shared<const sim::Universe>(sim::Universe::load(in));
  }();
  return universe;
}

// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("scout-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace scout::testing
