#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scout/agents/roles.hpp"

namespace scout {

enum class DedupMode { kLight, kHeavy };

inline std::string_view to_string(DedupMode mode) {
  return mode == DedupMode::kHeavy ? "heavy" : "light";
}

inline DedupMode parse_dedup_mode(std::string_view text) {
  if (text == "light") return DedupMode::kLight;
  if (text == "heavy") return DedupMode::kHeavy;
  throw ConfigError("dedup mode must be 'light' or 'heavy', got '" + std::string(text) + "'");
}

inline constexpr std::size_t kDefaultDedupBatch = 50;

struct DedupOutcome {
  // Validated assets not yet in the store, one per distinct asset.
  std::vector<AssetRecord> new_unique;
  std::size_t passes = 0;
  std::vector<std::string> warnings;

  std::vector<std::string> canonical_names() const {
    std::vector<std::string> names;
    for (const auto& a : new_unique) names.push_back(a.canonical_name);
    std::sort(names.begin(), names.end());
    return names;
  }
};

// Number of backend passes light mode makes for n items.
constexpr std::size_t light_pass_count(std::size_t items, std::size_t batch_size) {
  if (items == 0) return 0;
  if (items <= batch_size) return 1;
  return (items + batch_size - 1) / batch_size + 1;
}

namespace detail {

inline void absorb(AssetRecord& into, const AssetRecord& from) {
  into.aliases.insert(from.aliases.begin(), from.aliases.end());
  for (const auto& p : from.provenance) {
    if (std::find(into.provenance.begin(), into.provenance.end(), p) == into.provenance.end()) {
      into.provenance.push_back(p);
    }
  }
}

inline std::vector<AssetRecord> fresh_representatives(const std::vector<DedupGroup>& groups) {
  std::vector<AssetRecord> out;
  for (const auto& g : groups) {
    if (!g.existing) out.push_back(g.representative);
  }
  return out;
}

}  // namespace detail

// Batched mode: split into fixed-size batches, one pass per batch, then one
// final pass over the merged representatives. A single batch needs one pass.
// A failed pass lets its items through undeduplicated.
inline DedupOutcome deduplicate_light(std::span<const AssetRecord> items,
                                      const GlobalAssetStore& store, DedupBackend& backend,
                                      std::size_t batch_size = kDefaultDedupBatch) {
  DedupOutcome outcome;
  if (items.empty()) return outcome;
  if (batch_size == 0) throw ConfigError("dedup batch size must be positive");

  auto run_pass = [&](std::span<const AssetRecord> batch) -> std::vector<AssetRecord> {
    ++outcome.passes;
    try {
      return detail::fresh_representatives(backend.group_pass(batch, store));
    } catch (const BackendError& e) {
      outcome.warnings.push_back(std::string("dedup pass failed, items passed through: ") +
                                 e.what());
      return {batch.begin(), batch.end()};
    }
  };

  if (items.size() <= batch_size) {
    outcome.new_unique = run_pass(items);
    return outcome;
  }
  std::vector<AssetRecord> merged;
  for (std::size_t start = 0; start < items.size(); start += batch_size) {
    const std::size_t len = std::min(batch_size, items.size() - start);
    auto reps = run_pass(items.subspan(start, len));
    merged.insert(merged.end(), reps.begin(), reps.end());
  }
  outcome.new_unique = run_pass(merged);
  return outcome;
}

// Per-item mode: each item is checked in its own pass against everything
// already known (store plus items accepted earlier in this call).
inline DedupOutcome deduplicate_heavy(std::span<const AssetRecord> items,
                                      const GlobalAssetStore& store, DedupBackend& backend) {
  DedupOutcome outcome;
  if (items.empty()) return outcome;
  const std::vector<AssetRecord> stored = store.assets();
  for (const auto& item : items) {
    std::vector<AssetRecord> known = stored;
    known.insert(known.end(), outcome.new_unique.begin(), outcome.new_unique.end());
    ++outcome.passes;
    try {
      HeavyCheck check = backend.check_item(item, known);
      if (!check.duplicate_of) {
        outcome.new_unique.push_back(std::move(check.enriched));
      } else if (*check.duplicate_of >= stored.size()) {
        detail::absorb(outcome.new_unique.at(*check.duplicate_of - stored.size()),
                       check.enriched);
      }
    } catch (const BackendError& e) {
      outcome.warnings.push_back("dedup check failed for '" + item.canonical_name +
                                 "', passed through: " + e.what());
      outcome.new_unique.push_back(item);
    }
  }
  return outcome;
}

inline DedupOutcome deduplicate(DedupMode mode, std::span<const AssetRecord> items,
                                const GlobalAssetStore& store, DedupBackend& backend,
                                std::size_t batch_size = kDefaultDedupBatch) {
  return mode == DedupMode::kHeavy ? deduplicate_heavy(items, store, backend)
                                   : deduplicate_light(items, store, backend, batch_size);
}

}  // namespace scout
