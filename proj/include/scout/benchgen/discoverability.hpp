#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "scout/core/asset.hpp"
#include "scout/sim/universe.hpp"

namespace scout::benchgen {

struct DiscoverabilityProfile {
  std::int64_t english_pages = 0;
  std::int64_t local_pages = 0;

  void check() const {
    if (english_pages < 0 || local_pages < 0) {
      throw InvariantViolation("page counts must be non-negative");
    }
  }
};

inline constexpr std::int64_t kMaxEnglishPages = 9;

// Thin English footprint, nonzero local coverage.
inline bool under_radar_filter(const DiscoverabilityProfile& p) {
  p.check();
  return p.english_pages <= kMaxEnglishPages && p.local_pages > 0;
}

// Result-page counts for one search query.
class SerpBackend {
 public:
  virtual ~SerpBackend() = default;
  virtual std::int64_t page_count(const std::string& query, const Language& language) = 0;
};

inline constexpr std::size_t kDefaultProbesPerLanguage = 3;

// Probe queries: canonical name alone, with developer, with indication.
inline std::vector<std::string> probe_queries(const AssetRecord& asset, std::size_t count) {
  std::vector<std::string> out;
  std::vector<std::string> names{asset.canonical_name};
  for (const auto& a : asset.aliases) {
    if (a != asset.canonical_name) names.push_back(a);
  }
  const std::string developer = asset.developers.empty() ? "" : " " + asset.developers.front();
  const std::string indication = asset.indications.empty() ? "" : " " + asset.indications.front();
  for (std::size_t i = 0; out.size() < count && i < 3 * names.size(); ++i) {
    const std::string& name = names[i % names.size()];
    switch (i / names.size()) {
      case 0: out.push_back(name); break;
      case 1: out.push_back(name + developer); break;
      default: out.push_back(name + indication); break;
    }
  }
  return out;
}

// Max page count over the probe set, per language.
inline DiscoverabilityProfile profile_asset(const AssetRecord& asset, const Language& local_language,
                                            SerpBackend& serp,
                                            std::size_t probes = kDefaultProbesPerLanguage) {
  DiscoverabilityProfile p;
  for (const auto& q : probe_queries(asset, probes)) {
    p.english_pages = std::max(p.english_pages, serp.page_count(q, "en"));
    if (local_language != "en") {
      p.local_pages = std::max(p.local_pages, serp.page_count(q, local_language));
    }
  }
  if (local_language == "en") p.local_pages = p.english_pages;
  p.check();
  return p;
}

// Sim SERP: pages scale with the entity's visibility in that language.
class SimSerp final : public SerpBackend {
 public:
  explicit SimSerp(std::shared_ptr<const sim::Universe> universe, double pages_per_unit = 20.0)
      : universe_(std::move(universe)), scale_(pages_per_unit) {}

  std::int64_t page_count(const std::string& query, const Language& language) override {
    // Probe queries start with a name; match the longest resolvable prefix.
    const auto words = split(query, ' ');
    for (std::size_t n = words.size(); n > 0; --n) {
      std::vector<std::string> head(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(n));
      if (const auto* e = universe_->resolve(join(head, " "))) {
        auto it = e->visibility.find(language);
        const double w = it == e->visibility.end() ? 0.0 : it->second;
        return static_cast<std::int64_t>(std::floor(w * scale_));
      }
    }
    return 0;
  }

 private:
  std::shared_ptr<const sim::Universe> universe_;
  double scale_;
};

// Applies the filter to a deterministic fraction of the assets; the rest pass.
template <typename ProfileFn>
std::vector<AssetRecord> filter_under_radar(const std::vector<AssetRecord>& assets,
                                            ProfileFn&& profile_of, double fraction,
                                            std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("filter fraction must be in [0, 1]");
  const auto subject = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(assets.size())));
  std::vector<std::size_t> order(assets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ka = mix_seed(seed, assets[a].canonical_name);
    const auto kb = mix_seed(seed, assets[b].canonical_name);
    return ka != kb ? ka < kb : a < b;
  });
  std::vector<bool> tested(assets.size(), false);
  for (std::size_t i = 0; i < subject; ++i) tested[order[i]] = true;
  std::vector<AssetRecord> out;
  for (std::size_t i = 0; i < assets.size(); ++i) {
    if (!tested[i] || under_radar_filter(profile_of(assets[i]))) out.push_back(assets[i]);
  }
  return out;
}

}  // namespace scout::benchgen
