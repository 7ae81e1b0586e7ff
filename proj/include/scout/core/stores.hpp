#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "scout/core/asset.hpp"

namespace scout {

inline constexpr int kSchemaVersion = 1;

namespace detail {

// Gives a store a mutex without making the store itself non-copyable. Copies
// get a fresh mutex; copying a store while another thread appends is not
// supported.
class Guarded {
 protected:
  Guarded() = default;
  Guarded(const Guarded&) {}
  Guarded& operator=(const Guarded&) { return *this; }
  mutable std::mutex mutex_;
};

inline Json with_schema(const char* kind, Json body) {
  Json line{{"schema", kSchemaVersion}, {"kind", kind}};
  for (auto& [key, value] : body.items()) line[key] = value;
  return line;
}

}  // namespace detail

// Every candidate seen before validation, deduplicated by
// normalized raw name.
class CandidateStore : detail::Guarded {
 public:
  // Appends candidates whose normalized name has not been seen; returns the
  // number appended.
  std::size_t merge(std::span<const Candidate> incoming) {
    std::lock_guard lock(mutex_);
    std::size_t appended = 0;
    for (const auto& candidate : incoming) {
      if (candidate.raw_name.empty()) {
        throw InvariantViolation("candidate with empty raw name");
      }
      if (!entries_.empty() && candidate.epoch < entries_.back().candidate.epoch) {
        throw InvariantViolation("candidate epoch precedes stored discovery order");
      }
      auto key = normalize_name(candidate.raw_name);
      if (!seen_.insert(key).second) continue;
      entries_.push_back({candidate, next_index_++});
      ++appended;
    }
    return appended;
  }

  bool contains(std::string_view raw_name) const {
    std::lock_guard lock(mutex_);
    return seen_.contains(normalize_name(raw_name));
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
  }

  // Candidates in canonical (epoch, node, insertion) order.
  std::vector<Candidate> snapshot() const {
    std::lock_guard lock(mutex_);
    auto sorted = entries_;
    std::stable_sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) {
      return std::tie(a.candidate.epoch, a.candidate.discovered_by_node, a.index) <
             std::tie(b.candidate.epoch, b.candidate.discovered_by_node, b.index);
    });
    std::vector<Candidate> out;
    out.reserve(sorted.size());
    for (auto& e : sorted) out.push_back(std::move(e.candidate));
    return out;
  }

  std::vector<std::string> raw_names() const {
    std::vector<std::string> names;
    for (const auto& c : snapshot()) names.push_back(c.raw_name);
    return names;
  }

  void write_jsonl(std::ostream& out) const {
    for (const auto& c : snapshot()) {
      out << detail::with_schema("candidate", Json(c)).dump() << '\n';
    }
  }

 private:
  struct Entry {
    Candidate candidate;
    std::size_t index;
  };
  std::vector<Entry> entries_;
  std::unordered_set<std::string> seen_;
  std::size_t next_index_ = 0;
};

struct QueryLogEntry {
  std::string query_text;
  Language language;
  NodeId node = kRootNode;
  int epoch = 1;
};

struct DomainLogEntry {
  std::string domain;
  Language language;
  NodeId node = kRootNode;
  int epoch = 1;
};

// Q_global and D_global. Append-only.
class EvidenceLog : detail::Guarded {
 public:
  void append_query(QueryLogEntry entry) {
    std::lock_guard lock(mutex_);
    queries_.push_back({std::move(entry), queries_.size()});
  }

  void append_domain(DomainLogEntry entry) {
    std::lock_guard lock(mutex_);
    domains_.push_back({std::move(entry), domains_.size()});
  }

  std::size_t query_count() const {
    std::lock_guard lock(mutex_);
    return queries_.size();
  }

  std::size_t domain_count() const {
    std::lock_guard lock(mutex_);
    return domains_.size();
  }

  std::vector<QueryLogEntry> queries() const {
    std::lock_guard lock(mutex_);
    return ordered(queries_);
  }

  std::vector<DomainLogEntry> domains() const {
    std::lock_guard lock(mutex_);
    return ordered(domains_);
  }

  void write_jsonl(std::ostream& out) const {
    for (const auto& q : queries()) {
      out << detail::with_schema("query", Json{{"text", q.query_text},
                                               {"language", q.language},
                                               {"node", q.node},
                                               {"epoch", q.epoch}})
                 .dump()
          << '\n';
    }
    for (const auto& d : domains()) {
      out << detail::with_schema("domain", Json{{"domain", d.domain},
                                                {"language", d.language},
                                                {"node", d.node},
                                                {"epoch", d.epoch}})
                 .dump()
          << '\n';
    }
  }

 private:
  template <typename T>
  struct Slot {
    T entry;
    std::size_t index;
  };

  template <typename T>
  static std::vector<T> ordered(std::vector<Slot<T>> slots) {
    std::stable_sort(slots.begin(), slots.end(), [](const auto& a, const auto& b) {
      return std::tie(a.entry.epoch, a.entry.node, a.index) <
             std::tie(b.entry.epoch, b.entry.node, b.index);
    });
    std::vector<T> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(s.entry));
    return out;
  }

  std::vector<Slot<QueryLogEntry>> queries_;
  std::vector<Slot<DomainLogEntry>> domains_;
};

struct RegisterResult {
  enum class Kind { kInserted, kMergedInto };
  Kind kind;
  std::string canonical_name;

  bool inserted() const { return kind == Kind::kInserted; }
  friend bool operator==(const RegisterResult&, const RegisterResult&) = default;
};

// Validated, deduplicated assets keyed by canonical name, with an
// alias index over normalized alias forms.
class GlobalAssetStore : detail::Guarded {
 public:
  RegisterResult register_asset(const AssetRecord& record) {
    record.check();
    std::lock_guard lock(mutex_);
    std::set<std::string> hits;
    for (const auto& alias : record.aliases) {
      if (auto it = alias_index_.find(normalize_name(alias)); it != alias_index_.end()) {
        hits.insert(it->second);
      }
    }
    if (hits.size() > 1) {
      throw InvariantViolation("record '" + record.canonical_name +
                               "' bridges multiple existing assets: " +
                               join({hits.begin(), hits.end()}, ", "));
    }
    if (hits.empty()) {
      for (const auto& alias : record.aliases) {
        alias_index_.emplace(normalize_name(alias), record.canonical_name);
      }
      assets_.emplace(record.canonical_name, record);
      return {RegisterResult::Kind::kInserted, record.canonical_name};
    }
    const std::string& target = *hits.begin();
    AssetRecord& existing = assets_.at(target);
    for (const auto& alias : record.aliases) {
      if (existing.aliases.insert(alias).second) {
        alias_index_.emplace(normalize_name(alias), target);
      }
    }
    for (const auto& p : record.provenance) {
      if (std::find(existing.provenance.begin(), existing.provenance.end(), p) ==
          existing.provenance.end()) {
        existing.provenance.push_back(p);
      }
    }
    return {RegisterResult::Kind::kMergedInto, target};
  }

  // Canonical name an alias resolves to, if any.
  std::optional<std::string> resolve(std::string_view alias) const {
    std::lock_guard lock(mutex_);
    if (auto it = alias_index_.find(normalize_name(alias)); it != alias_index_.end()) {
      return it->second;
    }
    return std::nullopt;
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return assets_.size();
  }

  std::vector<AssetRecord> assets() const {
    std::lock_guard lock(mutex_);
    std::vector<AssetRecord> out;
    out.reserve(assets_.size());
    for (const auto& [_, record] : assets_) out.push_back(record);
    return out;
  }

  std::vector<std::string> canonical_names() const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [name, _] : assets_) out.push_back(name);
    return out;
  }

  // Verifies both store invariants; used by tests after arbitrary sequences.
  bool consistent() const {
    std::lock_guard lock(mutex_);
    for (const auto& [name, record] : assets_) {
      auto it = alias_index_.find(normalize_name(name));
      if (it == alias_index_.end() || it->second != name) return false;
      for (const auto& alias : record.aliases) {
        auto hit = alias_index_.find(normalize_name(alias));
        if (hit == alias_index_.end() || hit->second != name) return false;
      }
    }
    return true;
  }

  void write_jsonl(std::ostream& out) const {
    for (const auto& record : assets()) {
      out << detail::with_schema("asset", Json(record)).dump() << '\n';
    }
  }

 private:
  std::map<std::string, AssetRecord> assets_;
  std::map<std::string, std::string> alias_index_;
};

}  // namespace scout
