#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scout/common.hpp"
#include "scout/core/asset.hpp"
#include "scout/core/stores.hpp"
#include "scout/tree/directive_tree.hpp"

namespace scout {

// Raised by backends. The orchestrator decides how to degrade.
class BackendError : public ScoutError {
 public:
  enum class Kind { kTimeout, kTransport, kMalformed, kBudget };

  BackendError(Kind kind, const std::string& what) : ScoutError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct InvestigatorRequest {
  std::string query;
  std::string directive;
  std::string instructions;
  Language language;
  std::vector<std::string> known_assets;
  std::vector<std::string> known_candidates;
  // Attribution for the candidates the backend returns.
  NodeId node = kRootNode;
  int epoch = 1;
};

struct InvestigatorResult {
  std::vector<Candidate> candidates;
  std::vector<std::string> executed_queries;
  std::vector<std::string> visited_domains;
};

struct Evidence {
  std::string url;
  std::string quote;

  friend bool operator==(const Evidence&, const Evidence&) = default;
};

struct CriterionVerdict {
  std::string criterion;
  bool pass = false;
  std::vector<Evidence> evidence;
};

struct MatchVerdict {
  bool is_match = false;
  // One entry per hard (top-level conjunctive) criterion.
  std::vector<CriterionVerdict> per_criterion;
  std::string failure_rationale;
  AssetRecord normalized_attributes;

  void check() const {
    if (is_match) {
      for (const auto& c : per_criterion) {
        if (!c.pass) throw InvariantViolation("match verdict with failing criterion " + c.criterion);
      }
      if (!failure_rationale.empty()) {
        throw InvariantViolation("match verdict carries a failure rationale");
      }
    } else if (failure_rationale.empty()) {
      throw InvariantViolation("non-match verdict without failure rationale");
    }
  }

  static MatchVerdict rejected(std::string rationale) {
    MatchVerdict v;
    v.failure_rationale = std::move(rationale);
    return v;
  }
};

struct CoachContext {
  std::string query;
  NodeId node = kRootNode;
  DirectiveSpec current;
  // Root-first directives on the path to the node (root's empty directive included).
  std::vector<DirectiveSpec> lineage;
  std::vector<std::string> known_assets;
  std::vector<std::string> known_candidates;
  std::vector<QueryLogEntry> queries;
  std::vector<DomainLogEntry> domains;
  std::string failure_summary;
  std::string investigator_prompt;
  int k = 3;
};

struct CoachOutput {
  std::vector<DirectiveSpec> children;
  std::string rationale;
};

// A group of validated items the deduplicator considers one asset.
struct DedupGroup {
  AssetRecord representative;
  std::vector<std::size_t> members;
  // Canonical name in the asset store this group resolves to, if any.
  std::optional<std::string> existing;
};

struct HeavyCheck {
  // Index into the `existing` span the item duplicates, if any.
  std::optional<std::size_t> duplicate_of;
  AssetRecord enriched;
};

class Investigator {
 public:
  virtual ~Investigator() = default;
  virtual InvestigatorResult investigate(const InvestigatorRequest& request) = 0;
};

class Validator {
 public:
  virtual ~Validator() = default;
  virtual MatchVerdict validate(const std::string& query, const Candidate& candidate) = 0;
};

// One call = one backend pass.
class DedupBackend {
 public:
  virtual ~DedupBackend() = default;
  virtual std::vector<DedupGroup> group_pass(std::span<const AssetRecord> items,
                                             const GlobalAssetStore& store) = 0;
  virtual HeavyCheck check_item(const AssetRecord& item,
                                std::span<const AssetRecord> existing) = 0;
};

class Coach {
 public:
  virtual ~Coach() = default;
  virtual CoachOutput expand(const CoachContext& context) = 0;
  virtual std::string summarize_failures(const std::vector<std::string>& rationales,
                                         std::size_t cap) = 0;
};

struct Backends {
  std::shared_ptr<Investigator> investigator;
  std::shared_ptr<Validator> validator;
  std::shared_ptr<DedupBackend> deduplicator;
  std::shared_ptr<Coach> coach;

  bool complete() const { return investigator && validator && deduplicator && coach; }
};

inline constexpr std::size_t kDefaultSummaryCap = 2000;

inline std::string truncate_utf8(std::string text, std::size_t cap) {
  if (text.size() <= cap) return text;
  std::size_t cut = cap;
  // Back off continuation bytes so a multi-byte character is not split.
  while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
  text.resize(cut);
  return text;
}

// Summary of validator failure rationales, never longer than `cap` bytes.
// Falls back to a truncated concatenation if the backend fails.
inline std::string summarize_failures(Coach& coach, const std::vector<std::string>& rationales,
                                      std::size_t cap = kDefaultSummaryCap) {
  if (rationales.empty()) return {};
  try {
    return truncate_utf8(coach.summarize_failures(rationales, cap), cap);
  } catch (const BackendError&) {
    std::string joined;
    for (const auto& r : rationales) {
      if (!joined.empty()) joined += "\n";
      joined += r;
      if (joined.size() > cap) break;
    }
    return truncate_utf8(std::move(joined), cap);
  }
}

}  // namespace scout
