#pragma once

#include <chrono>
#include <exception>
#include <functional>
#include <future>
#include <optional>
#include <set>
#include <type_traits>
#include <string>
#include <utility>
#include <vector>

#include "scout/agents/dedup.hpp"
#include "scout/agents/roles.hpp"
#include "scout/core/stores.hpp"
#include "scout/orchestrator/run_config.hpp"
#include "scout/tree/directive_tree.hpp"

namespace scout {

// A backend misbehaved in a way the loop cannot degrade around.
class BackendFailure : public ScoutError {
 public:
  BackendFailure(int epoch, NodeId node, const std::string& what)
      : ScoutError("epoch " + std::to_string(epoch) + ", node " + std::to_string(node) + ": " +
                   what),
        epoch_(epoch),
        node_(node) {}

  int epoch() const { return epoch_; }
  NodeId node() const { return node_; }

 private:
  int epoch_;
  NodeId node_;
};

struct RolloutResult {
  std::vector<Candidate> candidates;  // merged across languages, deduped by normalized name
  std::size_t investigator_calls = 0;
  std::size_t appended_to_store = 0;
  std::vector<std::string> warnings;
};

struct Evaluation {
  std::size_t candidate_count = 0;
  std::size_t validated_count = 0;
  double precision = 0.0;
  std::vector<AssetRecord> new_unique;       // assets new to the run
  std::vector<std::string> failure_rationales;  // rationales of rejected candidates
  double reward = 0.0;
  std::size_t validator_calls = 0;
  std::size_t dedup_passes = 0;
  std::vector<std::string> warnings;
};

struct ExpandResult {
  std::vector<NodeId> attached;
  std::size_t coach_calls = 0;
  std::vector<std::string> warnings;
};

struct RunResult {
  GlobalAssetStore assets;
  CandidateStore candidates;
  EvidenceLog evidence;
  DirectiveTree tree;
  std::vector<EpochReport> reports;
  // Set when the run stopped early; everything above holds the partial state.
  std::optional<BackendFailure> failure;
};

// Called after every epoch's Aggregate step (and after Expand).
using EpochObserver = std::function<void(const EpochReport&, const GlobalAssetStore&)>;

// Drives the epoch loop: Select, Rollout, Evaluate, Backpropagate,
// Aggregate, Expand. All store and tree mutation happens on the calling
// thread; only backend calls fan out.
class Orchestrator {
 public:
  Orchestrator(RunConfig config, Backends backends)
      : config_(std::move(config)), backends_(std::move(backends)) {
    config_.check();
    if (!backends_.complete()) throw ConfigError("all four agent roles need a backend");
  }

  const RunConfig& config() const { return config_; }
  const DirectiveTree& tree() const { return tree_; }
  DirectiveTree& tree() { return tree_; }
  const GlobalAssetStore& assets() const { return assets_; }
  const CandidateStore& candidates() const { return candidates_; }
  const EvidenceLog& evidence() const { return evidence_; }

  void set_observer(EpochObserver observer) { observer_ = std::move(observer); }

  RunResult run() {
    RunResult result;
    for (int epoch = 1; epoch <= config_.epochs; ++epoch) {
      try {
        result.reports.push_back(run_epoch(epoch));
      } catch (const BackendFailure& failure) {
        result.failure = failure;
        break;
      }
      if (observer_) observer_(result.reports.back(), assets_);
    }
    result.assets = assets_;
    result.candidates = candidates_;
    result.evidence = evidence_;
    result.tree = tree_;
    return result;
  }

  // Nodes rolled out this epoch.
  std::vector<NodeId> select(int epoch) {
    if (config_.strategy == SearchStrategy::kTree) {
      return tree_.select_leaves({config_.m, config_.c});
    }
    if (epoch == 1 || flat_selection_.empty()) return {kRootNode};
    return flat_selection_;
  }

  RolloutResult rollout(NodeId node, int epoch) {
    RolloutResult out;
    const auto& n = tree_.node(node);
    std::vector<InvestigatorRequest> requests;
    for (const auto& language : config_.languages) {
      InvestigatorRequest req;
      req.query = config_.query;
      req.directive = n.directive;
      req.instructions = n.instructions;
      req.language = language;
      req.known_assets = assets_.canonical_names();
      if (config_.share_candidates) req.known_candidates = candidates_.raw_names();
      req.node = node;
      req.epoch = epoch;
      if (!reserve_call()) {
        out.warnings.push_back("call budget exhausted; skipped " + language + " investigator");
        continue;
      }
      requests.push_back(std::move(req));
    }
    auto results = fan_out(requests, [this](const InvestigatorRequest& req) {
      return backends_.investigator->investigate(req);
    });
    out.investigator_calls = requests.size();
    std::set<std::string> seen;
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& req = requests[i];
      if (!results[i].ok()) {
        out.warnings.push_back(req.language + " investigator failed: " + results[i].error);
        continue;
      }
      const auto& r = *results[i].value;
      for (const auto& q : r.executed_queries) {
        evidence_.append_query({q, req.language, node, epoch});
      }
      for (const auto& d : r.visited_domains) {
        evidence_.append_domain({d, req.language, node, epoch});
      }
      for (auto c : r.candidates) {
        if (trim(c.raw_name).empty()) continue;
        c.discovered_by_node = node;
        c.discovered_language = req.language;
        c.epoch = epoch;
        if (seen.insert(normalize_name(c.raw_name)).second) out.candidates.push_back(std::move(c));
      }
    }
    out.appended_to_store = candidates_.merge(out.candidates);
    return out;
  }

  // Validates each candidate once, deduplicates the matches against the
  // current asset store snapshot and computes the node reward. Does not touch
  // the tree or the asset store.
  Evaluation evaluate(NodeId node, const std::vector<Candidate>& candidates, int epoch) {
    Evaluation ev;
    ev.candidate_count = candidates.size();
    std::vector<const Candidate*> to_check;
    std::vector<std::optional<MatchVerdict>> verdicts(candidates.size());
    std::vector<std::size_t> slots;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (reserve_call()) {
        to_check.push_back(&candidates[i]);
        slots.push_back(i);
      } else {
        verdicts[i] = MatchVerdict::rejected("budget-exhausted");
      }
    }
    auto results = fan_out(to_check, [this](const Candidate* c) {
      MatchVerdict v = backends_.validator->validate(config_.query, *c);
      v.check();
      return v;
    });
    ev.validator_calls = to_check.size();
    for (std::size_t j = 0; j < results.size(); ++j) {
      if (results[j].ok()) {
        verdicts[slots[j]] = std::move(*results[j].value);
      } else {
        verdicts[slots[j]] = MatchVerdict::rejected("validator-error");
        ev.warnings.push_back("validator failed on '" + to_check[j]->raw_name +
                              "': " + results[j].error);
      }
    }
    std::vector<AssetRecord> validated;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      auto& v = *verdicts[i];
      if (v.is_match) {
        AssetRecord record = v.normalized_attributes;
        if (!record.valid()) record = minimal_record(candidates[i]);
        validated.push_back(std::move(record));
      } else {
        ev.failure_rationales.push_back(candidates[i].raw_name + ": " + v.failure_rationale);
      }
    }
    ev.validated_count = validated.size();
    ev.precision = rollout_precision(ev.validated_count, ev.candidate_count);
    DedupOutcome dedup;
    try {
      dedup = deduplicate(config_.dedup_mode, validated, assets_, *backends_.deduplicator,
                          config_.dedup_batch_size);
    } catch (const BackendError&) {
      throw;
    } catch (const std::exception& e) {
      throw BackendFailure(epoch, node, std::string("deduplicator: ") + e.what());
    }
    ev.dedup_passes = dedup.passes;
    ev.warnings.insert(ev.warnings.end(), dedup.warnings.begin(), dedup.warnings.end());
    ev.new_unique = std::move(dedup.new_unique);
    ev.reward = node_reward(ev.precision, ev.new_unique.size());
    return ev;
  }

  ExpandResult expand(NodeId node, const Evaluation& ev, int epoch) {
    ExpandResult out;
    const auto& n = tree_.node(node);
    CoachContext ctx;
    ctx.query = config_.query;
    ctx.node = node;
    ctx.current = {n.directive, n.instructions};
    for (NodeId id : tree_.lineage(node)) {
      ctx.lineage.push_back({tree_.node(id).directive, tree_.node(id).instructions});
    }
    ctx.known_assets = assets_.canonical_names();
    if (config_.share_candidates) ctx.known_candidates = candidates_.raw_names();
    ctx.queries = evidence_.queries();
    ctx.domains = evidence_.domains();
    ctx.investigator_prompt = config_.investigator_prompt;
    ctx.k = config_.k;
    try {
      if (!ev.failure_rationales.empty()) ++out.coach_calls;
      ctx.failure_summary =
          summarize_failures(*backends_.coach, ev.failure_rationales, config_.failure_summary_cap);
    } catch (const std::exception& e) {
      throw BackendFailure(epoch, node, std::string("failure summarizer: ") + e.what());
    }

    std::optional<CoachOutput> output;
    for (int attempt = 0; attempt < 2 && !output; ++attempt) {
      ++out.coach_calls;
      try {
        output = backends_.coach->expand(ctx);
      } catch (const BackendError& e) {
        if (e.kind() != BackendError::Kind::kMalformed || attempt == 1) {
          out.warnings.push_back(std::string("coach expansion failed: ") + e.what());
          return out;
        }
      } catch (const std::exception& e) {
        throw BackendFailure(epoch, node, std::string("coach: ") + e.what());
      }
    }

    std::vector<DirectiveSpec> accepted;
    std::set<std::string> taken;
    for (NodeId child : n.children) taken.insert(tree_.node(child).directive);
    for (const auto& spec : output->children) {
      if (static_cast<int>(accepted.size()) == config_.k) break;
      if (trim(spec.directive).empty() || !taken.insert(spec.directive).second) continue;
      accepted.push_back(spec);
    }
    if (static_cast<int>(accepted.size()) < config_.k) {
      out.warnings.push_back("coach produced " + std::to_string(accepted.size()) + " of " +
                             std::to_string(config_.k) + " distinct directives for node " +
                             std::to_string(node));
    }
    if (!accepted.empty()) out.attached = tree_.attach_children(node, accepted, epoch);
    return out;
  }

  EpochReport run_epoch(int epoch) {
    const auto started = std::chrono::steady_clock::now();
    calls_used_ = 0;
    EpochReport report;
    report.epoch = epoch;

    if (config_.strategy == SearchStrategy::kFlat && epoch > 1) refresh_flat_directives(epoch, report);
    const std::vector<NodeId> selected = select(epoch);

    // Rollout.
    std::vector<RolloutResult> rollouts;
    for (NodeId node : selected) {
      rollouts.push_back(guarded(epoch, node, "investigator", [&] { return rollout(node, epoch); }));
      report.calls.investigator += rollouts.back().investigator_calls;
      append(report.warnings, rollouts.back().warnings);
    }

    // Evaluate: every selected node against the same asset store snapshot.
    std::vector<Evaluation> evaluations;
    for (std::size_t i = 0; i < selected.size(); ++i) {
      evaluations.push_back(guarded(epoch, selected[i], "validator",
                                    [&] { return evaluate(selected[i], rollouts[i].candidates, epoch); }));
      report.calls.validator += evaluations.back().validator_calls;
      report.calls.dedup += evaluations.back().dedup_passes;
      append(report.warnings, evaluations.back().warnings);
    }

    // Backpropagate.
    if (config_.strategy == SearchStrategy::kTree) {
      for (std::size_t i = 0; i < selected.size(); ++i) {
        tree_.backpropagate(selected[i], evaluations[i].reward);
      }
    }

    // Aggregate.
    for (std::size_t i = 0; i < selected.size(); ++i) {
      for (const auto& record : evaluations[i].new_unique) {
        try {
          assets_.register_asset(record);
        } catch (const InvariantViolation& e) {
          report.warnings.push_back(std::string("asset not registered: ") + e.what());
        }
      }
      NodeReport nr;
      nr.node = selected[i];
      nr.directive = tree_.node(selected[i]).directive;
      nr.candidate_count = evaluations[i].candidate_count;
      nr.validated_count = evaluations[i].validated_count;
      nr.precision = evaluations[i].precision;
      nr.new_unique_count = evaluations[i].new_unique.size();
      nr.reward = evaluations[i].reward;
      report.nodes.push_back(std::move(nr));
    }
    report.cumulative_asset_count = assets_.size();

    // Expand, except after the final epoch.
    if (config_.strategy == SearchStrategy::kTree && epoch < config_.epochs) {
      for (std::size_t i = 0; i < selected.size(); ++i) {
        auto ex = expand(selected[i], evaluations[i], epoch);
        report.calls.coach += ex.coach_calls;
        append(report.warnings, ex.warnings);
      }
    } else if (config_.strategy == SearchStrategy::kFlat && epoch == 1 && epoch < config_.epochs) {
      auto ex = expand(kRootNode, evaluations.front(), epoch);
      report.calls.coach += ex.coach_calls;
      append(report.warnings, ex.warnings);
    }
    report.tree_size = tree_.size();
    if (config_.record_wall_clock) {
      report.wall_clock_ms = std::chrono::duration<double, std::milli>(
                                 std::chrono::steady_clock::now() - started)
                                 .count();
    }
    return report;
  }

 private:
  template <typename T>
  struct Attempt {
    std::optional<T> value;
    std::string error;
    bool ok() const { return value.has_value(); }
  };

  // Runs fn over inputs, concurrently when configured. Results keep input
  // order. BackendErrors become per-item failures; anything else propagates.
  template <typename In, typename Fn, typename Out = std::invoke_result_t<Fn, const In&>>
  std::vector<Attempt<Out>> fan_out(const std::vector<In>& inputs, Fn fn) {
    auto attempt = [&fn](const In& input) {
      Attempt<Out> a;
      try {
        a.value = fn(input);
      } catch (const BackendError& e) {
        a.error = e.what();
      } catch (const InvariantViolation& e) {
        a.error = e.what();
      }
      return a;
    };
    std::vector<Attempt<Out>> out;
    out.reserve(inputs.size());
    if (!config_.parallel || inputs.size() <= 1) {
      for (const auto& input : inputs) out.push_back(attempt(input));
      return out;
    }
    std::vector<std::future<Attempt<Out>>> futures;
    futures.reserve(inputs.size());
    for (const auto& input : inputs) {
      futures.push_back(std::async(std::launch::async, attempt, std::cref(input)));
    }
    for (auto& f : futures) out.push_back(f.get());
    return out;
  }

  template <typename Fn>
  std::invoke_result_t<Fn&> guarded(int epoch, NodeId node, const char* role, Fn&& fn) {
    try {
      return fn();
    } catch (const BackendFailure&) {
      throw;
    } catch (const std::exception& e) {
      throw BackendFailure(epoch, node, std::string(role) + ": " + e.what());
    }
  }

  bool reserve_call() {
    if (config_.max_calls_per_epoch == 0) return true;
    if (calls_used_ >= config_.max_calls_per_epoch) return false;
    ++calls_used_;
    return true;
  }

  // Flat ablation: ask the coach for k directives off the root every epoch.
  // Directives seen before reuse their node so candidates stay attributable.
  void refresh_flat_directives(int epoch, EpochReport& report) {
    CoachContext ctx;
    ctx.query = config_.query;
    ctx.lineage.push_back({});
    ctx.known_assets = assets_.canonical_names();
    if (config_.share_candidates) ctx.known_candidates = candidates_.raw_names();
    ctx.queries = evidence_.queries();
    ctx.domains = evidence_.domains();
    ctx.investigator_prompt = config_.investigator_prompt;
    ctx.k = config_.k;
    ++report.calls.coach;
    CoachOutput output;
    try {
      output = backends_.coach->expand(ctx);
    } catch (const BackendError& e) {
      report.warnings.push_back(std::string("flat coach failed, reusing directives: ") + e.what());
      return;
    }
    std::vector<NodeId> chosen;
    std::vector<DirectiveSpec> fresh;
    std::set<std::string> taken;
    for (const auto& spec : output.children) {
      if (static_cast<int>(chosen.size() + fresh.size()) == config_.k) break;
      if (trim(spec.directive).empty() || !taken.insert(spec.directive).second) continue;
      std::optional<NodeId> existing;
      for (NodeId child : tree_.root().children) {
        if (tree_.node(child).directive == spec.directive) existing = child;
      }
      if (existing) {
        chosen.push_back(*existing);
      } else {
        fresh.push_back(spec);
      }
    }
    if (!fresh.empty()) {
      auto ids = tree_.attach_children(kRootNode, fresh, epoch);
      chosen.insert(chosen.end(), ids.begin(), ids.end());
    }
    if (!chosen.empty()) flat_selection_ = std::move(chosen);
  }

  static AssetRecord minimal_record(const Candidate& c) {
    AssetRecord r;
    r.canonical_name = trim(c.raw_name);
    r.aliases = {r.canonical_name};
    return r;
  }

  static void append(std::vector<std::string>& into, const std::vector<std::string>& from) {
    into.insert(into.end(), from.begin(), from.end());
  }

  RunConfig config_;
  Backends backends_;
  DirectiveTree tree_;
  GlobalAssetStore assets_;
  CandidateStore candidates_;
  EvidenceLog evidence_;
  EpochObserver observer_;
  std::size_t calls_used_ = 0;
  std::vector<NodeId> flat_selection_;
};

}  // namespace scout
