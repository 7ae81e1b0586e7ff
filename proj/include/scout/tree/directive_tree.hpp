#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "scout/common.hpp"

namespace scout {

inline constexpr double kDefaultExploration = 1.2;

struct SelectionBudget {
  int m = 1;
  double c = kDefaultExploration;

  void check() const {
    if (m < 1) throw ConfigError("selection budget m must be >= 1");
    if (!(c > 0.0)) throw ConfigError("exploration constant c must be > 0");
  }
};

// A (directive, instructions) pair proposed for a new child node.
struct DirectiveSpec {
  std::string directive;
  std::string instructions;

  friend bool operator==(const DirectiveSpec&, const DirectiveSpec&) = default;
};

struct DirectiveNode {
  NodeId id = kRootNode;
  std::string directive;
  std::string instructions;
  std::optional<NodeId> parent;
  std::vector<NodeId> children;
  std::uint64_t visits = 0;
  double cumulative_reward = 0.0;
  int created_epoch = 0;

  bool is_leaf() const { return children.empty(); }
  double mean_reward() const {
    return visits == 0 ? 0.0 : cumulative_reward / static_cast<double>(visits);
  }
};

// W/N + c * sqrt(ln(max(1, N_parent)) / N); +inf for a node never visited.
inline double ucb_score(double cumulative_reward, std::uint64_t visits,
                        std::uint64_t parent_visits, double c = kDefaultExploration) {
  if (visits == 0) return std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(visits);
  const double parent = static_cast<double>(parent_visits < 1 ? 1 : parent_visits);
  return cumulative_reward / n + c * std::sqrt(std::log(parent) / n);
}

inline double ucb_score(const DirectiveNode& node, std::uint64_t parent_visits,
                        double c = kDefaultExploration) {
  return ucb_score(node.cumulative_reward, node.visits, parent_visits, c);
}

// Fraction of returned candidates marked valid; zero when nothing came back.
inline double rollout_precision(std::size_t valid, std::size_t returned) {
  if (returned == 0) return 0.0;
  return static_cast<double>(valid) / static_cast<double>(returned);
}

// r = p * |new unique assets|.
inline double node_reward(double precision, std::size_t new_unique_count) {
  if (!(precision >= 0.0 && precision <= 1.0)) {
    throw InvariantViolation("precision outside [0, 1]");
  }
  return precision * static_cast<double>(new_unique_count);
}

template <typename Range>
  requires requires(const Range& r) { std::size(r); }
double node_reward(double precision, const Range& new_unique) {
  return node_reward(precision, static_cast<std::size_t>(std::size(new_unique)));
}

class DirectiveTree {
 public:
  DirectiveTree() {
    nodes_.push_back(DirectiveNode{});
  }

  std::size_t size() const { return nodes_.size(); }
  const DirectiveNode& node(NodeId id) const { return nodes_.at(id); }
  const DirectiveNode& root() const { return nodes_.front(); }
  const std::vector<DirectiveNode>& nodes() const { return nodes_; }

  std::vector<NodeId> leaves() const {
    std::vector<NodeId> out;
    for (const auto& n : nodes_) {
      if (n.is_leaf()) out.push_back(n.id);
    }
    return out;
  }

  // Root-first path ending at `id`.
  std::vector<NodeId> lineage(NodeId id) const {
    std::vector<NodeId> path;
    std::optional<NodeId> cursor = id;
    while (cursor) {
      path.push_back(*cursor);
      cursor = nodes_.at(*cursor).parent;
    }
    return {path.rbegin(), path.rend()};
  }

  std::size_t depth(NodeId id) const { return lineage(id).size() - 1; }

  // Appends children in the given order. Throws DuplicateDirective (and
  // attaches nothing) when a directive repeats a sibling's text.
  std::vector<NodeId> attach_children(NodeId parent, const std::vector<DirectiveSpec>& specs,
                                      int epoch = 0) {
    if (parent >= nodes_.size()) throw InvariantViolation("attach to unknown node");
    if (specs.empty()) throw InvariantViolation("attach_children needs at least one directive");
    std::vector<std::string> seen;
    for (NodeId child : nodes_[parent].children) seen.push_back(nodes_[child].directive);
    for (const auto& spec : specs) {
      for (const auto& existing : seen) {
        if (existing == spec.directive) {
          throw DuplicateDirective("directive already present among siblings: " +
                                   spec.directive);
        }
      }
      seen.push_back(spec.directive);
    }
    std::vector<NodeId> created;
    for (const auto& spec : specs) {
      DirectiveNode child;
      child.id = static_cast<NodeId>(nodes_.size());
      child.directive = spec.directive;
      child.instructions = spec.instructions;
      child.parent = parent;
      child.created_epoch = epoch;
      nodes_[parent].children.push_back(child.id);
      created.push_back(child.id);
      nodes_.push_back(std::move(child));
    }
    return created;
  }

  // N += 1 and W += reward for `id` and every ancestor.
  void backpropagate(NodeId id, double reward) {
    if (id >= nodes_.size()) throw InvariantViolation("backpropagate to unknown node");
    if (!(reward >= 0.0)) throw InvariantViolation("rewards must be non-negative");
    std::optional<NodeId> cursor = id;
    while (cursor) {
      auto& n = nodes_[*cursor];
      n.visits += 1;
      n.cumulative_reward += reward;
      cursor = n.parent;
    }
  }

  // Up to m distinct leaves. Each pick is a top-down max-UCB descent; after a
  // pick the chosen path carries one virtual visit so later descents spread
  // out, and exhausted subtrees are skipped. With m = 1 this is exactly one
  // plain descent.
  std::vector<NodeId> select_leaves(const SelectionBudget& budget) const {
    budget.check();
    std::vector<std::uint64_t> virtual_visits(nodes_.size(), 0);
    std::vector<bool> taken(nodes_.size(), false);
    std::vector<NodeId> picked;
    while (static_cast<int>(picked.size()) < budget.m && has_free_leaf(kRootNode, taken)) {
      NodeId cursor = kRootNode;
      while (!nodes_[cursor].is_leaf()) {
        cursor = best_child(cursor, budget.c, virtual_visits, taken);
      }
      taken[cursor] = true;
      picked.push_back(cursor);
      for (NodeId id : lineage(cursor)) virtual_visits[id] += 1;
    }
    return picked;
  }

  // Indented rendering, one node per line.
  void render(std::ostream& out) const { render_node(out, kRootNode, 0); }

  void write_jsonl(std::ostream& out) const {
    for (const auto& n : nodes_) {
      nlohmann::ordered_json line{{"schema", 1},
                                  {"kind", "node"},
                                  {"id", n.id},
                                  {"parent", n.parent ? nlohmann::ordered_json(*n.parent)
                                                      : nlohmann::ordered_json(nullptr)},
                                  {"visits", n.visits},
                                  {"reward", n.cumulative_reward},
                                  {"created_epoch", n.created_epoch},
                                  {"directive_digest", digest(n.directive)}};
      out << line.dump() << '\n';
    }
  }

  static std::string digest(const std::string& text) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(text)));
    return buf;
  }

 private:
  bool has_free_leaf(NodeId id, const std::vector<bool>& taken) const {
    const auto& n = nodes_[id];
    if (n.is_leaf()) return !taken[id];
    for (NodeId child : n.children) {
      if (has_free_leaf(child, taken)) return true;
    }
    return false;
  }

  NodeId best_child(NodeId parent, double c, const std::vector<std::uint64_t>& virtual_visits,
                    const std::vector<bool>& taken) const {
    const auto& p = nodes_[parent];
    const std::uint64_t parent_visits = p.visits + virtual_visits[parent];
    std::optional<NodeId> best;
    double best_ucb = 0.0;
    std::uint64_t best_n = 0;
    double best_mean = 0.0;
    for (NodeId id : p.children) {
      if (!has_free_leaf(id, taken)) continue;
      const auto& child = nodes_[id];
      const std::uint64_t n = child.visits + virtual_visits[id];
      const double mean = n == 0 ? 0.0 : child.cumulative_reward / static_cast<double>(n);
      const double ucb = ucb_score(child.cumulative_reward, n, parent_visits, c);
      if (!best) {
        best = id;
        best_ucb = ucb;
        best_n = n;
        best_mean = mean;
        continue;
      }
      bool better = false;
      if (n == best_n) {
        // Equal visit counts share the exploration term, so rank by mean.
        better = mean > best_mean;
      } else {
        better = ucb > best_ucb;
      }
      if (better) {
        best = id;
        best_ucb = ucb;
        best_n = n;
        best_mean = mean;
      }
    }
    return *best;
  }

  void render_node(std::ostream& out, NodeId id, int indent) const {
    const auto& n = nodes_[id];
    char stats[64];
    std::snprintf(stats, sizeof stats, "N=%llu W=%.4f",
                  static_cast<unsigned long long>(n.visits), n.cumulative_reward);
    out << std::string(static_cast<std::size_t>(indent) * 2, ' ') << '[' << n.id << "] "
        << (n.directive.empty() ? std::string("(root)") : n.directive) << "  " << stats << '\n';
    for (NodeId child : n.children) render_node(out, child, indent + 1);
  }

  std::vector<DirectiveNode> nodes_;
};

}  // namespace scout
