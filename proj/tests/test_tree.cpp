#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "scout/tree/directive_tree.hpp"

using namespace scout;

namespace {

// Frozen from tests/oracles/ucb_oracle.py (50-digit arithmetic).
constexpr double kUcb_3_2_1 = 1.5;
constexpr double kUcb_3_2_4 = 2.4990655333892373076;
constexpr double kUcb_4_2_4 = 2.9990655333892373076;
constexpr double kUcb_2_2_4 = 1.9990655333892373076;

std::vector<DirectiveSpec> specs(std::initializer_list<const char*> names) {
  std::vector<DirectiveSpec> out;
  for (const char* n : names) out.push_back({n, ""});
  return out;
}

}  // namespace

TEST(Ucb, UnvisitedIsInfinite) {
  EXPECT_EQ(ucb_score(0.0, 0, 10), std::numeric_limits<double>::infinity());
}

TEST(Ucb, WorkedExamplesMatchOracle) {
  EXPECT_NEAR(ucb_score(3.0, 2, 1), kUcb_3_2_1, 1e-9);
  EXPECT_NEAR(ucb_score(3.0, 2, 4), kUcb_3_2_4, 1e-9);
  EXPECT_NEAR(ucb_score(4.0, 2, 4), kUcb_4_2_4, 1e-9);
  EXPECT_NEAR(ucb_score(2.0, 2, 4), kUcb_2_2_4, 1e-9);
}

TEST(Ucb, ParentVisitsBelowOneClampToZeroBonus) {
  EXPECT_DOUBLE_EQ(ucb_score(3.0, 2, 0), 1.5);
}

TEST(Reward, PrecisionTimesNovelty) {
  EXPECT_DOUBLE_EQ(node_reward(rollout_precision(6, 10), 4), 2.4);
  EXPECT_DOUBLE_EQ(node_reward(rollout_precision(0, 0), 0), 0.0);
  EXPECT_DOUBLE_EQ(node_reward(1.0, 7), 7.0);
  EXPECT_THROW(node_reward(1.5, 1), InvariantViolation);
}

TEST(Tree, AttachAppendsInOrderWithZeroStats) {
  DirectiveTree t;
  const auto ids = t.attach_children(kRootNode, specs({"a", "b", "c"}), 1);
  ASSERT_EQ(ids.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(t.node(ids[i]).visits, 0u);
    EXPECT_EQ(t.node(ids[i]).cumulative_reward, 0.0);
    EXPECT_EQ(t.root().children[i], ids[i]);
  }
  EXPECT_EQ(t.leaves(), ids);
}

TEST(Tree, DuplicateSiblingRejectedAtomically) {
  DirectiveTree t;
  t.attach_children(kRootNode, specs({"a"}));
  EXPECT_THROW(t.attach_children(kRootNode, specs({"b", "a"})), DuplicateDirective);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_THROW(t.attach_children(kRootNode, specs({"c", "c"})), DuplicateDirective);
  EXPECT_EQ(t.size(), 2u);
}

TEST(Tree, BackpropagateUpdatesWholePath) {
  DirectiveTree t;
  const auto a = t.attach_children(kRootNode, specs({"a"})).front();
  const auto leaf = t.attach_children(a, specs({"a1"})).front();
  t.backpropagate(leaf, 2.0);
  EXPECT_EQ(t.node(leaf).visits, 1u);
  EXPECT_EQ(t.node(a).visits, 1u);
  EXPECT_EQ(t.root().visits, 1u);
  t.backpropagate(leaf, 1.0);
  t.backpropagate(leaf, 3.0);
  EXPECT_DOUBLE_EQ(t.root().cumulative_reward, 6.0);
  EXPECT_EQ(t.root().visits, 3u);
  EXPECT_THROW(t.backpropagate(leaf, -1.0), InvariantViolation);
}

TEST(Tree, SiblingBackpropsLeaveOthersUntouched) {
  DirectiveTree t;
  const auto kids = t.attach_children(kRootNode, specs({"a", "b", "c"}));
  const auto grand = t.attach_children(kids[2], specs({"c1"}));
  t.backpropagate(kids[0], 1.0);
  t.backpropagate(kids[1], 1.0);
  EXPECT_EQ(t.root().visits, 2u);
  EXPECT_EQ(t.node(kids[0]).visits, 1u);
  EXPECT_EQ(t.node(kids[1]).visits, 1u);
  EXPECT_EQ(t.node(kids[2]).visits, 0u);
  EXPECT_EQ(t.node(grand[0]).visits, 0u);
}

TEST(Selection, RootIsTheOnlyLeafInitially) {
  DirectiveTree t;
  EXPECT_EQ(t.select_leaves({}), std::vector<NodeId>{kRootNode});
}

TEST(Selection, UnvisitedChildPreferredAndEarliestFirst) {
  DirectiveTree t;
  const auto kids = t.attach_children(kRootNode, specs({"a", "b", "c"}));
  t.backpropagate(kids[0], 100.0);
  EXPECT_EQ(t.select_leaves({}).front(), kids[1]);
}

TEST(Selection, DescendsToMaxUcbLeaf) {
  DirectiveTree t;
  const auto kids = t.attach_children(kRootNode, specs({"a", "b"}));
  t.backpropagate(kids[0], 3.0);
  t.backpropagate(kids[0], 0.0);
  t.backpropagate(kids[1], 1.0);
  t.backpropagate(kids[1], 0.0);
  const auto grand = t.attach_children(kids[0], specs({"a1", "a2"}));
  EXPECT_EQ(t.select_leaves({}).front(), grand[0]);
}

TEST(Selection, MultipleLeavesAreDistinct) {
  DirectiveTree t;
  const auto kids = t.attach_children(kRootNode, specs({"a", "b", "c"}));
  for (auto k : kids) t.backpropagate(k, 1.0);
  const auto picked = t.select_leaves({3, 1.2});
  ASSERT_EQ(picked.size(), 3u);
  std::set<NodeId> unique(picked.begin(), picked.end());
  EXPECT_EQ(unique.size(), 3u);
  EXPECT_EQ(t.select_leaves({5, 1.2}).size(), 3u);
}

TEST(Selection, DeterministicForIdenticalState) {
  DirectiveTree t;
  const auto kids = t.attach_children(kRootNode, specs({"a", "b", "c"}));
  t.backpropagate(kids[1], 2.0);
  EXPECT_EQ(t.select_leaves({2, 1.2}), t.select_leaves({2, 1.2}));
}

// Exhaustive over N in 0..3, integer W in 0..3N for three children.
TEST(Selection, TieBreakPropertyExhaustive) {
  struct Child {
    std::uint64_t n;
    std::uint64_t w;
  };
  std::vector<Child> options;
  for (std::uint64_t n = 0; n <= 3; ++n) {
    for (std::uint64_t w = 0; w <= 3 * n; ++w) options.push_back({n, w});
  }
  std::size_t cases = 0;
  for (const auto& a : options) {
    for (const auto& b : options) {
      for (const auto& c : options) {
        DirectiveTree t;
        const auto kids = t.attach_children(kRootNode, specs({"a", "b", "c"}));
        const Child chosen[3] = {a, b, c};
        for (int i = 0; i < 3; ++i) {
          for (std::uint64_t v = 0; v < chosen[i].n; ++v) {
            t.backpropagate(kids[i], v == 0 ? static_cast<double>(chosen[i].w) : 0.0);
          }
        }
        const NodeId pick = t.select_leaves({}).front();
        const int s = static_cast<int>(pick - kids[0]);
        const std::uint64_t parent = t.root().visits;
        double best = -1;
        for (int i = 0; i < 3; ++i) {
          best = std::max(best, ucb_score(static_cast<double>(chosen[i].w), chosen[i].n, parent));
        }
        const double picked_ucb = ucb_score(static_cast<double>(chosen[s].w), chosen[s].n, parent);
        ASSERT_GE(picked_ucb, best - 1e-12);
        for (int i = 0; i < 3; ++i) {
          if (i == s || chosen[i].n != chosen[s].n) continue;
          ASSERT_GE(chosen[s].w, chosen[i].w);
          if (chosen[i].w == chosen[s].w) {
            ASSERT_LT(s, i);
          }
        }
        if (a.n == 0 || b.n == 0 || c.n == 0) {
          ASSERT_EQ(chosen[s].n, 0u);
        }
        ++cases;
      }
    }
  }
  EXPECT_GT(cases, 10000u);
}

TEST(Tree, RenderAndJsonl) {
  DirectiveTree t;
  const auto kids = t.attach_children(kRootNode, specs({"Focus on modality = sirna"}), 1);
  t.backpropagate(kids[0], 2.0);
  std::ostringstream text, lines;
  t.render(text);
  t.write_jsonl(lines);
  EXPECT_NE(text.str().find("  [1] Focus on modality = sirna"), std::string::npos);
  std::istringstream in(lines.str());
  std::string first, second;
  std::getline(in, first);
  std::getline(in, second);
  const auto node = nlohmann::json::parse(second);
  EXPECT_EQ(node.at("parent"), 0);
  EXPECT_EQ(node.at("visits"), 1);
  EXPECT_EQ(node.at("directive_digest"), DirectiveTree::digest("Focus on modality = sirna"));
}

// Random trees grown by random rollouts: root totals equal the rollout log
// and visits never increase from parent to child.
TEST(TreeProperty, BackpropagationConservesOnRandomTrees) {
  SeededRng rng(2024);
  int rollouts_total = 0;
  for (int trial = 0; trial < 50; ++trial) {
    DirectiveTree t;
    double reward_sum = 0.0;
    std::uint64_t rollouts = 0;
    const int steps = 20;
    for (int step = 0; step < steps; ++step) {
      const auto m = static_cast<int>(1 + rng.below(3));
      for (NodeId leaf : t.select_leaves({m, 1.2})) {
        const double r = static_cast<double>(rng.below(1000)) / 100.0;
        t.backpropagate(leaf, r);
        reward_sum += r;
        ++rollouts;
        if (rng.chance(0.6)) {
          std::vector<DirectiveSpec> kids;
          const auto k = 1 + rng.below(3);
          for (std::uint64_t i = 0; i < k; ++i) kids.push_back({"d" + std::to_string(t.size() + i), ""});
          t.attach_children(leaf, kids, step);
        }
      }
    }
    rollouts_total += static_cast<int>(rollouts);
    ASSERT_EQ(t.root().visits, rollouts);
    ASSERT_NEAR(t.root().cumulative_reward, reward_sum, 1e-9);
    for (const auto& n : t.nodes()) {
      std::uint64_t child_visits = 0;
      for (NodeId c : n.children) {
        ASSERT_GE(n.visits, t.node(c).visits);
        child_visits += t.node(c).visits;
      }
      ASSERT_LE(child_visits, n.visits);
    }
  }
  EXPECT_GE(rollouts_total, 1000);
}

TEST(RewardProperty, ProductOfPrecisionAndNovelty) {
  SeededRng rng(11);
  for (int i = 0; i < 10000; ++i) {
    const auto returned = static_cast<std::size_t>(rng.below(30));
    const auto valid = returned == 0 ? 0 : static_cast<std::size_t>(rng.below(returned + 1));
    const auto fresh = valid == 0 ? 0 : static_cast<std::size_t>(rng.below(valid + 1));
    const double p = rollout_precision(valid, returned);
    if (returned == 0) {
      ASSERT_EQ(p, 0.0);
    } else {
      ASSERT_DOUBLE_EQ(p, static_cast<double>(valid) / static_cast<double>(returned));
    }
    const double r = node_reward(p, fresh);
    ASSERT_DOUBLE_EQ(r, p * static_cast<double>(fresh));
    if (fresh == 0) {
      ASSERT_EQ(r, 0.0);
    }
    std::vector<int> delta(fresh);
    ASSERT_DOUBLE_EQ(node_reward(p, delta), r);
  }
}
