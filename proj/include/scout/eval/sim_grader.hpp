#pragma once

#include <memory>
#include <string>
#include <vector>

#include "scout/eval/metrics.hpp"
#include "scout/sim/universe.hpp"

namespace scout::eval {

// Oracle grader over the simulated world: recall is entity equality after
// alias resolution, precision is the query predicate on the resolved entity.
class OracleGrader final : public Grader {
 public:
  explicit OracleGrader(std::shared_ptr<const sim::Universe> universe)
      : universe_(std::move(universe)) {}

  RecallVerdict grade_recall(const BenchmarkExample& example,
                             std::span<const std::string> predicted) override {
    const auto* truth = universe_->resolve(example.expected_asset);
    if (truth == nullptr) {
      throw ScoutError("ground-truth asset '" + example.expected_asset + "' is not in the universe");
    }
    RecallVerdict v;
    v.example_id = example.id;
    for (const auto& name : predicted) {
      if (universe_->resolve(name) == truth) {
        v.verdict = 1;
        v.matched_predicted_name = name;
        v.alias_evidence.push_back({"https://registry.sim/" + truth->id,
                                    "aliases: " + name + " = " + truth->canonical()});
        break;
      }
    }
    return v;
  }

  PrecisionVerdict grade_precision(const std::string& query_id, const std::string& query,
                                   const std::string& predicted) override {
    PrecisionVerdict v;
    v.query_id = query_id;
    v.predicted = predicted;
    const auto* e = universe_->resolve(predicted);
    if (e == nullptr) {
      v.dimensions.push_back({"entity resolves to a drug program", false});
      v.logic = "d0";
      return v;
    }
    const auto predicate = sim::parse_predicate(query);
    const auto lookup = e->lookup();
    std::vector<std::string> names;
    for (const auto& part : predicate.conjuncts()) {
      names.push_back("d" + std::to_string(v.dimensions.size()));
      v.dimensions.push_back({part.to_string(), part.eval(lookup)});
    }
    v.logic = join(names, " AND ");
    v.is_match = predicate.eval(lookup);
    return v;
  }

 private:
  std::shared_ptr<const sim::Universe> universe_;
};

// One benchmark example per ground-truth entity of a sim query.
inline std::vector<BenchmarkExample> sim_examples(const sim::Universe& universe,
                                                  const std::string& query_id,
                                                  const std::string& query) {
  std::vector<BenchmarkExample> out;
  for (const auto* e : universe.oracle_answer(sim::parse_predicate(query))) {
    out.push_back({query_id + ":" + e->id, query_id, query, e->canonical()});
  }
  return out;
}

inline QualityPoint quality_point(const MetricsReport& report, int epoch, double time) {
  QualityPoint p;
  p.epoch = epoch;
  p.time = time;
  p.predicted = report.precision_verdicts.size();
  for (const auto& v : report.precision_verdicts) p.correct += v.is_match ? 1 : 0;
  p.precision = report.precision;
  p.recall = report.recall;
  p.f1 = report.f1;
  return p;
}

}  // namespace scout::eval
