#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scout/agents/roles.hpp"
#include "scout/core/asset.hpp"

namespace scout::eval {

class EmptyBenchmark : public ScoutError {
 public:
  EmptyBenchmark() : ScoutError("recall over an empty benchmark is undefined") {}
};

class SubsetViolation : public ScoutError {
 public:
  using ScoutError::ScoutError;
};

struct RecallVerdict {
  std::string example_id;
  int verdict = 0;
  std::optional<std::string> matched_predicted_name;
  std::vector<Evidence> alias_evidence;

  void check() const {
    if (verdict != 0 && verdict != 1) throw InvariantViolation("recall verdict must be 0 or 1");
    if (verdict == 1 && !matched_predicted_name) {
      throw InvariantViolation("positive recall verdict without a matched prediction");
    }
  }
};

struct DimensionVerdict {
  std::string dimension;
  bool pass = false;
};

struct PrecisionVerdict {
  std::string query_id;
  std::string predicted;
  bool is_match = false;
  std::vector<DimensionVerdict> dimensions;
  // Logical structure joining the dimensions, e.g. "d0 AND (d1 OR d2)".
  std::string logic;
};

// Mean of binary verdicts.
inline double recall_score(std::span<const RecallVerdict> verdicts) {
  if (verdicts.empty()) throw EmptyBenchmark();
  std::size_t hits = 0;
  for (const auto& v : verdicts) {
    v.check();
    hits += static_cast<std::size_t>(v.verdict);
  }
  return static_cast<double>(hits) / static_cast<double>(verdicts.size());
}

using PredictedPair = std::pair<std::string, std::string>;  // (query id, predicted asset)

// |correct| / |all predicted|; absent when nothing was predicted.
inline std::optional<double> precision_score(const std::set<PredictedPair>& all_predicted,
                                             const std::set<PredictedPair>& correct) {
  for (const auto& pair : correct) {
    if (!all_predicted.contains(pair)) {
      throw SubsetViolation("correct pair (" + pair.first + ", " + pair.second +
                            ") is not among the predictions");
    }
  }
  if (all_predicted.empty()) return std::nullopt;
  return static_cast<double>(correct.size()) / static_cast<double>(all_predicted.size());
}

// Harmonic mean; 0 when both inputs are 0.
inline double f1(double precision, double recall) {
  if (!(precision >= 0.0 && precision <= 1.0 && recall >= 0.0 && recall <= 1.0)) {
    throw InvariantViolation("f1 inputs must lie in [0, 1]");
  }
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

// One query/ground-truth pair of a benchmark.
struct BenchmarkExample {
  std::string id;
  std::string query_id;
  std::string query;
  std::string expected_asset;
};

class Grader {
 public:
  virtual ~Grader() = default;
  virtual RecallVerdict grade_recall(const BenchmarkExample& example,
                                     std::span<const std::string> predicted) = 0;
  virtual PrecisionVerdict grade_precision(const std::string& query_id, const std::string& query,
                                           const std::string& predicted) = 0;
};

struct MetricsReport {
  std::vector<RecallVerdict> recall_verdicts;
  std::vector<PrecisionVerdict> precision_verdicts;
  std::optional<double> recall;
  std::optional<double> precision;
  std::optional<double> f1;
  // Examples / pairs the grader failed on; never silently scored.
  std::vector<std::string> excluded;
};

// Predicted asset names per query id.
using Predictions = std::map<std::string, std::vector<std::string>>;

inline MetricsReport evaluate_run(std::span<const BenchmarkExample> examples,
                                  const Predictions& predictions, Grader& grader) {
  MetricsReport report;
  std::map<std::string, std::string> query_text;
  static const std::vector<std::string> kNone;
  for (const auto& ex : examples) {
    query_text.emplace(ex.query_id, ex.query);
    auto it = predictions.find(ex.query_id);
    const auto& predicted = it == predictions.end() ? kNone : it->second;
    try {
      auto verdict = grader.grade_recall(ex, predicted);
      verdict.example_id = ex.id;
      verdict.check();
      report.recall_verdicts.push_back(std::move(verdict));
    } catch (const ScoutError& e) {
      report.excluded.push_back("recall " + ex.id + ": " + e.what());
    }
  }

  std::set<PredictedPair> all_pairs;
  std::set<PredictedPair> correct;
  for (const auto& [query_id, names] : predictions) {
    auto q = query_text.find(query_id);
    if (q == query_text.end()) continue;
    std::set<std::string> seen;
    for (const auto& name : names) {
      if (!seen.insert(normalize_name(name)).second) continue;
      try {
        auto verdict = grader.grade_precision(query_id, q->second, name);
        all_pairs.insert({query_id, name});
        if (verdict.is_match) correct.insert({query_id, name});
        report.precision_verdicts.push_back(std::move(verdict));
      } catch (const ScoutError& e) {
        report.excluded.push_back("precision " + query_id + "/" + name + ": " + e.what());
      }
    }
  }
  if (!report.recall_verdicts.empty()) report.recall = recall_score(report.recall_verdicts);
  report.precision = precision_score(all_pairs, correct);
  if (report.recall) report.f1 = f1(report.precision.value_or(0.0), *report.recall);
  return report;
}

// Quality-over-time: one row per checkpoint of the predicted list.
struct QualityPoint {
  double time = 0.0;  // wall-clock seconds or logical time (investigator calls)
  int epoch = 0;
  std::size_t predicted = 0;
  std::size_t correct = 0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

inline std::string fixed(std::optional<double> value, int digits = 6) {
  if (!value) return "NA";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, *value);
  return buf;
}

inline void write_quality_tsv(std::ostream& out, std::span<const QualityPoint> series) {
  out << "epoch\ttime\tpredicted\tcorrect\tprecision\trecall\tf1\n";
  for (const auto& p : series) {
    out << p.epoch << '\t' << fixed(p.time, 3) << '\t' << p.predicted << '\t' << p.correct << '\t'
        << fixed(p.precision) << '\t' << fixed(p.recall) << '\t' << fixed(p.f1) << '\n';
  }
}

inline Json to_json(const MetricsReport& report) {
  Json recall = Json::array();
  for (const auto& v : report.recall_verdicts) {
    recall.push_back({{"example", v.example_id},
                      {"verdict", v.verdict},
                      {"matched", v.matched_predicted_name ? Json(*v.matched_predicted_name)
                                                           : Json(nullptr)}});
  }
  Json precision = Json::array();
  for (const auto& v : report.precision_verdicts) {
    Json dims = Json::array();
    for (const auto& d : v.dimensions) dims.push_back({{"dimension", d.dimension}, {"pass", d.pass}});
    precision.push_back({{"query", v.query_id},
                         {"predicted", v.predicted},
                         {"match", v.is_match},
                         {"logic", v.logic},
                         {"dimensions", dims}});
  }
  auto opt = [](const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); };
  return Json{{"schema", 1},
              {"kind", "metrics"},
              {"recall", opt(report.recall)},
              {"precision", opt(report.precision)},
              {"f1", opt(report.f1)},
              {"excluded", report.excluded},
              {"recall_verdicts", recall},
              {"precision_verdicts", precision}};
}

inline void write_table(std::ostream& out, const MetricsReport& report) {
  out << "metric     value\n";
  out << "recall     " << fixed(report.recall, 4) << '\n';
  out << "precision  " << fixed(report.precision, 4) << '\n';
  out << "f1         " << fixed(report.f1, 4) << '\n';
  out << "examples   " << report.recall_verdicts.size() << '\n';
  out << "pairs      " << report.precision_verdicts.size() << '\n';
  out << "excluded   " << report.excluded.size() << '\n';
}

}  // namespace scout::eval
