#pragma once

#include <memory>
#include <string>

#include "scout/agents/chat.hpp"
#include "scout/eval/metrics.hpp"

namespace scout::eval {

// Grader backed by a chat model. Deterministic-preference decoding comes from
// the client config (low temperature, fixed seed).
class ChatGrader final : public Grader {
 public:
  explicit ChatGrader(std::shared_ptr<chat::ChatClient> client) : client_(std::move(client)) {}

  RecallVerdict grade_recall(const BenchmarkExample& example,
                             std::span<const std::string> predicted) override {
    chat::ChatRequest req;
    req.system =
        "Decide whether the ground-truth drug asset appears in a predicted list, resolving "
        "aliases such as development codes, brand names and transliterations. Reply with "
        "{\"verdict\": 0|1, \"matched\": str|null, \"evidence\": [{\"url\": str, \"quote\": str}]}.";
    req.user = "Ground truth: " + example.expected_asset + "\nPredicted:\n" +
               chat::bullet_list({predicted.begin(), predicted.end()});
    return client_->complete_json(req, "grader-recall", [&](const Json& j) {
      RecallVerdict v;
      v.example_id = example.id;
      v.verdict = j.at("verdict").get<int>();
      if (j.contains("matched") && j["matched"].is_string()) v.matched_predicted_name = j["matched"].get<std::string>();
      for (const auto& e : j.value("evidence", Json::array())) {
        v.alias_evidence.push_back({e.value("url", ""), e.value("quote", "")});
      }
      v.check();
      return v;
    });
  }

  PrecisionVerdict grade_precision(const std::string& query_id, const std::string& query,
                                   const std::string& predicted) override {
    chat::ChatRequest req;
    req.system =
        "Decompose the query into criteria, keep its AND/OR structure, and judge the asset on "
        "each. Reply with {\"dimensions\": [{\"dimension\": str, \"pass\": bool}], \"logic\": str "
        "using d0, d1, ... with AND/OR, \"is_match\": bool}.";
    req.user = "Query: " + query + "\nAsset: " + predicted;
    return client_->complete_json(req, "grader-precision", [&](const Json& j) {
      PrecisionVerdict v;
      v.query_id = query_id;
      v.predicted = predicted;
      for (const auto& d : j.at("dimensions")) {
        v.dimensions.push_back({d.at("dimension").get<std::string>(), d.at("pass").get<bool>()});
      }
      v.logic = j.value("logic", "");
      v.is_match = j.at("is_match").get<bool>();
      return v;
    });
  }

 private:
  std::shared_ptr<chat::ChatClient> client_;
};

}  // namespace scout::eval
