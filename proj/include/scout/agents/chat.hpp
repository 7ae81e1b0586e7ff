#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "scout/agents/roles.hpp"

namespace scout::chat {

inline constexpr const char* kDefaultKeyVariable = "SCOUT_API_KEY";

struct ChatConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model;
  std::string api_key_env = kDefaultKeyVariable;
  // Per-call transcripts land here; empty disables them.
  std::filesystem::path transcript_dir;
  int timeout_seconds = 300;
  std::size_t max_concurrent = 4;
  // Retries after HTTP 429 / 5xx, with linear backoff.
  int max_rate_retries = 5;
  int backoff_ms = 1000;
  double temperature = 0.2;
  std::uint64_t seed = 0;

  void check() const {
    if (base_url.empty()) throw ConfigError("chat backend needs a base URL");
    if (model.empty()) throw ConfigError("chat backend needs a model name");
    if (max_concurrent == 0) throw ConfigError("max_concurrent must be positive");
  }
};

// Reads the credential from the environment. Never stored anywhere else.
inline std::string api_key(const ChatConfig& config) {
  const char* value = std::getenv(config.api_key_env.c_str());
  if (value == nullptr || *value == '\0') {
    throw ConfigError("missing credentials: set " + config.api_key_env +
                      " to use the chat backend");
  }
  return value;
}

struct ChatMessage {
  std::string role;  // system | user | assistant | tool
  std::string content;
};

struct ChatRequest {
  std::string system;
  std::string user;
  // Earlier turns, e.g. tool-use results or a repair exchange.
  std::vector<ChatMessage> transcript;
};

// Maps the provider-agnostic request onto one wire format.
class ProviderAdapter {
 public:
  virtual ~ProviderAdapter() = default;
  virtual std::string path() const = 0;
  virtual Json body(const ChatRequest& request, const ChatConfig& config) const = 0;
  virtual std::string content(const Json& response) const = 0;
};

class OpenAiCompatible final : public ProviderAdapter {
 public:
  std::string path() const override { return "/chat/completions"; }

  Json body(const ChatRequest& request, const ChatConfig& config) const override {
    Json messages = Json::array();
    if (!request.system.empty()) messages.push_back({{"role", "system"}, {"content", request.system}});
    messages.push_back({{"role", "user"}, {"content", request.user}});
    for (const auto& m : request.transcript) {
      messages.push_back({{"role", m.role}, {"content", m.content}});
    }
    return Json{{"model", config.model},
                {"messages", messages},
                {"temperature", config.temperature},
                {"seed", config.seed},
                {"response_format", {{"type", "json_object"}}}};
  }

  std::string content(const Json& response) const override {
    try {
      return response.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const Json::exception& e) {
      throw BackendError(BackendError::Kind::kMalformed,
                         std::string("unexpected response shape: ") + e.what());
    }
  }
};

namespace detail {

// Blocks callers beyond the concurrency limit instead of dropping them.
class RequestQueue {
 public:
  explicit RequestQueue(std::size_t slots) : free_(slots) {}

  void acquire() {
    std::unique_lock lock(mutex_);
    ready_.wait(lock, [&] { return free_ > 0; });
    --free_;
  }

  void release() {
    {
      std::lock_guard lock(mutex_);
      ++free_;
    }
    ready_.notify_one();
  }

 private:
  std::mutex mutex_;
  std::condition_variable ready_;
  std::size_t free_;
};

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix, no trailing slash
};

inline SplitUrl split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("base URL needs a scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  SplitUrl out;
  out.origin = url.substr(0, slash);
  out.prefix = slash == std::string::npos ? "" : url.substr(slash);
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  return out;
}

// Pulls the first JSON object out of a model reply, tolerating code fences.
inline Json parse_reply(const std::string& text) {
  const auto open = text.find('{');
  const auto close = text.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    throw BackendError(BackendError::Kind::kMalformed, "reply contains no JSON object");
  }
  try {
    return Json::parse(text.substr(open, close - open + 1));
  } catch (const Json::parse_error& e) {
    throw BackendError(BackendError::Kind::kMalformed, std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace detail

// Thread-safe client. Every call is queued, sent, logged and parsed.
class ChatClient {
 public:
  ChatClient(ChatConfig config, std::shared_ptr<const ProviderAdapter> adapter = nullptr)
      : config_(std::move(config)),
        adapter_(adapter ? std::move(adapter) : std::make_shared<OpenAiCompatible>()),
        key_(api_key(config_)),
        url_(detail::split_url(config_.base_url)),
        queue_(std::make_shared<detail::RequestQueue>(config_.max_concurrent)) {
    config_.check();
    if (!config_.transcript_dir.empty()) std::filesystem::create_directories(config_.transcript_dir);
  }

  const ChatConfig& config() const { return config_; }

  // Raw assistant text.
  std::string complete(const ChatRequest& request, const std::string& role) {
    const Json body = adapter_->body(request, config_);
    const std::size_t call = next_call_++;
    queue_->acquire();
    struct Release {
      detail::RequestQueue& q;
      ~Release() { q.release(); }
    } release{*queue_};

    httplib::Client client(url_.origin);
    client.set_connection_timeout(config_.timeout_seconds);
    client.set_read_timeout(config_.timeout_seconds);
    client.set_write_timeout(config_.timeout_seconds);
    const httplib::Headers headers{{"Authorization", "Bearer " + key_}};
    const auto started = std::chrono::steady_clock::now();

    for (int attempt = 0;; ++attempt) {
      auto res = client.Post(url_.prefix + adapter_->path(), headers, body.dump(), "application/json");
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
      if (!res) {
        const auto error = res.error();
        log(call, role, body, std::nullopt, "", ms, httplib::to_string(error));
        const auto kind = error == httplib::Error::Read || error == httplib::Error::ConnectionTimeout
                              ? BackendError::Kind::kTimeout
                              : BackendError::Kind::kTransport;
        throw BackendError(kind, role + " call failed: " + httplib::to_string(error));
      }
      const bool retryable = res->status == 429 || res->status >= 500;
      if (retryable && attempt < config_.max_rate_retries) {
        log(call, role, body, res->status, res->body, ms, "retrying");
        std::this_thread::sleep_for(std::chrono::milliseconds(config_.backoff_ms * (attempt + 1)));
        continue;
      }
      log(call, role, body, res->status, res->body, ms, "");
      if (res->status != 200) {
        throw BackendError(res->status == 429 ? BackendError::Kind::kBudget
                                              : BackendError::Kind::kTransport,
                           role + " call returned HTTP " + std::to_string(res->status));
      }
      Json parsed;
      try {
        parsed = Json::parse(res->body);
      } catch (const Json::parse_error& e) {
        throw BackendError(BackendError::Kind::kMalformed, std::string("response is not JSON: ") + e.what());
      }
      return adapter_->content(parsed);
    }
  }

  // Structured reply, with one repair turn when the first does not parse.
  template <typename Decode>
  auto complete_json(const ChatRequest& request, const std::string& role, Decode&& decode) {
    std::string reply = complete(request, role);
    try {
      return decode(detail::parse_reply(reply));
    } catch (const BackendError& e) {
      if (e.kind() != BackendError::Kind::kMalformed) throw;
      ChatRequest repair = request;
      repair.transcript.push_back({"assistant", reply});
      repair.transcript.push_back(
          {"user", std::string("That reply could not be used (") + e.what() +
                       "). Answer again with only the JSON object in the required shape."});
      return decode(detail::parse_reply(complete(repair, role + "-repair")));
    } catch (const Json::exception& e) {
      ChatRequest repair = request;
      repair.transcript.push_back({"assistant", reply});
      repair.transcript.push_back(
          {"user", std::string("That JSON had the wrong shape (") + e.what() +
                       "). Answer again with only the JSON object in the required shape."});
      try {
        return decode(detail::parse_reply(complete(repair, role + "-repair")));
      } catch (const Json::exception& again) {
        throw BackendError(BackendError::Kind::kMalformed, again.what());
      }
    }
  }

 private:
  void log(std::size_t call, const std::string& role, const Json& request, std::optional<int> status,
           const std::string& response, double ms, const std::string& note) {
    if (config_.transcript_dir.empty()) return;
    Json entry{{"schema", 1},
               {"kind", "transcript"},
               {"call", call},
               {"role", role},
               {"url", config_.base_url + adapter_->path()},
               {"request", request},
               {"status", status ? Json(*status) : Json(nullptr)},
               {"latency_ms", ms},
               {"note", note}};
    try {
      entry["response"] = Json::parse(response);
    } catch (const Json::parse_error&) {
      entry["response"] = response;
    }
    char name[64];
    std::snprintf(name, sizeof name, "%06zu-%s.json", call, role.c_str());
    std::lock_guard lock(log_mutex_);
    std::ofstream(config_.transcript_dir / name, std::ios::app) << entry.dump(2) << '\n';
  }

  ChatConfig config_;
  std::shared_ptr<const ProviderAdapter> adapter_;
  std::string key_;
  detail::SplitUrl url_;
  std::shared_ptr<detail::RequestQueue> queue_;
  std::atomic<std::size_t> next_call_{0};
  std::mutex log_mutex_;
};

// ---- role prompts -------------------------------------------------------

inline std::string bullet_list(const std::vector<std::string>& items) {
  if (items.empty()) return "(none)\n";
  std::string out;
  for (const auto& i : items) out += "- " + i + "\n";
  return out;
}

inline constexpr const char* kInvestigatorFormat =
    "Reply with a JSON object: {\"candidates\": [{\"name\": str, \"url\": str}], "
    "\"queries\": [str], \"domains\": [str]}.";

inline constexpr const char* kValidatorSystem =
    "You judge whether one drug program satisfies every hard criterion of a screening query. "
    "Split the query into atomic criteria, keep its AND/OR structure, and cite a source URL and a "
    "verbatim quote for every judgement. Reply with a JSON object: {\"is_match\": bool, "
    "\"criteria\": [{\"criterion\": str, \"pass\": bool, \"evidence\": [{\"url\": str, "
    "\"quote\": str}]}], \"failure_rationale\": str, \"attributes\": object}. "
    "failure_rationale is empty exactly when is_match is true.";

inline constexpr const char* kDedupSystem =
    "You merge drug program records that refer to the same asset under different names: "
    "development codes, brand names, transliterations and subsidiary names.";

inline constexpr const char* kCoachSystem =
    "You refine a search for drug programs. Propose non-overlapping child directives, each "
    "strictly narrower than the current one, that together cover what is still unexplored.";

class Investigator final : public scout::Investigator {
 public:
  Investigator(std::shared_ptr<ChatClient> client, std::string base_prompt)
      : client_(std::move(client)), prompt_(std::move(base_prompt)) {}

  InvestigatorResult investigate(const InvestigatorRequest& req) override {
    ChatRequest chat;
    chat.system = prompt_ + "\n" + kInvestigatorFormat;
    chat.user = "Query: " + req.query + "\nLanguage: search and read sources in '" + req.language +
                "'.\nDirective: " + (req.directive.empty() ? "(none)" : req.directive) +
                "\nInstructions: " + (req.instructions.empty() ? "(none)" : req.instructions) +
                "\nAlready validated assets, do not return:\n" + bullet_list(req.known_assets) +
                "Already proposed candidates, do not return:\n" + bullet_list(req.known_candidates);
    return client_->complete_json(chat, "investigator-" + req.language, [&](const Json& j) {
      InvestigatorResult out;
      for (const auto& c : j.at("candidates")) {
        Candidate cand;
        cand.raw_name = c.at("name").get<std::string>();
        cand.source_url = c.value("url", "");
        cand.discovered_by_node = req.node;
        cand.discovered_language = req.language;
        cand.epoch = req.epoch;
        out.candidates.push_back(std::move(cand));
      }
      out.executed_queries = j.value("queries", std::vector<std::string>{});
      out.visited_domains = j.value("domains", std::vector<std::string>{});
      return out;
    });
  }

 private:
  std::shared_ptr<ChatClient> client_;
  std::string prompt_;
};

class Validator final : public scout::Validator {
 public:
  explicit Validator(std::shared_ptr<ChatClient> client) : client_(std::move(client)) {}

  MatchVerdict validate(const std::string& query, const Candidate& candidate) override {
    ChatRequest chat;
    chat.system = kValidatorSystem;
    chat.user = "Query: " + query + "\nCandidate: " + candidate.raw_name +
                "\nFound at: " + candidate.source_url;
    return client_->complete_json(chat, "validator", [&](const Json& j) {
      MatchVerdict v;
      v.is_match = j.at("is_match").get<bool>();
      for (const auto& c : j.value("criteria", Json::array())) {
        CriterionVerdict cv;
        cv.criterion = c.at("criterion").get<std::string>();
        cv.pass = c.at("pass").get<bool>();
        for (const auto& e : c.value("evidence", Json::array())) {
          cv.evidence.push_back({e.value("url", ""), e.value("quote", "")});
        }
        v.per_criterion.push_back(std::move(cv));
      }
      v.failure_rationale = v.is_match ? "" : j.value("failure_rationale", "");
      if (!v.is_match && v.failure_rationale.empty()) v.failure_rationale = "rejected without rationale";
      try {
        Json attrs = j.value("attributes", Json::object());
        if (!attrs.contains("canonical_name")) attrs["canonical_name"] = candidate.raw_name;
        if (!attrs.contains("aliases")) attrs["aliases"] = Json::array({candidate.raw_name});
        v.normalized_attributes = attrs.get<AssetRecord>();
      } catch (const std::exception&) {
        v.normalized_attributes = {};
      }
      v.check();
      return v;
    });
  }

 private:
  std::shared_ptr<ChatClient> client_;
};

class Deduplicator final : public DedupBackend {
 public:
  explicit Deduplicator(std::shared_ptr<ChatClient> client) : client_(std::move(client)) {}

  std::vector<DedupGroup> group_pass(std::span<const AssetRecord> items,
                                     const GlobalAssetStore& store) override {
    ChatRequest chat;
    chat.system = std::string(kDedupSystem) +
                  " Reply with {\"groups\": [{\"members\": [int], \"canonical\": str, "
                  "\"existing\": str|null}]}, covering every item index exactly once.";
    chat.user = "Items:\n" + numbered(items) + "Known assets:\n" + bullet_list(store.canonical_names());
    return client_->complete_json(chat, "dedup-batch", [&](const Json& j) {
      std::vector<DedupGroup> groups;
      std::vector<bool> covered(items.size(), false);
      for (const auto& g : j.at("groups")) {
        DedupGroup group;
        for (const auto& idx : g.at("members")) {
          const auto i = idx.get<std::size_t>();
          if (i >= items.size() || covered[i]) {
            throw BackendError(BackendError::Kind::kMalformed, "bad or repeated member index");
          }
          covered[i] = true;
          group.members.push_back(i);
        }
        if (group.members.empty()) continue;
        group.representative = items[group.members.front()];
        for (std::size_t i : group.members) {
          group.representative.aliases.insert(items[i].aliases.begin(), items[i].aliases.end());
        }
        const std::string canonical = g.value("canonical", "");
        if (!canonical.empty() && group.representative.aliases.contains(canonical)) {
          group.representative.canonical_name = canonical;
        }
        if (g.contains("existing") && g["existing"].is_string()) {
          group.existing = store.resolve(g["existing"].get<std::string>());
          if (!group.existing) group.existing = g["existing"].get<std::string>();
        }
        groups.push_back(std::move(group));
      }
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (!covered[i]) groups.push_back({items[i], {i}, store.resolve(items[i].canonical_name)});
      }
      return groups;
    });
  }

  HeavyCheck check_item(const AssetRecord& item, std::span<const AssetRecord> existing) override {
    ChatRequest chat;
    chat.system = std::string(kDedupSystem) +
                  " Reply with {\"duplicate_of\": int|null, \"aliases\": [str]}.";
    chat.user = "Item: " + describe(item) + "\nExisting:\n" + numbered(existing);
    return client_->complete_json(chat, "dedup-item", [&](const Json& j) {
      HeavyCheck check;
      check.enriched = item;
      for (const auto& a : j.value("aliases", std::vector<std::string>{})) check.enriched.aliases.insert(a);
      if (j.contains("duplicate_of") && j["duplicate_of"].is_number_integer()) {
        const auto i = j["duplicate_of"].get<std::size_t>();
        if (i >= existing.size()) throw BackendError(BackendError::Kind::kMalformed, "duplicate_of out of range");
        check.duplicate_of = i;
      }
      return check;
    });
  }

 private:
  static std::string describe(const AssetRecord& r) {
    std::vector<std::string> aliases(r.aliases.begin(), r.aliases.end());
    return r.canonical_name + " (aliases: " + join(aliases, ", ") + "; modality: " + r.modality + ")";
  }

  static std::string numbered(std::span<const AssetRecord> items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += std::to_string(i) + ". " + describe(items[i]) + "\n";
    return out.empty() ? "(none)\n" : out;
  }

  std::shared_ptr<ChatClient> client_;
};

class Coach final : public scout::Coach {
 public:
  explicit Coach(std::shared_ptr<ChatClient> client) : client_(std::move(client)) {}

  CoachOutput expand(const CoachContext& ctx) override {
    ChatRequest chat;
    chat.system = std::string(kCoachSystem) + " Reply with {\"children\": [{\"directive\": str, "
                  "\"instructions\": str}], \"rationale\": str} holding exactly " +
                  std::to_string(ctx.k) + " children.";
    std::vector<std::string> lineage;
    for (const auto& d : ctx.lineage) lineage.push_back(d.directive.empty() ? "(root)" : d.directive);
    std::vector<std::string> queries;
    for (const auto& q : ctx.queries) queries.push_back("[" + q.language + "] " + q.query_text);
    std::vector<std::string> domains;
    for (const auto& d : ctx.domains) domains.push_back(d.domain);
    chat.user = "Query: " + ctx.query + "\nPath from root:\n" + bullet_list(lineage) +
                "Current instructions: " + ctx.current.instructions +
                "\nValidated assets:\n" + bullet_list(ctx.known_assets) +
                "Unvalidated candidates:\n" + bullet_list(ctx.known_candidates) +
                "Searches run so far:\n" + bullet_list(queries) +
                "Domains visited:\n" + bullet_list(domains) +
                "Recurring validation failures:\n" +
                (ctx.failure_summary.empty() ? "(none)" : ctx.failure_summary) +
                "\nInvestigator base prompt:\n" + ctx.investigator_prompt;
    return client_->complete_json(chat, "coach", [&](const Json& j) {
      CoachOutput out;
      for (const auto& c : j.at("children")) {
        out.children.push_back({c.at("directive").get<std::string>(), c.value("instructions", "")});
      }
      out.rationale = j.value("rationale", "");
      return out;
    });
  }

  std::string summarize_failures(const std::vector<std::string>& rationales, std::size_t cap) override {
    ChatRequest chat;
    chat.system = "Compress validator rejection reasons into a short list of recurring failure "
                  "patterns, most frequent first, under " + std::to_string(cap) +
                  " characters. Reply with {\"summary\": str}.";
    chat.user = bullet_list(rationales);
    return client_->complete_json(chat, "summarizer",
                                  [](const Json& j) { return j.at("summary").get<std::string>(); });
  }

 private:
  std::shared_ptr<ChatClient> client_;
};

inline Backends make_backends(const ChatConfig& config, const std::string& investigator_prompt) {
  auto client = std::make_shared<ChatClient>(config);
  Backends b;
  b.investigator = std::make_shared<Investigator>(client, investigator_prompt);
  b.validator = std::make_shared<Validator>(client);
  b.deduplicator = std::make_shared<Deduplicator>(client);
  b.coach = std::make_shared<Coach>(client);
  return b;
}

}  // namespace scout::chat
