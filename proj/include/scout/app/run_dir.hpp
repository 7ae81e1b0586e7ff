#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "scout/agents/scripted.hpp"
#include "scout/app/config.hpp"
#include "scout/eval/sim_grader.hpp"
#include "scout/orchestrator/orchestrator.hpp"

namespace scout::app {

namespace fs = std::filesystem;

inline constexpr const char* kStatusFile = "status.json";

// Creates the run directory. A directory holding a finished run is never
// written again.
inline void prepare_run_dir(const fs::path& dir) {
  if (fs::exists(dir / kStatusFile)) {
    throw ConfigError(dir.string() + " already holds a completed run; choose another --out");
  }
  fs::create_directories(dir);
}

inline std::shared_ptr<const sim::Universe> load_universe(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open universe file " + path.string());
  return std::make_shared<const sim::Universe>(sim::Universe::load(in));
}

inline Backends make_backends(const AppConfig& cfg, const fs::path& run_dir,
                              std::shared_ptr<const sim::Universe> universe) {
  if (cfg.backend == "scripted") {
    if (!universe) universe = load_universe(cfg.sim.universe);
    return scripted::make_backends({universe, cfg.sim.budget});
  }
  chat::ChatConfig chat_cfg = cfg.chat;
  chat_cfg.transcript_dir = run_dir / "transcripts";
  chat_cfg.seed = cfg.run.seed;
  return chat::make_backends(chat_cfg, cfg.run.investigator_prompt);
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  writer(out);
}

struct RunOutcome {
  RunResult result;
  std::optional<eval::MetricsReport> metrics;
  std::vector<eval::QualityPoint> quality;
};

// Metrics of an asset list against the universe's exhaustive answer.
inline eval::MetricsReport sim_metrics(const std::shared_ptr<const sim::Universe>& universe,
                                       const std::string& query,
                                       const std::vector<std::string>& predicted) {
  eval::OracleGrader grader(universe);
  const auto examples = eval::sim_examples(*universe, "q0", query);
  return eval::evaluate_run(examples, {{"q0", predicted}}, grader);
}

// Runs the orchestrator and writes every artifact under `dir`. With a
// ground-truth universe, also writes metrics and the quality-over-time table.
inline RunOutcome execute_run(const AppConfig& cfg, const fs::path& dir,
                              std::shared_ptr<const sim::Universe> truth = nullptr) {
  cfg.check();
  prepare_run_dir(dir);
  if (!truth && cfg.backend == "scripted") truth = load_universe(cfg.sim.universe);
  write_text(dir / "config.json", to_json(cfg).dump(2) + "\n");

  Orchestrator orchestrator(cfg.run, make_backends(cfg, dir, truth));
  RunOutcome outcome;
  std::ofstream epochs(dir / "epochs.jsonl", std::ios::binary);
  double logical_time = 0.0;
  double wall_seconds = 0.0;
  orchestrator.set_observer([&](const EpochReport& report, const GlobalAssetStore& assets) {
    epochs << report.to_json().dump() << '\n';
    logical_time += static_cast<double>(report.calls.investigator);
    if (report.wall_clock_ms) wall_seconds += *report.wall_clock_ms / 1000.0;
    if (truth) {
      const auto m = sim_metrics(truth, cfg.run.query, assets.canonical_names());
      outcome.quality.push_back(eval::quality_point(
          m, report.epoch, cfg.run.record_wall_clock ? wall_seconds : logical_time));
    }
  });
  outcome.result = orchestrator.run();
  epochs.close();

  const auto& r = outcome.result;
  write_file(dir / "assets.jsonl", [&](std::ostream& o) { r.assets.write_jsonl(o); });
  write_file(dir / "candidates.jsonl", [&](std::ostream& o) { r.candidates.write_jsonl(o); });
  write_file(dir / "evidence.jsonl", [&](std::ostream& o) { r.evidence.write_jsonl(o); });
  write_file(dir / "tree.txt", [&](std::ostream& o) { r.tree.render(o); });
  write_file(dir / "tree.jsonl", [&](std::ostream& o) { r.tree.write_jsonl(o); });

  if (truth) {
    outcome.metrics = sim_metrics(truth, cfg.run.query, r.assets.canonical_names());
    write_text(dir / "metrics.json", eval::to_json(*outcome.metrics).dump(2) + "\n");
    write_file(dir / "metrics.txt", [&](std::ostream& o) { eval::write_table(o, *outcome.metrics); });
    write_file(dir / "quality.tsv", [&](std::ostream& o) { eval::write_quality_tsv(o, outcome.quality); });
  }
  Json status{{"schema", 1},
              {"kind", "status"},
              {"status", r.failure ? "partial" : "complete"},
              {"epochs_completed", r.reports.size()}};
  if (r.failure) status["failure"] = r.failure->what();
  write_text(dir / kStatusFile, status.dump(2) + "\n");
  return outcome;
}

// Files compared when replaying a run.
inline const std::vector<std::string>& replay_artifacts() {
  static const std::vector<std::string> files{"assets.jsonl", "candidates.jsonl", "evidence.jsonl",
                                              "tree.txt",     "tree.jsonl",       "epochs.jsonl",
                                              "metrics.json", "metrics.txt",      "quality.tsv"};
  return files;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Names of artifacts that differ between two run directories.
inline std::vector<std::string> diff_runs(const fs::path& a, const fs::path& b) {
  std::vector<std::string> differing;
  for (const auto& name : replay_artifacts()) {
    const bool in_a = fs::exists(a / name);
    if (in_a != fs::exists(b / name) || (in_a && read_file(a / name) != read_file(b / name))) {
      differing.push_back(name);
    }
  }
  return differing;
}

}  // namespace scout::app
