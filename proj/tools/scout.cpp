#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scout/app/config.hpp"
#include "scout/app/experiment.hpp"
#include "scout/app/run_dir.hpp"
#include "scout/benchgen/pipeline.hpp"
#include "scout/eval/chat_grader.hpp"

namespace fs = std::filesystem;
using namespace scout;

namespace {

fs::path fixture_dir() {
  if (const char* env = std::getenv("SCOUT_FIXTURE_DIR")) return env;
#ifdef SCOUT_FIXTURE_DIR
  return SCOUT_FIXTURE_DIR;
#else
  return "fixtures";
#endif
}

// A named fixture ("u200") or a path to an experiment file.
fs::path experiment_path(const std::string& fixture) {
  if (fs::exists(fixture)) return fixture;
  return fixture_dir() / (fixture + ".experiment.json");
}

fs::path absolute_from(const fs::path& base, const std::string& p) {
  return app::resolve_relative(base, p);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  for (auto& part : split(text, ',')) {
    auto t = trim(part);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

struct RunFlags {
  std::string config_file;
  std::optional<std::string> query;
  std::optional<int> epochs, m, k;
  std::optional<std::string> languages, dedup, backend, strategy, universe;
  std::optional<std::uint64_t> seed;
  std::optional<double> c;
};

// Defaults, then the config file, then flags.
app::AppConfig resolve_config(const RunFlags& f) {
  app::AppConfig cfg;
  if (!f.config_file.empty()) {
    const fs::path file = f.config_file;
    app::apply_json(cfg, app::load_json_file(file));
    if (!cfg.sim.universe.empty()) {
      cfg.sim.universe = absolute_from(file.parent_path(), cfg.sim.universe).string();
    }
  }
  auto& r = cfg.run;
  if (f.query) r.query = *f.query;
  if (f.epochs) r.epochs = *f.epochs;
  if (f.m) r.m = *f.m;
  if (f.k) r.k = *f.k;
  if (f.languages) r.languages = split_list(*f.languages);
  if (f.dedup) r.dedup_mode = parse_dedup_mode(*f.dedup);
  if (f.seed) r.seed = *f.seed;
  if (f.c) r.c = *f.c;
  if (f.strategy) {
    if (*f.strategy != "tree" && *f.strategy != "flat") throw ConfigError("--strategy must be tree or flat");
    r.strategy = *f.strategy == "flat" ? SearchStrategy::kFlat : SearchStrategy::kTree;
  }
  if (f.backend) cfg.backend = *f.backend;
  if (f.universe) cfg.sim.universe = fs::weakly_canonical(*f.universe).string();
  return cfg;
}

void print_summary(const fs::path& dir, const app::RunOutcome& outcome) {
  const auto& r = outcome.result;
  std::cout << "run directory: " << dir.string() << "\n";
  std::cout << "epochs: " << r.reports.size() << ", assets: " << r.assets.size()
            << ", tree nodes: " << r.tree.size() << "\n";
  if (outcome.metrics) eval::write_table(std::cout, *outcome.metrics);
  if (r.failure) std::cerr << "run stopped early: " << r.failure->what() << "\n";
}

std::vector<std::string> asset_names(const fs::path& assets_file) {
  std::vector<std::string> names;
  std::ifstream in(assets_file);
  if (!in) throw ConfigError("cannot open " + assets_file.string());
  for (std::string line; std::getline(in, line);) {
    if (!trim(line).empty()) names.push_back(Json::parse(line).at("canonical_name").get<std::string>());
  }
  return names;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Tree-search drug asset scouting: run, simulate, evaluate, benchgen"};
  cli.require_subcommand(1);

  // run
  RunFlags run_flags;
  std::string run_out;
  auto* run = cli.add_subcommand("run", "Run the search loop and write a run directory");
  run->add_option("--config", run_flags.config_file, "Experiment definition file (JSON)");
  run->add_option("--query", run_flags.query, "Screening query");
  run->add_option("--epochs", run_flags.epochs, "Number of epochs (default 10)");
  run->add_option("--m", run_flags.m, "Leaves rolled out per epoch (default 1)");
  run->add_option("--k", run_flags.k, "Children per expansion (default 3)");
  run->add_option("--languages", run_flags.languages, "Comma-separated language codes (default en,zh)");
  run->add_option("--dedup", run_flags.dedup, "light | heavy (default light)");
  run->add_option("--seed", run_flags.seed, "Seed");
  run->add_option("--c", run_flags.c, "Exploration constant (default 1.2)");
  run->add_option("--strategy", run_flags.strategy, "tree | flat (default tree)");
  run->add_option("--backend", run_flags.backend, "scripted | chat (default scripted)");
  run->add_option("--universe", run_flags.universe, "Sim universe (scripted backend, metrics)");
  run->add_option("--out", run_out, "Run directory")->required();

  // simulate
  std::string sim_fixture = "u200";
  std::string sim_ablations = "none";
  std::string sim_out;
  std::optional<int> sim_epochs;
  std::optional<std::string> sim_query;
  auto* simulate = cli.add_subcommand("simulate", "Run tree and ablation experiments on a sim fixture");
  simulate->add_option("--fixture", sim_fixture, "Fixture name or experiment file (default u200)");
  simulate->add_option("--epochs", sim_epochs, "Override the fixture's epoch count");
  simulate->add_option("--query", sim_query, "Override the fixture's query");
  simulate->add_option("--ablation", sim_ablations, "Comma list of none, flat, lang-free");
  simulate->add_option("--out", sim_out, "Output directory")->required();

  // evaluate
  std::string eval_run, eval_predictions, eval_benchmark, eval_universe, eval_config, eval_out;
  std::string eval_backend = "oracle";
  auto* evaluate = cli.add_subcommand("evaluate", "Score predictions against a benchmark");
  evaluate->add_option("--run", eval_run, "Run directory to score");
  evaluate->add_option("--predictions", eval_predictions, "JSONL: {query_id, predicted: [names]}");
  evaluate->add_option("--benchmark", eval_benchmark, "JSONL: {id, query_id, query, expected_asset}");
  evaluate->add_option("--universe", eval_universe, "Sim universe for the oracle grader");
  evaluate->add_option("--grader", eval_backend, "oracle | chat (default oracle)");
  evaluate->add_option("--config", eval_config, "Config file with chat settings");
  evaluate->add_option("--out", eval_out, "Output directory")->required();

  // benchgen
  std::string bg_universe, bg_regions, bg_groups, bg_out;
  benchgen::PipelineOptions bg_options;
  auto* bench = cli.add_subcommand("benchgen", "Build query / ground-truth pairs over a sim universe");
  bench->add_option("--universe", bg_universe, "Sim universe")->required();
  bench->add_option("--regions", bg_regions, "Region/source fixture (default fixtures/regions.json)");
  bench->add_option("--groups", bg_groups, "Query group fixture (default fixtures/query_groups.json)");
  bench->add_option("--steps", bg_options.steps, "Tuples to process (default one cycle)");
  bench->add_option("--filter-fraction", bg_options.filter_fraction, "Share of assets filtered (default 1.0)");
  bench->add_option("--max-rounds", bg_options.max_rounds, "Validation rounds per pair (default 5)");
  bench->add_option("--seed", bg_options.seed, "Seed");
  bench->add_option("--out", bg_out, "Output directory")->required();

  // config validate
  std::string validate_file;
  auto* config = cli.add_subcommand("config", "Configuration tools");
  config->require_subcommand(1);
  auto* validate = config->add_subcommand("validate", "Check an experiment definition file");
  validate->add_option("file", validate_file, "Config file")->required();

  // replay
  std::string replay_run, replay_out;
  auto* replay = cli.add_subcommand("replay", "Re-run a scripted run directory and compare artifacts");
  replay->add_option("--run", replay_run, "Completed run directory")->required();
  replay->add_option("--out", replay_out, "Directory for the replay")->required();

  // universe
  sim::UniverseSpec uni_spec;
  std::string uni_languages = "en,zh,ja,ko";
  std::string uni_out;
  auto* universe = cli.add_subcommand("universe", "Generate a seeded sim universe");
  universe->add_option("--seed", uni_spec.seed, "Seed (default 7)");
  universe->add_option("--assets", uni_spec.asset_count, "Asset count (default 200)");
  universe->add_option("--distractors", uni_spec.distractor_count, "Lookalike count (default 40)");
  universe->add_option("--languages", uni_languages, "Comma list, must include en");
  universe->add_option("--out", uni_out, "Output directory")->required();

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = cli.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      auto cfg = resolve_config(run_flags);
      cfg.check();
      if (cfg.backend == "chat") chat::api_key(cfg.chat);
      std::shared_ptr<const sim::Universe> truth;
      if (!cfg.sim.universe.empty()) truth = app::load_universe(cfg.sim.universe);
      auto outcome = app::execute_run(cfg, run_out, truth);
      print_summary(run_out, outcome);
      return outcome.result.failure ? 3 : 0;
    }

    if (*simulate) {
      const auto exp = app::load_experiment(experiment_path(sim_fixture));
      auto truth = app::load_universe(exp.universe);
      fs::create_directories(sim_out);
      std::ofstream summary(fs::path(sim_out) / "summary.tsv", std::ios::binary);
      summary << "ablation\tstrategy\tlanguages\tinvestigator_calls\tassets\trecall\tprecision\tf1\n";
      for (const auto& ablation : split_list(sim_ablations)) {
        app::Experiment run_exp = exp;
        if (sim_query) run_exp.query = *sim_query;
        if (sim_epochs) run_exp.epochs = *sim_epochs;
        const auto cfg = app::ablation_config(run_exp, ablation);
        const fs::path dir = fs::path(sim_out) / ablation;
        auto outcome = app::execute_run(cfg, dir, truth);
        std::size_t calls = 0;
        for (const auto& rep : outcome.result.reports) calls += rep.calls.investigator;
        const auto& m = *outcome.metrics;
        summary << ablation << '\t' << to_string(cfg.run.strategy) << '\t' << join(cfg.run.languages, ",")
                << '\t' << calls << '\t' << outcome.result.assets.size() << '\t' << eval::fixed(m.recall)
                << '\t' << eval::fixed(m.precision) << '\t' << eval::fixed(m.f1) << '\n';
        std::cout << ablation << ": recall " << eval::fixed(m.recall, 4) << ", precision "
                  << eval::fixed(m.precision, 4) << ", series " << (dir / "quality.tsv").string() << "\n";
      }
      return 0;
    }

    if (*evaluate) {
      std::vector<eval::BenchmarkExample> examples;
      eval::Predictions predictions;
      std::shared_ptr<const sim::Universe> truth;
      if (!eval_universe.empty()) truth = app::load_universe(eval_universe);
      if (!eval_run.empty()) {
        const Json cfg = app::load_json_file(fs::path(eval_run) / "config.json");
        const auto query = cfg.at("query").get<std::string>();
        predictions["q0"] = asset_names(fs::path(eval_run) / "assets.jsonl");
        if (eval_benchmark.empty()) {
          if (!truth) throw ConfigError("scoring a run needs --benchmark or --universe");
          examples = eval::sim_examples(*truth, "q0", query);
        }
      }
      if (!eval_predictions.empty()) {
        std::ifstream in(eval_predictions);
        if (!in) throw ConfigError("cannot open " + eval_predictions);
        for (std::string line; std::getline(in, line);) {
          if (trim(line).empty()) continue;
          const Json j = Json::parse(line);
          auto& list = predictions[j.at("query_id").get<std::string>()];
          for (const auto& name : j.at("predicted")) list.push_back(name.get<std::string>());
        }
      }
      if (!eval_benchmark.empty()) {
        std::ifstream in(eval_benchmark);
        if (!in) throw ConfigError("cannot open " + eval_benchmark);
        for (std::string line; std::getline(in, line);) {
          if (trim(line).empty()) continue;
          const Json j = Json::parse(line);
          examples.push_back({j.at("id").get<std::string>(), j.at("query_id").get<std::string>(),
                              j.at("query").get<std::string>(), j.at("expected_asset").get<std::string>()});
        }
      }
      if (predictions.empty()) throw ConfigError("nothing to score: pass --run or --predictions");
      std::unique_ptr<eval::Grader> grader;
      if (eval_backend == "oracle") {
        if (!truth) throw ConfigError("the oracle grader needs --universe");
        grader = std::make_unique<eval::OracleGrader>(truth);
      } else if (eval_backend == "chat") {
        app::AppConfig cfg;
        if (!eval_config.empty()) app::apply_json(cfg, app::load_json_file(eval_config));
        auto chat_cfg = cfg.chat;
        chat_cfg.transcript_dir = fs::path(eval_out) / "transcripts";
        grader = std::make_unique<eval::ChatGrader>(std::make_shared<chat::ChatClient>(chat_cfg));
      } else {
        throw ConfigError("--grader must be oracle or chat");
      }
      const auto report = eval::evaluate_run(examples, predictions, *grader);
      fs::create_directories(eval_out);
      app::write_text(fs::path(eval_out) / "metrics.json", eval::to_json(report).dump(2) + "\n");
      app::write_file(fs::path(eval_out) / "metrics.txt", [&](std::ostream& o) { eval::write_table(o, report); });
      eval::write_table(std::cout, report);
      for (const auto& e : report.excluded) std::cerr << "excluded: " << e << "\n";
      return 0;
    }

    if (*bench) {
      auto truth = app::load_universe(bg_universe);
      const fs::path regions_file = bg_regions.empty() ? fixture_dir() / "regions.json" : fs::path(bg_regions);
      const fs::path groups_file = bg_groups.empty() ? fixture_dir() / "query_groups.json" : fs::path(bg_groups);
      std::ifstream regions_in(regions_file);
      std::ifstream groups_in(groups_file);
      if (!regions_in || !groups_in) throw ConfigError("cannot open region or group fixture");
      const auto regions = benchgen::load_regions(regions_in);
      const auto groups = benchgen::load_query_groups(groups_in);
      benchgen::SimMiner miner(truth, regions);
      benchgen::SimEnricher enricher(truth);
      benchgen::SimSerp serp(truth);
      benchgen::ScriptedGenerator generator;
      benchgen::PipelineBackends backends{&miner, &enricher, &serp, &generator,
                                          [](const benchgen::QueryGroup& g) {
                                            return std::make_unique<benchgen::SimPairValidator>(g);
                                          }};
      const auto report = benchgen::build_benchmark(benchgen::schedule_tuples(regions), groups, backends, bg_options);
      fs::create_directories(bg_out);
      app::write_file(fs::path(bg_out) / "benchmark.jsonl",
                      [&](std::ostream& o) { benchgen::write_benchmark_jsonl(o, report.records); });
      const Json summary{{"schema", 1},
                         {"kind", "benchgen_report"},
                         {"tuples", report.tuples},
                         {"mined", report.mined},
                         {"enriched", report.enriched},
                         {"under_radar", report.under_radar},
                         {"pairs", report.records.size()},
                         {"unresolvable", report.unresolvable},
                         {"warnings", report.warnings}};
      app::write_text(fs::path(bg_out) / "report.json", summary.dump(2) + "\n");
      std::cout << "tuples " << report.tuples << ", mined " << report.mined << ", enriched "
                << report.enriched << ", under-radar " << report.under_radar << ", pairs "
                << report.records.size() << ", unresolvable " << report.unresolvable << "\n";
      return 0;
    }

    if (*validate) {
      app::AppConfig cfg;
      app::apply_json(cfg, app::load_json_file(validate_file));
      if (!cfg.sim.universe.empty()) {
        cfg.sim.universe = absolute_from(fs::path(validate_file).parent_path(), cfg.sim.universe).string();
        if (cfg.backend == "scripted" && !fs::exists(cfg.sim.universe)) {
          throw ConfigError("sim.universe does not exist: " + cfg.sim.universe);
        }
      }
      cfg.check();
      std::cout << validate_file << ": ok\n";
      return 0;
    }

    if (*replay) {
      app::AppConfig cfg;
      app::apply_json(cfg, app::load_json_file(fs::path(replay_run) / "config.json"));
      if (cfg.backend != "scripted") throw ConfigError("only scripted runs replay exactly");
      app::execute_run(cfg, replay_out);
      const auto differing = app::diff_runs(replay_run, replay_out);
      if (differing.empty()) {
        std::cout << "replay identical: " << app::replay_artifacts().size() << " artifacts compared\n";
        return 0;
      }
      for (const auto& name : differing) std::cerr << "differs: " << name << "\n";
      return 4;
    }

    if (*universe) {
      uni_spec.languages = split_list(uni_languages);
      const auto u = sim::Universe::generate(uni_spec);
      fs::create_directories(uni_out);
      app::write_file(fs::path(uni_out) / "universe.jsonl", [&](std::ostream& o) { u.save(o); });
      std::cout << "wrote " << u.entities().size() << " entities\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
