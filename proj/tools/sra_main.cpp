#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sra/config.hpp"
#include "sra/errors.hpp"
#include "sra/pipeline.hpp"
#include "sra/util.hpp"

namespace fs = std::filesystem;

namespace {

struct GlobalArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string out;
};

sra::RunConfig resolve_config(const GlobalArgs& args) {
  sra::KeyValues kv;
  if (!args.config_path.empty()) kv = sra::parse_config_file(args.config_path);
  for (const auto& assignment : args.overrides) sra::apply_override(kv, assignment);
  if (args.seed) kv["seed"] = std::to_string(*args.seed);
  if (!args.out.empty()) kv["out_dir"] = args.out;
  return sra::RunConfig::resolve(kv);
}

void add_global_flags(CLI::App* cmd, GlobalArgs& args) {
  cmd->add_option("--config", args.config_path, "Config file (key = value lines)");
  cmd->add_option("--set", args.overrides, "Override a config key (key=value)");
  cmd->add_option("--seed", args.seed, "Override the run seed");
  cmd->add_option("--out", args.out, "Output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Selective retrieval-augmentation pipeline for long-tail text classification"};
  app.require_subcommand(1);

  GlobalArgs args;
  std::string arm;
  std::string run_a, run_b;
  std::string inspect_id, also_run;
  std::string cutoffs_csv;

  CLI::App* analyze = app.add_subcommand("analyze", "Frequency table, buckets and length percentiles");
  add_global_flags(analyze, args);

  CLI::App* index = app.add_subcommand("index", "Build and persist the train-split sparse index");
  add_global_flags(index, args);

  CLI::App* augment = app.add_subcommand("augment", "Write augmented splits and coverage stats");
  add_global_flags(augment, args);

  CLI::App* run = app.add_subcommand("run", "Run one experiment arm end to end");
  add_global_flags(run, args);
  run->add_option("--arm", arm, "baseline | full | sra (overrides config)");

  CLI::App* sweep = app.add_subcommand("sweep", "Run the cutoff sweep and select on validation");
  add_global_flags(sweep, args);
  sweep->add_option("--cutoffs", cutoffs_csv, "Comma-separated cutoff list (overrides config)");

  CLI::App* compare = app.add_subcommand("compare", "Compare two finished runs on the same test split");
  add_global_flags(compare, args);
  compare->add_option("--run-a", run_a, "Directory of run A (reference)")->required();
  compare->add_option("--run-b", run_b, "Directory of run B (treatment)")->required();

  CLI::App* inspect = app.add_subcommand("inspect", "Show one sample with its retrieved clause and predictions");
  add_global_flags(inspect, args);
  inspect->add_option("--run", run_a, "Run directory")->required();
  inspect->add_option("--id", inspect_id, "Sample id")->required();
  inspect->add_option("--also", also_run, "Second run directory to show alongside");

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed()) {
      sra::RunConfig cfg = resolve_config(args);
      nlohmann::json j = sra::analyze_dataset(cfg);
      sra::cmd_analyze(cfg, args.out.empty() ? fs::path(cfg.out_dir) : fs::path(args.out));
      std::cout << j.dump(2) << "\n";
    } else if (index->parsed()) {
      sra::RunConfig cfg = resolve_config(args);
      fs::path out = args.out.empty() ? fs::path(cfg.out_dir) : fs::path(args.out);
      sra::cmd_index(cfg, out);
      std::cout << "wrote " << (out / "sparse_index.json").string() << "\n";
    } else if (augment->parsed()) {
      sra::RunConfig cfg = resolve_config(args);
      fs::path out = args.out.empty() ? fs::path(cfg.out_dir) : fs::path(args.out);
      sra::cmd_augment(cfg, out);
      std::cout << "wrote augmented splits to " << out.string() << "\n";
    } else if (run->parsed()) {
      if (!arm.empty()) args.overrides.push_back("arm=" + arm);
      sra::RunConfig cfg = resolve_config(args);
      fs::path out = args.out.empty() ? fs::path(cfg.out_dir) : fs::path(args.out);
      sra::RunArtifacts artifacts = sra::run_experiment(cfg, out);
      nlohmann::json summary;
      summary["arm"] = cfg.arm;
      summary["dir"] = artifacts.dir.string();
      summary["test_micro_f1"] = artifacts.test_report.micro_f1;
      summary["test_macro_f1"] = artifacts.test_report.macro_f1;
      summary["val_micro_f1"] = artifacts.val_report.micro_f1;
      summary["val_macro_f1"] = artifacts.val_report.macro_f1;
      summary["coverage"] = artifacts.coverage_total.coverage();
      std::cout << summary.dump(2) << "\n";
    } else if (sweep->parsed()) {
      if (!cutoffs_csv.empty()) args.overrides.push_back("sweep_cutoffs=" + cutoffs_csv);
      sra::RunConfig cfg = resolve_config(args);
      fs::path out = args.out.empty() ? fs::path(cfg.out_dir) : fs::path(args.out);
      sra::SweepArtifacts artifacts = sra::run_sweep(cfg, out);
      std::cout << "best cutoff: " << sra::format_double(artifacts.best_cutoff) << "\n";
      std::cout << "table: " << (out / "sweep.csv").string() << "\n";
    } else if (compare->parsed()) {
      sra::CompareOptions options;
      sra::KeyValues kv;
      if (!args.config_path.empty()) kv = sra::parse_config_file(args.config_path);
      for (const auto& assignment : args.overrides) sra::apply_override(kv, assignment);
      if (kv.count("eval_resamples")) {
        options.resamples = std::stoull(kv["eval_resamples"]);
      }
      if (kv.count("eval_level")) options.level = std::stod(kv["eval_level"]);
      if (kv.count("compare_top_k")) options.top_k = std::stoull(kv["compare_top_k"]);
      if (kv.count("seed")) options.seed = std::stoull(kv["seed"]);
      if (args.seed) options.seed = *args.seed;
      nlohmann::json document;
      sra::compare_run_dirs(run_a, run_b, options, &document);
      if (!args.out.empty()) {
        fs::create_directories(args.out);
        std::ofstream file(fs::path(args.out) / "comparison.json");
        file << document.dump(2) << "\n";
      }
      std::cout << document.dump(2) << "\n";
    } else if (inspect->parsed()) {
      std::optional<fs::path> other;
      if (!also_run.empty()) other = fs::path(also_run);
      std::cout << sra::inspect_run(run_a, inspect_id, other);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return sra::exit_code_for(e);
  }
  return 0;
}
