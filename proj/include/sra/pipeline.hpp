#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "json.hpp"
#include "sra/config.hpp"
#include "sra/evaluate.hpp"

namespace sra {

struct RunArtifacts {
  std::filesystem::path dir;
  EvalReport test_report;
  EvalReport val_report;
  std::map<std::string, CoverageStats> coverage_by_split;
  CoverageStats coverage_total;
  std::string test_fingerprint;
};

// Executes one experiment arm end to end (load, select, retrieve, augment,
// train, predict, evaluate) and writes all artifacts plus a re-executable
// manifest under out_dir. The arm comes from cfg.arm.
RunArtifacts run_experiment(const RunConfig& cfg, const std::filesystem::path& out_dir);

struct SweepRow {
  double cutoff = 0.0;
  std::string dir;
  double coverage = 0.0;
  std::optional<double> mean_similarity;
  double test_micro_f1 = 0.0;
  double test_macro_f1 = 0.0;
  double val_micro_f1 = 0.0;
  double val_macro_f1 = 0.0;
  bool selected = false;
};

struct SweepArtifacts {
  std::filesystem::path dir;
  std::vector<SweepRow> rows;  // ascending cutoff
  double best_cutoff = 0.0;
  EvalReport test_report_at_best;
};

// Runs the sra arm per cutoff (cutoff 0 degenerates to the baseline arm),
// selects the best cutoff on validation, and emits sweep.json plus the
// plot-ready sweep.csv.
SweepArtifacts run_sweep(const RunConfig& cfg, const std::filesystem::path& out_dir);

nlohmann::json analyze_dataset(const RunConfig& cfg);
void cmd_analyze(const RunConfig& cfg, const std::filesystem::path& out_dir);
void cmd_index(const RunConfig& cfg, const std::filesystem::path& out_dir);
void cmd_augment(const RunConfig& cfg, const std::filesystem::path& out_dir);

struct CompareOptions {
  std::size_t resamples = 10000;
  double level = 0.95;
  std::uint64_t seed = 42;
  std::size_t top_k = 10;
};

ComparisonReport compare_run_dirs(const std::filesystem::path& run_a,
                                  const std::filesystem::path& run_b,
                                  const CompareOptions& options,
                                  nlohmann::json* document = nullptr);

// Case-study view of one sample: original text, retrieved clause and dense
// similarity, gold and predicted labels; optionally the prediction of a
// second run on the same sample.
std::string inspect_run(const std::filesystem::path& run_dir, const std::string& id,
                        const std::optional<std::filesystem::path>& other_run = {});

// CLI exit codes: 0 success, 2 config, 3 load/validation, 4 stage failure,
// 1 anything else.
int exit_code_for(const std::exception& e);

}  // namespace sra
