#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "sra/config.hpp"
#include "sra/corpus.hpp"
#include "sra/synthetic.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Generate the shipped synthetic long-tail corpus and a starter config"};
  std::string out = "synthetic";
  std::uint64_t seed = 42;
  app.add_option("--out", out, "Output directory");
  app.add_option("--seed", seed, "Generator seed");
  CLI11_PARSE(app, argc, argv);

  try {
    sra::SyntheticSpec spec;
    spec.seed = seed;
    sra::Dataset dataset = sra::make_synthetic_corpus(spec);

    fs::create_directories(out);
    const fs::path corpus_path = fs::absolute(fs::path(out) / "corpus.jsonl");
    sra::save_dataset(dataset, corpus_path);

    sra::RunConfig cfg;
    cfg.dataset_path = corpus_path.string();
    cfg.task = sra::Task::SingleLabel;
    cfg.arm = "sra";
    cfg.policy.mode = sra::PolicyMode::CutoffRatio;
    cfg.policy.alpha = 0.8;
    cfg.training.learning_rate = 12.0;
    cfg.training.max_epochs = 60;
    cfg.seed = seed;
    cfg.training.seed = seed;
    cfg.out_dir = (fs::absolute(fs::path(out)) / "runs").string();
    const fs::path cfg_path = fs::path(out) / "sra.cfg";
    std::ofstream cfg_file(cfg_path);
    cfg_file << sra::render_config(cfg.to_key_values());
    cfg_file.close();

    nlohmann::json summary;
    summary["corpus"] = corpus_path.string();
    summary["config"] = fs::absolute(cfg_path).string();
    summary["samples"] = dataset.samples.size();
    summary["labels"] = dataset.label_vocab.size();
    for (sra::Split split : sra::kAllSplits) {
      summary[sra::to_string(split)] = dataset.split_size(split);
    }
    std::cout << summary.dump(2) << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
