#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sra/augment.hpp"
#include "sra/classify.hpp"
#include "sra/corpus.hpp"
#include "sra/longtail.hpp"
#include "sra/retrieval.hpp"

namespace sra {

using KeyValues = std::map<std::string, std::string>;

// Flat "key = value" text format; '#' lines are comments. Values keep
// interior whitespace (prompts contain spaces).
KeyValues parse_config_file(const std::filesystem::path& path);
KeyValues parse_config_text(const std::string& text);
void apply_override(KeyValues& kv, const std::string& assignment);  // "key=value"
std::string render_config(const KeyValues& kv);

// Every resolved field of a run; round-trips through the manifest so a run is
// re-executable from the manifest alone.
struct RunConfig {
  std::string dataset_path;
  Task task = Task::SingleLabel;
  std::string arm = "sra";  // baseline | full | sra

  SelectionPolicy policy;
  Gate gate = Gate::AnyLabel;

  SparseIndexParams sparse;
  RetrievalParams retrieval;
  std::string embedding_provider = "trigram";  // trigram | file
  std::string embedding_file;
  TrigramProviderParams trigram;

  AugmentationConfig augmentation;
  TrainConfig training;
  FeaturizerParams featurizer;

  std::size_t eval_resamples = 10000;
  double eval_level = 0.95;
  std::uint64_t seed = 42;
  std::size_t compare_top_k = 10;

  std::string out_dir = "sra_out";
  std::vector<double> bucket_fractions = {0.1, 0.4, 0.5};
  std::vector<double> percentiles = {0.5, 0.9, 0.95, 0.99};
  std::vector<double> sweep_cutoffs = {0.0, 0.2, 0.5, 0.8, 1.0};
  std::string selection_metric = "macro_f1";  // macro_f1 | micro_f1

  static RunConfig resolve(const KeyValues& kv);
  KeyValues to_key_values() const;
  void validate() const;
};

}  // namespace sra
