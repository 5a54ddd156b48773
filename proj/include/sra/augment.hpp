#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sra/corpus.hpp"
#include "sra/longtail.hpp"
#include "sra/retrieval.hpp"

namespace sra {

enum class Truncation { None, Clause, Total, Both };
std::string to_string(Truncation t);
Truncation truncation_from_string(const std::string& s);

struct AugmentationConfig {
  std::size_t clause_token_cap = 64;
  std::size_t max_model_length = 512;
  std::string prompt_orig = "Original clause:";
  std::string prompt_ref = "Related clause for reference:";
  std::string separator = "[SEP]";
  std::size_t k = 1;
  // Validation/test eligibility is decided from ground-truth labels; the
  // only supported mode, named explicitly so no caller enables it unknowingly.
  std::string eval_gating = "ground_truth_labels";

  void validate() const;
  nlohmann::json to_json() const;
};

struct AugmentedSample {
  Sample base;
  std::vector<std::string> picks;     // train doc ids used
  std::vector<double> pick_scores;    // dense similarity per pick
  std::string composed_text;
  std::size_t token_count = 0;        // whitespace tokens of composed_text
  bool was_augmented = false;
  Truncation truncation_applied = Truncation::None;
  std::string skip_reason;            // non-empty when retrieval skipped
};

struct CoverageStats {
  std::size_t total = 0;
  std::size_t eligible = 0;
  std::size_t augmented = 0;
  std::map<std::string, std::size_t> skip_reasons;
  double similarity_sum = 0.0;
  std::size_t similarity_count = 0;

  double coverage() const {
    return total == 0 ? 0.0 : static_cast<double>(augmented) / static_cast<double>(total);
  }
  std::optional<double> mean_similarity() const {
    if (similarity_count == 0) return std::nullopt;
    return similarity_sum / static_cast<double>(similarity_count);
  }
  void merge(const CoverageStats& other);
  nlohmann::json to_json() const;
};

// First min(cap, length) whitespace tokens rejoined with single spaces.
std::string truncate_tokens(const std::string& text, std::size_t cap);

// Compose prompt_orig + text + [SEP] + prompt_ref + clauses; clauses are
// capped at clause_token_cap, then the whole sequence at max_model_length
// (truncating from the end). Empty retrieved list passes the sample through
// byte-identical.
AugmentedSample compose(const Sample& base, const std::vector<std::string>& retrieved,
                        const AugmentationConfig& config);

enum class EligibilityMode { None, All, Policy };

// Augments eligible samples of one split with train-retrieved clauses; output
// order equals input order. `low` is required for Policy mode; `retriever`
// may be null for None mode.
std::pair<std::vector<AugmentedSample>, CoverageStats> augment_split(
    const Dataset& dataset, Split split, const std::optional<LowFrequencySet>& low,
    Gate gate, EligibilityMode mode, const Retriever* retriever,
    const AugmentationConfig& config);

// Line format: header record (low set, config), then corpus records plus
// composed_text/picks/was_augmented/truncation_applied fields.
void save_augmented_split(const std::vector<AugmentedSample>& samples,
                          const std::optional<LowFrequencySet>& low,
                          const AugmentationConfig& config, Split split,
                          const std::filesystem::path& path);
std::vector<AugmentedSample> load_augmented_split(const std::filesystem::path& path);

}  // namespace sra
