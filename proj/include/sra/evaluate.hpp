#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sra/augment.hpp"
#include "sra/corpus.hpp"
#include "sra/longtail.hpp"

namespace sra {

struct PerLabelScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct EvalReport {
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;  // unweighted mean over the vocab; zero-support labels count as 0
  std::map<std::string, PerLabelScore> per_label;
  std::map<std::string, double> buckets;
  std::size_t n_samples = 0;

  nlohmann::json to_json() const;
};

// Per-label TP/FP/FN over label memberships. Micro-F1 pools counts across
// labels; for multi-label tasks the empty set contributes no membership
// events, so the implicit empty class never enters the scores.
EvalReport f1_scores(const std::vector<LabelSet>& gold, const std::vector<LabelSet>& pred,
                     const std::vector<std::string>& vocab);

std::map<std::string, double> bucketed_macro_f1(const EvalReport& report,
                                                const BucketAssignment& buckets);

// Paired bootstrap over test indices: resample with replacement, compute
// macro-F1(b) - macro-F1(a) per resample, take nearest-rank percentiles at
// (1-level)/2 and 1-(1-level)/2. Resample r draws from the SplitMix64
// substream seeded with mix64(seed, r), so results are deterministic and
// independent of scheduling.
std::pair<double, double> bootstrap_delta_ci(const std::vector<LabelSet>& gold,
                                             const std::vector<LabelSet>& pred_a,
                                             const std::vector<LabelSet>& pred_b,
                                             const std::vector<std::string>& vocab,
                                             std::size_t resamples = 10000,
                                             double level = 0.95,
                                             std::uint64_t seed = 42);

struct McNemarResult {
  std::size_t b = 0;  // a correct, b wrong
  std::size_t c = 0;  // a wrong, b correct
  double p_value = 1.0;
  std::string method = "exact";  // exact binomial below b+c=25, else chi-square
};

// Single-label only: correctness is exact label-set equality per sample.
McNemarResult mcnemar_test(const std::vector<LabelSet>& gold,
                           const std::vector<LabelSet>& pred_a,
                           const std::vector<LabelSet>& pred_b);

struct CoverageRow {
  double cutoff = 0.0;
  double coverage = 0.0;
  std::optional<double> mean_similarity;
};

std::vector<CoverageRow> coverage_similarity(
    const std::vector<std::pair<double, CoverageStats>>& stats_per_cutoff);

struct LabelDelta {
  std::string label;
  double f1_a = 0.0;
  double f1_b = 0.0;
  double delta = 0.0;
};

// Descending by delta, ties by ascending label, truncated to k.
std::vector<LabelDelta> top_k_label_deltas(const EvalReport& report_a,
                                           const EvalReport& report_b, std::size_t k);

struct ComparisonReport {
  double delta_macro_f1 = 0.0;
  std::pair<double, double> bootstrap_ci{0.0, 0.0};
  std::size_t bootstrap_resamples = 0;
  double level = 0.95;
  std::uint64_t seed = 42;
  std::optional<McNemarResult> mcnemar;  // single-label only
  std::vector<LabelDelta> per_label_deltas;
  std::map<std::string, std::pair<double, double>> bucket_macro_f1;  // name -> (a, b)

  nlohmann::json to_json() const;
};

ComparisonReport compare_predictions(const std::vector<LabelSet>& gold,
                                     const std::vector<LabelSet>& pred_a,
                                     const std::vector<LabelSet>& pred_b,
                                     const std::vector<std::string>& vocab, Task task,
                                     const std::optional<BucketAssignment>& buckets,
                                     std::size_t resamples = 10000, double level = 0.95,
                                     std::uint64_t seed = 42);

}  // namespace sra
