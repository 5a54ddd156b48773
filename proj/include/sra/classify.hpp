#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "sra/augment.hpp"
#include "sra/corpus.hpp"

namespace sra {

struct FeaturizerParams {
  std::size_t min_df = 2;
  double max_df = 0.8;
  bool sublinear_tf = true;
};

// Frozen sparse vocabulary: TF-IDF weighting over word unigrams and bigrams
// of the composed text, L2-normalized rows. Out-of-vocabulary terms are
// dropped silently when transforming.
struct FeatureMap {
  FeaturizerParams params;
  std::vector<std::string> terms;
  std::unordered_map<std::string, int> index;
  std::vector<double> idf;

  std::size_t size() const { return terms.size(); }
};

using SparseRow = std::vector<std::pair<int, double>>;

FeatureMap build_feature_map(const std::vector<std::string>& texts,
                             const FeaturizerParams& params = {});
std::vector<SparseRow> featurize(const std::vector<std::string>& texts,
                                 const FeatureMap& map);

struct TrainConfig {
  double learning_rate = 0.1;  // stand-in scale; schedule shape matches the protocol
  std::size_t batch_size_train = 32;
  std::size_t batch_size_eval = 64;
  std::size_t patience = 3;
  std::size_t max_epochs = 30;
  std::uint64_t seed = 42;
  double grad_clip_norm = 1.0;
  double multilabel_threshold = 0.5;

  void validate() const;
};

struct ClassifierModel {
  Task task = Task::SingleLabel;
  std::vector<std::string> label_vocab;  // ascending; tie-breaks fall out of order
  FeatureMap feature_map;
  std::vector<std::vector<double>> weights;  // [class][feature]
  std::vector<double> bias;                  // [class]
  double multilabel_threshold = 0.5;
  std::string config_fingerprint;
};

struct TrainDiagnostics {
  std::vector<double> val_micro_f1;       // per epoch
  std::vector<double> step_grad_norms;    // post-clip, per step
  std::size_t best_epoch = 0;             // 1-based
  std::size_t epochs_run = 0;
  std::size_t total_steps = 0;
};

// Mini-batch gradient descent on cross-entropy (single-label, softmax) or
// per-class binary cross-entropy (multi-label, sigmoid): linear LR decay, no
// warmup, gradient-norm clipping, early stopping on validation micro-F1 with
// the configured patience; returns best-epoch weights.
std::pair<ClassifierModel, TrainDiagnostics> train(
    const std::vector<AugmentedSample>& train_split,
    const std::vector<AugmentedSample>& val_split, Task task,
    const std::vector<std::string>& label_vocab, const TrainConfig& config,
    const FeaturizerParams& featurizer_params = {});

std::vector<LabelSet> predict(const ClassifierModel& model,
                              const std::vector<std::string>& texts);
// Per-class probabilities: softmax rows (single-label) or sigmoid scores.
std::vector<std::vector<double>> predict_scores(const ClassifierModel& model,
                                                const std::vector<std::string>& texts);

void save_model(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_model(const std::filesystem::path& path);

// Watches a metric sequence; signals a stop after `patience` consecutive
// non-improving observations. Improvement is strict.
class EarlyStopper {
 public:
  explicit EarlyStopper(std::size_t patience) : patience_(patience) {}
  // Returns true when training should stop after this epoch.
  bool observe(std::size_t epoch, double metric);
  std::size_t best_epoch() const { return best_epoch_; }
  double best_metric() const { return best_; }

 private:
  std::size_t patience_;
  double best_ = -1.0;
  std::size_t bad_ = 0;
  std::size_t best_epoch_ = 0;
};

namespace detail {

struct LinearParams {
  std::vector<std::vector<double>> weights;  // [class][feature]
  std::vector<double> bias;
};

// Class-index targets; single-label rows carry exactly one index.
using Targets = std::vector<std::vector<int>>;

double loss_value(const LinearParams& params, const std::vector<SparseRow>& rows,
                  const Targets& targets, Task task);
// Mean gradient over the given rows; buffers are dense and zeroed inside.
// Returns the mean loss of the same forward pass.
double gradients(const LinearParams& params, const std::vector<SparseRow>& rows,
                 const Targets& targets, Task task,
                 std::vector<std::vector<double>>& grad_w, std::vector<double>& grad_b);
std::vector<double> logits_of(const LinearParams& params, const SparseRow& row);
std::vector<double> softmax(const std::vector<double>& logits);

}  // namespace detail
}  // namespace sra
