#include "sra/classify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "sra/errors.hpp"
#include "sra/evaluate.hpp"
#include "sra/util.hpp"

namespace sra {

void TrainConfig::validate() const {
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (learning_rate <= 0.0) throw ConfigError("learning_rate must be > 0");
  if (batch_size_train < 1 || batch_size_eval < 1) {
    throw ConfigError("batch sizes must be >= 1");
  }
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (grad_clip_norm <= 0.0) throw ConfigError("grad_clip_norm must be > 0");
}

FeatureMap build_feature_map(const std::vector<std::string>& texts,
                             const FeaturizerParams& params) {
  if (texts.empty()) throw ValidationError("build_feature_map: empty corpus");
  std::map<std::string, std::size_t> df;
  for (const auto& text : texts) {
    std::map<std::string, std::size_t> seen;
    for (const auto& term : text::unigrams_and_bigrams(text)) ++seen[term];
    for (const auto& [term, tf] : seen) ++df[term];
  }
  FeatureMap map;
  map.params = params;
  const double max_docs = params.max_df * static_cast<double>(texts.size());
  for (const auto& [term, count] : df) {
    if (count < params.min_df) continue;
    if (static_cast<double>(count) > max_docs) continue;
    map.index.emplace(term, static_cast<int>(map.terms.size()));
    map.terms.push_back(term);
    map.idf.push_back(std::log((1.0 + static_cast<double>(texts.size())) /
                               (1.0 + static_cast<double>(count))) +
                      1.0);
  }
  if (map.terms.empty()) {
    throw ValidationError("build_feature_map: empty vocabulary after pruning");
  }
  return map;
}

std::vector<SparseRow> featurize(const std::vector<std::string>& texts,
                                 const FeatureMap& map) {
  std::vector<SparseRow> rows;
  rows.reserve(texts.size());
  for (const auto& text : texts) {
    std::map<std::string, std::size_t> counts;
    for (const auto& term : text::unigrams_and_bigrams(text)) ++counts[term];
    SparseRow row;
    for (const auto& [term, tf] : counts) {
      auto it = map.index.find(term);
      if (it == map.index.end()) continue;
      double w = map.params.sublinear_tf ? 1.0 + std::log(static_cast<double>(tf))
                                         : static_cast<double>(tf);
      row.emplace_back(it->second, w * map.idf[it->second]);
    }
    std::sort(row.begin(), row.end());
    double norm2 = 0.0;
    for (const auto& [idx, w] : row) norm2 += w * w;
    if (norm2 > 0.0) {
      const double inv = 1.0 / std::sqrt(norm2);
      for (auto& [idx, w] : row) w *= inv;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace detail {

std::vector<double> logits_of(const LinearParams& params, const SparseRow& row) {
  std::vector<double> logits(params.bias);
  for (std::size_t c = 0; c < logits.size(); ++c) {
    const auto& w = params.weights[c];
    double dot = 0.0;
    for (const auto& [idx, x] : row) dot += w[idx] * x;
    logits[c] += dot;
  }
  return logits;
}

std::vector<double> softmax(const std::vector<double>& logits) {
  double max_logit = logits[0];
  for (double z : logits) max_logit = std::max(max_logit, z);
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) {
    p[c] = std::exp(logits[c] - max_logit);
    sum += p[c];
  }
  for (double& x : p) x /= sum;
  return p;
}

namespace {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Stable BCE with logits: max(z,0) - z*y + log(1 + exp(-|z|)).
inline double bce_with_logits(double z, double y) {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

}  // namespace

double loss_value(const LinearParams& params, const std::vector<SparseRow>& rows,
                  const Targets& targets, Task task) {
  double total = 0.0;
  const std::size_t n_classes = params.bias.size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto logits = logits_of(params, rows[i]);
    if (task == Task::SingleLabel) {
      auto p = softmax(logits);
      total += -std::log(std::max(p[static_cast<std::size_t>(targets[i][0])], 1e-300));
    } else {
      std::vector<char> y(n_classes, 0);
      for (int c : targets[i]) y[static_cast<std::size_t>(c)] = 1;
      for (std::size_t c = 0; c < n_classes; ++c) {
        total += bce_with_logits(logits[c], y[c] ? 1.0 : 0.0);
      }
    }
  }
  return total / static_cast<double>(rows.size());
}

double gradients(const LinearParams& params, const std::vector<SparseRow>& rows,
                 const Targets& targets, Task task,
                 std::vector<std::vector<double>>& grad_w, std::vector<double>& grad_b) {
  const std::size_t n_classes = params.bias.size();
  for (auto& g : grad_w) std::fill(g.begin(), g.end(), 0.0);
  std::fill(grad_b.begin(), grad_b.end(), 0.0);

  double total_loss = 0.0;
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  std::vector<char> y(n_classes, 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto logits = logits_of(params, rows[i]);
    std::vector<double> g_z(n_classes);
    if (task == Task::SingleLabel) {
      auto p = softmax(logits);
      const auto gold = static_cast<std::size_t>(targets[i][0]);
      total_loss += -std::log(std::max(p[gold], 1e-300));
      for (std::size_t c = 0; c < n_classes; ++c) g_z[c] = p[c];
      g_z[gold] -= 1.0;
    } else {
      std::fill(y.begin(), y.end(), 0);
      for (int c : targets[i]) y[static_cast<std::size_t>(c)] = 1;
      for (std::size_t c = 0; c < n_classes; ++c) {
        const double target = y[c] ? 1.0 : 0.0;
        total_loss += bce_with_logits(logits[c], target);
        g_z[c] = sigmoid(logits[c]) - target;
      }
    }
    for (std::size_t c = 0; c < n_classes; ++c) {
      const double gc = g_z[c] * inv_n;
      grad_b[c] += gc;
      auto& gw = grad_w[c];
      for (const auto& [idx, x] : rows[i]) gw[idx] += gc * x;
    }
  }
  return total_loss * inv_n;
}

}  // namespace detail

bool EarlyStopper::observe(std::size_t epoch, double metric) {
  if (metric > best_) {
    best_ = metric;
    best_epoch_ = epoch;
    bad_ = 0;
    return false;
  }
  return ++bad_ >= patience_;
}

namespace {

std::vector<LabelSet> predict_rows(const detail::LinearParams& params,
                                   const std::vector<SparseRow>& rows, Task task,
                                   const std::vector<std::string>& vocab,
                                   double threshold) {
  std::vector<LabelSet> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    auto logits = detail::logits_of(params, row);
    LabelSet labels;
    if (task == Task::SingleLabel) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < logits.size(); ++c) {
        if (logits[c] > logits[best]) best = c;  // first max wins: vocab is ascending
      }
      labels.insert(vocab[best]);
    } else {
      for (std::size_t c = 0; c < logits.size(); ++c) {
        if (1.0 / (1.0 + std::exp(-logits[c])) >= threshold) labels.insert(vocab[c]);
      }
    }
    out.push_back(std::move(labels));
  }
  return out;
}

detail::Targets encode_targets(const std::vector<AugmentedSample>& samples,
                               const std::vector<std::string>& vocab) {
  std::unordered_map<std::string, int> index;
  for (std::size_t i = 0; i < vocab.size(); ++i) index.emplace(vocab[i], static_cast<int>(i));
  detail::Targets targets;
  targets.reserve(samples.size());
  for (const auto& s : samples) {
    std::vector<int> t;
    for (const auto& label : s.base.labels) {
      auto it = index.find(label);
      if (it == index.end()) {
        throw ValidationError("label '" + label + "' not in label vocabulary");
      }
      t.push_back(it->second);
    }
    targets.push_back(std::move(t));
  }
  return targets;
}

std::string train_fingerprint(const TrainConfig& cfg, const FeaturizerParams& fp,
                              Task task) {
  std::string blob = "sra.train/1|" + to_string(task) + "|lr=" +
                     std::to_string(cfg.learning_rate) + "|bt=" +
                     std::to_string(cfg.batch_size_train) + "|be=" +
                     std::to_string(cfg.batch_size_eval) + "|pat=" +
                     std::to_string(cfg.patience) + "|ep=" +
                     std::to_string(cfg.max_epochs) + "|seed=" +
                     std::to_string(cfg.seed) + "|clip=" +
                     std::to_string(cfg.grad_clip_norm) + "|thr=" +
                     std::to_string(cfg.multilabel_threshold) + "|mindf=" +
                     std::to_string(fp.min_df) + "|maxdf=" + std::to_string(fp.max_df) +
                     "|sub=" + (fp.sublinear_tf ? "1" : "0");
  return to_hex(fnv1a64(blob));
}

}  // namespace

std::pair<ClassifierModel, TrainDiagnostics> train(
    const std::vector<AugmentedSample>& train_split,
    const std::vector<AugmentedSample>& val_split, Task task,
    const std::vector<std::string>& label_vocab, const TrainConfig& config,
    const FeaturizerParams& featurizer_params) {
  config.validate();
  if (train_split.empty()) throw ValidationError("train: empty train split");
  if (val_split.empty()) throw ValidationError("train: empty validation split");
  if (label_vocab.empty()) throw ValidationError("train: empty label vocabulary");

  std::vector<std::string> train_texts, val_texts;
  for (const auto& s : train_split) train_texts.push_back(s.composed_text);
  for (const auto& s : val_split) val_texts.push_back(s.composed_text);

  FeatureMap map = build_feature_map(train_texts, featurizer_params);
  auto train_rows = featurize(train_texts, map);
  auto val_rows = featurize(val_texts, map);
  auto train_targets = encode_targets(train_split, label_vocab);

  std::vector<LabelSet> val_gold;
  for (const auto& s : val_split) val_gold.push_back(s.base.labels);

  const std::size_t n_classes = label_vocab.size();
  const std::size_t n_features = map.size();
  detail::LinearParams params;
  params.weights.assign(n_classes, std::vector<double>(n_features, 0.0));
  params.bias.assign(n_classes, 0.0);

  std::vector<std::vector<double>> grad_w(n_classes,
                                          std::vector<double>(n_features, 0.0));
  std::vector<double> grad_b(n_classes, 0.0);

  const std::size_t steps_per_epoch =
      (train_rows.size() + config.batch_size_train - 1) / config.batch_size_train;
  const std::size_t total_steps = steps_per_epoch * config.max_epochs;

  TrainDiagnostics diag;
  EarlyStopper stopper(config.patience);
  detail::LinearParams best = params;

  std::vector<std::size_t> order(train_rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    SplitMix64 rng(mix64(config.seed, epoch));
    deterministic_shuffle(order, rng);

    for (std::size_t start = 0; start < order.size(); start += config.batch_size_train) {
      const std::size_t end = std::min(start + config.batch_size_train, order.size());
      std::vector<SparseRow> batch_rows;
      detail::Targets batch_targets;
      batch_rows.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        batch_rows.push_back(train_rows[order[i]]);
        batch_targets.push_back(train_targets[order[i]]);
      }
      double loss = detail::gradients(params, batch_rows, batch_targets, task, grad_w,
                                      grad_b);
      if (!std::isfinite(loss)) {
        throw Error("training diverged: non-finite loss at epoch " +
                    std::to_string(epoch) + ", step " + std::to_string(step) +
                    " (lr=" + std::to_string(config.learning_rate) + ")");
      }

      double norm2 = 0.0;
      for (const auto& g : grad_w) {
        for (double x : g) norm2 += x * x;
      }
      for (double x : grad_b) norm2 += x * x;
      double norm = std::sqrt(norm2);
      if (norm > config.grad_clip_norm && norm > 0.0) {
        const double scale = config.grad_clip_norm / norm;
        for (auto& g : grad_w) {
          for (double& x : g) x *= scale;
        }
        for (double& x : grad_b) x *= scale;
        norm = config.grad_clip_norm;
      }
      diag.step_grad_norms.push_back(norm);

      const double lr = config.learning_rate *
                        (1.0 - static_cast<double>(step) / static_cast<double>(total_steps));
      for (std::size_t c = 0; c < n_classes; ++c) {
        auto& w = params.weights[c];
        const auto& g = grad_w[c];
        for (std::size_t f = 0; f < n_features; ++f) w[f] -= lr * g[f];
        params.bias[c] -= lr * grad_b[c];
      }
      ++step;
    }

    auto val_pred = predict_rows(params, val_rows, task, label_vocab,
                                 config.multilabel_threshold);
    const double micro = f1_scores(val_gold, val_pred, label_vocab).micro_f1;
    diag.val_micro_f1.push_back(micro);
    const bool stop = stopper.observe(epoch, micro);
    if (stopper.best_epoch() == epoch) best = params;
    diag.epochs_run = epoch;
    if (stop) break;
  }
  diag.best_epoch = stopper.best_epoch();
  diag.total_steps = step;

  ClassifierModel model;
  model.task = task;
  model.label_vocab = label_vocab;
  model.feature_map = std::move(map);
  model.weights = std::move(best.weights);
  model.bias = std::move(best.bias);
  model.multilabel_threshold = config.multilabel_threshold;
  model.config_fingerprint = train_fingerprint(config, featurizer_params, task);
  return {std::move(model), std::move(diag)};
}

std::vector<LabelSet> predict(const ClassifierModel& model,
                              const std::vector<std::string>& texts) {
  detail::LinearParams params{model.weights, model.bias};
  auto rows = featurize(texts, model.feature_map);
  return predict_rows(params, rows, model.task, model.label_vocab,
                      model.multilabel_threshold);
}

std::vector<std::vector<double>> predict_scores(const ClassifierModel& model,
                                                const std::vector<std::string>& texts) {
  detail::LinearParams params{model.weights, model.bias};
  auto rows = featurize(texts, model.feature_map);
  std::vector<std::vector<double>> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    auto logits = detail::logits_of(params, row);
    if (model.task == Task::SingleLabel) {
      out.push_back(detail::softmax(logits));
    } else {
      for (double& z : logits) z = 1.0 / (1.0 + std::exp(-z));
      out.push_back(std::move(logits));
    }
  }
  return out;
}

void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format"] = "sra.model/1";
  j["task"] = to_string(model.task);
  j["label_vocab"] = model.label_vocab;
  j["feature_map"] = {{"min_df", model.feature_map.params.min_df},
                      {"max_df", model.feature_map.params.max_df},
                      {"sublinear_tf", model.feature_map.params.sublinear_tf},
                      {"terms", model.feature_map.terms},
                      {"idf", model.feature_map.idf}};
  j["weights"] = model.weights;
  j["bias"] = model.bias;
  j["multilabel_threshold"] = model.multilabel_threshold;
  j["config_fingerprint"] = model.config_fingerprint;
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << j.dump() << "\n";
}

ClassifierModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid model file: ") + e.what());
  }
  if (j.value("format", "") != "sra.model/1") {
    throw ParseError("unsupported model format tag: " + j.value("format", "<missing>"));
  }
  ClassifierModel model;
  model.task = task_from_string(j["task"].get<std::string>());
  model.label_vocab = j["label_vocab"].get<std::vector<std::string>>();
  const auto& fm = j["feature_map"];
  model.feature_map.params.min_df = fm["min_df"].get<std::size_t>();
  model.feature_map.params.max_df = fm["max_df"].get<double>();
  model.feature_map.params.sublinear_tf = fm["sublinear_tf"].get<bool>();
  model.feature_map.terms = fm["terms"].get<std::vector<std::string>>();
  model.feature_map.idf = fm["idf"].get<std::vector<double>>();
  for (std::size_t i = 0; i < model.feature_map.terms.size(); ++i) {
    model.feature_map.index.emplace(model.feature_map.terms[i], static_cast<int>(i));
  }
  model.weights = j["weights"].get<std::vector<std::vector<double>>>();
  model.bias = j["bias"].get<std::vector<double>>();
  model.multilabel_threshold = j["multilabel_threshold"].get<double>();
  model.config_fingerprint = j["config_fingerprint"].get<std::string>();
  return model;
}

}  // namespace sra
