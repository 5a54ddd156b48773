#include "sra/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sra/errors.hpp"
#include "sra/util.hpp"

namespace sra {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << content;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return j;
}

std::string split_fingerprint(const std::vector<const Sample*>& samples) {
  std::uint64_t h = fnv1a64(std::string("sra.split/1"));
  for (const Sample* s : samples) {
    h = fnv1a64(s->id, h);
    h = fnv1a64("\x1f", h);
    for (const auto& label : s->labels) {
      h = fnv1a64(label, h);
      h = fnv1a64("\x1e", h);
    }
    h = fnv1a64("\x1d", h);
  }
  return to_hex(h);
}

std::shared_ptr<const EmbeddingProvider> make_provider(const RunConfig& cfg) {
  if (cfg.embedding_provider == "file") {
    return std::make_shared<PrecomputedFileProvider>(cfg.embedding_file);
  }
  return std::make_shared<TrigramProjectionProvider>(cfg.trigram);
}

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e.what());
  }
}

struct AugmentationOutcome {
  std::map<Split, std::vector<AugmentedSample>> splits;
  std::map<Split, CoverageStats> stats;
  std::optional<LowFrequencySet> low;
  CoverageStats total() const {
    CoverageStats out;
    for (const auto& [split, s] : stats) out.merge(s);
    return out;
  }
};

AugmentationOutcome augment_all_splits(const RunConfig& cfg, const Dataset& dataset,
                                       const FrequencyTable& freq) {
  AugmentationOutcome outcome;
  EligibilityMode mode = EligibilityMode::Policy;
  if (cfg.arm == "baseline") mode = EligibilityMode::None;
  if (cfg.arm == "full") mode = EligibilityMode::All;

  AugmentationConfig aug_cfg = cfg.augmentation;
  aug_cfg.k = cfg.retrieval.k;

  if (mode == EligibilityMode::Policy) {
    outcome.low = stage("select", [&] { return select_low_frequency(freq, cfg.policy); });
  }

  std::optional<Retriever> retriever;
  if (mode != EligibilityMode::None) {
    retriever = stage("index", [&] {
      return Retriever::build(dataset, cfg.sparse, make_provider(cfg), cfg.retrieval);
    });
  }

  stage("augment", [&] {
    for (Split split : kAllSplits) {
      auto [samples, stats] =
          augment_split(dataset, split, outcome.low, cfg.gate, mode,
                        retriever ? &*retriever : nullptr, aug_cfg);
      outcome.splits[split] = std::move(samples);
      outcome.stats[split] = std::move(stats);
    }
    return 0;
  });
  return outcome;
}

nlohmann::json coverage_document(const AugmentationOutcome& outcome,
                                 const std::vector<double>& percentiles) {
  nlohmann::json by_split = nlohmann::json::object();
  for (const auto& [split, stats] : outcome.stats) {
    nlohmann::json entry = stats.to_json();
    std::vector<std::size_t> lengths;
    for (const auto& s : outcome.splits.at(split)) lengths.push_back(s.token_count);
    nlohmann::json pct = nlohmann::json::object();
    for (const auto& [p, v] : length_percentiles(lengths, percentiles)) {
      pct[format_double(p)] = v;
    }
    entry["token_length_percentiles"] = std::move(pct);
    by_split[to_string(split)] = std::move(entry);
  }
  nlohmann::json j;
  j["format"] = "sra.coverage/1";
  j["by_split"] = std::move(by_split);
  j["pooled"] = outcome.total().to_json();
  return j;
}

nlohmann::json buckets_document(const BucketAssignment& buckets,
                                const FrequencyTable& freq) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& bucket : buckets.buckets) {
    arr.push_back({{"name", bucket.name}, {"labels", bucket.labels}});
  }
  return {{"format", "sra.buckets/1"},
          {"fingerprint", freq.fingerprint()},
          {"fractions", buckets.fractions},
          {"buckets", arr}};
}

BucketAssignment buckets_from_document(const nlohmann::json& j) {
  BucketAssignment assignment;
  assignment.fractions = j.at("fractions").get<std::vector<double>>();
  for (const auto& b : j.at("buckets")) {
    BucketAssignment::Bucket bucket;
    bucket.name = b.at("name").get<std::string>();
    for (const auto& l : b.at("labels")) bucket.labels.insert(l.get<std::string>());
    assignment.buckets.push_back(std::move(bucket));
  }
  return assignment;
}

void write_predictions(const fs::path& path, Split split, const RunConfig& cfg,
                       const std::vector<AugmentedSample>& samples,
                       const std::vector<LabelSet>& predicted,
                       const std::vector<std::vector<double>>& scores,
                       const std::vector<std::string>& vocab,
                       const std::string& fingerprint) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path.string());
  nlohmann::json header;
  header["record_type"] = "header";
  header["format"] = "sra.predictions/1";
  header["split"] = to_string(split);
  header["task"] = to_string(cfg.task);
  header["arm"] = cfg.arm;
  header["label_vocab"] = vocab;
  header["fingerprint"] = fingerprint;
  out << header.dump() << "\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    nlohmann::json record;
    record["id"] = samples[i].base.id;
    record["gold"] = samples[i].base.labels;
    record["predicted"] = predicted[i];
    nlohmann::json label_scores = nlohmann::json::object();
    for (const auto& label : predicted[i]) {
      auto it = std::find(vocab.begin(), vocab.end(), label);
      label_scores[label] = scores[i][static_cast<std::size_t>(it - vocab.begin())];
    }
    record["scores"] = std::move(label_scores);
    out << record.dump() << "\n";
  }
}

struct PredictionsFile {
  Task task = Task::SingleLabel;
  std::string split;
  std::string arm;
  std::string fingerprint;
  std::vector<std::string> vocab;
  std::vector<std::string> ids;
  std::vector<LabelSet> gold;
  std::vector<LabelSet> predicted;
};

PredictionsFile load_predictions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open predictions: " + path.string());
  PredictionsFile file;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
    if (record.value("record_type", "") == "header") {
      file.task = task_from_string(record.at("task").get<std::string>());
      file.split = record.at("split").get<std::string>();
      file.arm = record.value("arm", "");
      file.fingerprint = record.at("fingerprint").get<std::string>();
      file.vocab = record.at("label_vocab").get<std::vector<std::string>>();
      have_header = true;
      continue;
    }
    file.ids.push_back(record.at("id").get<std::string>());
    LabelSet gold, pred;
    for (const auto& l : record.at("gold")) gold.insert(l.get<std::string>());
    for (const auto& l : record.at("predicted")) pred.insert(l.get<std::string>());
    file.gold.push_back(std::move(gold));
    file.predicted.push_back(std::move(pred));
  }
  if (!have_header) throw ParseError("predictions file lacks a header: " + path.string());
  return file;
}

// The arm is deliberately absent: an sra run whose low-frequency set is empty
// must produce a report byte-identical to the baseline arm's.
nlohmann::json report_document(const EvalReport& report, const RunConfig& cfg,
                               Split split, const std::string& fingerprint) {
  nlohmann::json j = report.to_json();
  j["format"] = "sra.report/1";
  j["task"] = to_string(cfg.task);
  j["split"] = to_string(split);
  j["fingerprint"] = fingerprint;
  return j;
}

std::string csv_number(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

RunArtifacts run_experiment(const RunConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);

  RunConfig resolved = cfg;
  resolved.out_dir = out_dir.string();
  write_text(out_dir / "manifest.cfg", render_config(resolved.to_key_values()));

  Dataset dataset = load_dataset(cfg.dataset_path, cfg.task);
  FrequencyTable freq = frequency_table(dataset);
  write_json(out_dir / "freq_table.json", freq.to_json());

  BucketAssignment buckets =
      stage("buckets", [&] { return bucketize(freq, cfg.bucket_fractions); });
  write_json(out_dir / "buckets.json", buckets_document(buckets, freq));

  AugmentationOutcome outcome = augment_all_splits(cfg, dataset, freq);
  if (outcome.low) write_json(out_dir / "low_set.json", outcome.low->to_json());
  for (Split split : kAllSplits) {
    save_augmented_split(outcome.splits[split], outcome.low, cfg.augmentation, split,
                         out_dir / ("augmented_" + to_string(split) + ".jsonl"));
  }
  write_json(out_dir / "coverage.json", coverage_document(outcome, cfg.percentiles));

  auto [model, diagnostics] = stage("train", [&] {
    return train(outcome.splits[Split::Train], outcome.splits[Split::Validation],
                 cfg.task, dataset.label_vocab, cfg.training, cfg.featurizer);
  });
  save_model(model, out_dir / "model.json");

  RunArtifacts artifacts;
  artifacts.dir = out_dir;
  artifacts.coverage_by_split["train"] = outcome.stats[Split::Train];
  artifacts.coverage_by_split["validation"] = outcome.stats[Split::Validation];
  artifacts.coverage_by_split["test"] = outcome.stats[Split::Test];
  artifacts.coverage_total = outcome.total();

  for (Split split : {Split::Validation, Split::Test}) {
    const auto& samples = outcome.splits[split];
    std::vector<std::string> texts;
    std::vector<LabelSet> gold;
    std::vector<const Sample*> bases;
    for (const auto& s : samples) {
      texts.push_back(s.composed_text);
      gold.push_back(s.base.labels);
      bases.push_back(&s.base);
    }
    auto [predicted, scores] = stage("predict", [&] {
      return std::make_pair(predict(model, texts), predict_scores(model, texts));
    });
    EvalReport report = stage("evaluate", [&] { return f1_scores(gold, predicted, dataset.label_vocab); });
    report.buckets = bucketed_macro_f1(report, buckets);
    const std::string fingerprint = split_fingerprint(bases);

    const bool is_test = split == Split::Test;
    write_predictions(out_dir / (is_test ? "predictions_test.jsonl"
                                         : "predictions_validation.jsonl"),
                      split, cfg, samples, predicted, scores, dataset.label_vocab,
                      fingerprint);
    write_json(out_dir / (is_test ? "report.json" : "report_validation.json"),
               report_document(report, cfg, split, fingerprint));
    if (split == Split::Test) {
      artifacts.test_report = report;
      artifacts.test_fingerprint = fingerprint;
    } else {
      artifacts.val_report = report;
    }
  }

  nlohmann::json diag;
  diag["format"] = "sra.train_diag/1";
  diag["val_micro_f1"] = diagnostics.val_micro_f1;
  diag["best_epoch"] = diagnostics.best_epoch;
  diag["epochs_run"] = diagnostics.epochs_run;
  diag["total_steps"] = diagnostics.total_steps;
  double max_norm = 0.0;
  for (double g : diagnostics.step_grad_norms) max_norm = std::max(max_norm, g);
  diag["max_clipped_grad_norm"] = max_norm;
  write_json(out_dir / "train_diagnostics.json", diag);

  return artifacts;
}

SweepArtifacts run_sweep(const RunConfig& cfg, const fs::path& out_dir) {
  if (cfg.sweep_cutoffs.size() < 2) {
    throw ConfigError("sweep requires at least 2 cutoffs");
  }
  std::vector<double> cutoffs = cfg.sweep_cutoffs;
  std::sort(cutoffs.begin(), cutoffs.end());

  SweepArtifacts sweep;
  sweep.dir = out_dir;
  fs::create_directories(out_dir);

  std::vector<RunArtifacts> runs;
  for (double cutoff : cutoffs) {
    RunConfig child = cfg;
    if (cutoff == 0.0) {
      child.arm = "baseline";
    } else {
      child.arm = "sra";
      child.policy.mode = PolicyMode::CutoffRatio;
      child.policy.alpha = cutoff;
    }
    const fs::path child_dir = out_dir / ("cutoff_" + format_double(cutoff));
    RunArtifacts artifacts = run_experiment(child, child_dir);

    SweepRow row;
    row.cutoff = cutoff;
    row.dir = child_dir.filename().string();
    row.coverage = artifacts.coverage_total.coverage();
    row.mean_similarity = artifacts.coverage_total.mean_similarity();
    row.test_micro_f1 = artifacts.test_report.micro_f1;
    row.test_macro_f1 = artifacts.test_report.macro_f1;
    row.val_micro_f1 = artifacts.val_report.micro_f1;
    row.val_macro_f1 = artifacts.val_report.macro_f1;
    sweep.rows.push_back(row);
    runs.push_back(std::move(artifacts));
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < sweep.rows.size(); ++i) {
    const double candidate = cfg.selection_metric == "micro_f1"
                                 ? sweep.rows[i].val_micro_f1
                                 : sweep.rows[i].val_macro_f1;
    const double incumbent = cfg.selection_metric == "micro_f1"
                                 ? sweep.rows[best].val_micro_f1
                                 : sweep.rows[best].val_macro_f1;
    if (candidate > incumbent) best = i;
  }
  sweep.rows[best].selected = true;
  sweep.best_cutoff = sweep.rows[best].cutoff;
  sweep.test_report_at_best = runs[best].test_report;

  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : sweep.rows) {
    nlohmann::json r;
    r["cutoff"] = row.cutoff;
    r["dir"] = row.dir;
    r["coverage"] = row.coverage;
    r["mean_similarity"] = row.mean_similarity ? nlohmann::json(*row.mean_similarity)
                                               : nlohmann::json(nullptr);
    r["micro_f1"] = row.test_micro_f1;
    r["macro_f1"] = row.test_macro_f1;
    r["val_micro_f1"] = row.val_micro_f1;
    r["val_macro_f1"] = row.val_macro_f1;
    r["selected"] = row.selected;
    rows.push_back(std::move(r));
  }
  nlohmann::json doc;
  doc["format"] = "sra.sweep/1";
  doc["selection_metric"] = cfg.selection_metric;
  doc["best_cutoff"] = sweep.best_cutoff;
  doc["rows"] = std::move(rows);
  doc["test_report_at_best"] = sweep.test_report_at_best.to_json();
  write_json(out_dir / "sweep.json", doc);

  std::string csv = "cutoff,coverage,mean_similarity,micro_f1,macro_f1\n";
  for (const auto& row : sweep.rows) {
    csv += format_double(row.cutoff) + "," + csv_number(row.coverage) + ",";
    if (row.mean_similarity) csv += csv_number(*row.mean_similarity);
    csv += "," + csv_number(row.test_micro_f1) + "," + csv_number(row.test_macro_f1) + "\n";
  }
  write_text(out_dir / "sweep.csv", csv);
  return sweep;
}

nlohmann::json analyze_dataset(const RunConfig& cfg) {
  Dataset dataset = load_dataset(cfg.dataset_path, cfg.task);
  FrequencyTable freq = frequency_table(dataset);
  BucketAssignment buckets = bucketize(freq, cfg.bucket_fractions);

  nlohmann::json j;
  j["format"] = "sra.analysis/1";
  j["task"] = to_string(cfg.task);
  j["dataset_path"] = cfg.dataset_path;
  nlohmann::json sizes = nlohmann::json::object();
  for (Split split : kAllSplits) sizes[to_string(split)] = dataset.split_size(split);
  j["split_sizes"] = std::move(sizes);
  j["label_vocab_size"] = dataset.label_vocab.size();
  j["frequency_table"] = freq.counts;
  j["frequency_fingerprint"] = freq.fingerprint();

  if (cfg.task == Task::MultiLabel) {
    j["empty_count_train"] = freq.empty_count;
    nlohmann::json shares = nlohmann::json::object();
    for (Split split : kAllSplits) {
      auto samples = dataset.split_samples(split);
      std::size_t empty = 0;
      for (const Sample* s : samples) {
        if (s->labels.empty()) ++empty;
      }
      shares[to_string(split)] =
          samples.empty() ? 0.0 : static_cast<double>(empty) / static_cast<double>(samples.size());
    }
    j["empty_shares"] = std::move(shares);
  }

  nlohmann::json bucket_rows = nlohmann::json::array();
  for (const auto& bucket : buckets.buckets) {
    std::size_t min_f = 0, max_f = 0, sum = 0;
    bool first = true;
    for (const auto& label : bucket.labels) {
      const std::size_t f = freq.counts.at(label);
      if (first) {
        min_f = max_f = f;
        first = false;
      }
      min_f = std::min(min_f, f);
      max_f = std::max(max_f, f);
      sum += f;
    }
    nlohmann::json row;
    row["name"] = bucket.name;
    row["classes"] = bucket.labels.size();
    row["avg_frequency"] = bucket.labels.empty()
                               ? 0.0
                               : static_cast<double>(sum) / static_cast<double>(bucket.labels.size());
    row["min_frequency"] = min_f;
    row["max_frequency"] = max_f;
    bucket_rows.push_back(std::move(row));
  }
  j["buckets"] = std::move(bucket_rows);

  nlohmann::json percentiles = nlohmann::json::object();
  for (Split split : kAllSplits) {
    std::vector<std::size_t> lengths;
    for (const Sample* s : dataset.split_samples(split)) {
      lengths.push_back(text::whitespace_token_count(s->text));
    }
    nlohmann::json pct = nlohmann::json::object();
    for (const auto& [p, v] : length_percentiles(lengths, cfg.percentiles)) {
      pct[format_double(p)] = v;
    }
    percentiles[to_string(split)] = std::move(pct);
  }
  j["token_length_percentiles"] = std::move(percentiles);
  return j;
}

void cmd_analyze(const RunConfig& cfg, const fs::path& out_dir) {
  nlohmann::json j = analyze_dataset(cfg);
  fs::create_directories(out_dir);
  write_json(out_dir / "analysis.json", j);
}

void cmd_index(const RunConfig& cfg, const fs::path& out_dir) {
  Dataset dataset = load_dataset(cfg.dataset_path, cfg.task);
  std::vector<std::pair<std::string, std::string>> docs;
  for (const Sample* s : dataset.split_samples(Split::Train)) {
    docs.emplace_back(s->id, s->text);
  }
  SparseIndex index = stage("index", [&] { return build_sparse_index(docs, cfg.sparse); });
  fs::create_directories(out_dir);
  save_sparse_index(index, out_dir / "sparse_index.json");
}

void cmd_augment(const RunConfig& cfg, const fs::path& out_dir) {
  Dataset dataset = load_dataset(cfg.dataset_path, cfg.task);
  FrequencyTable freq = frequency_table(dataset);
  AugmentationOutcome outcome = augment_all_splits(cfg, dataset, freq);
  fs::create_directories(out_dir);
  if (outcome.low) write_json(out_dir / "low_set.json", outcome.low->to_json());
  for (Split split : kAllSplits) {
    save_augmented_split(outcome.splits[split], outcome.low, cfg.augmentation, split,
                         out_dir / ("augmented_" + to_string(split) + ".jsonl"));
  }
  write_json(out_dir / "coverage.json", coverage_document(outcome, cfg.percentiles));
}

ComparisonReport compare_run_dirs(const fs::path& run_a, const fs::path& run_b,
                                  const CompareOptions& options,
                                  nlohmann::json* document) {
  PredictionsFile a = load_predictions(run_a / "predictions_test.jsonl");
  PredictionsFile b = load_predictions(run_b / "predictions_test.jsonl");
  if (a.fingerprint != b.fingerprint) {
    throw StageError("compare", "test split mismatch: " + a.fingerprint + " vs " +
                                    b.fingerprint);
  }
  std::optional<BucketAssignment> buckets;
  const fs::path bucket_path_a = run_a / "buckets.json";
  const fs::path bucket_path_b = run_b / "buckets.json";
  if (fs::exists(bucket_path_a) && fs::exists(bucket_path_b)) {
    nlohmann::json ja = read_json(bucket_path_a);
    nlohmann::json jb = read_json(bucket_path_b);
    if (ja.at("fingerprint") != jb.at("fingerprint")) {
      throw StageError("compare", "runs were built from different frequency tables");
    }
    buckets = buckets_from_document(ja);
  }
  ComparisonReport report =
      compare_predictions(a.gold, a.predicted, b.predicted, a.vocab, a.task, buckets,
                          options.resamples, options.level, options.seed);
  if (document) {
    nlohmann::json j = report.to_json();
    j["format"] = "sra.comparison/1";
    j["run_a"] = run_a.string();
    j["run_b"] = run_b.string();
    j["arm_a"] = a.arm;
    j["arm_b"] = b.arm;
    j["fingerprint"] = a.fingerprint;
    nlohmann::json top = nlohmann::json::array();
    for (const auto& d : top_k_label_deltas(f1_scores(a.gold, a.predicted, a.vocab),
                                            f1_scores(a.gold, b.predicted, a.vocab),
                                            options.top_k)) {
      top.push_back({{"label", d.label}, {"f1_a", d.f1_a}, {"f1_b", d.f1_b},
                     {"delta", d.delta}});
    }
    j["top_deltas"] = std::move(top);
    *document = std::move(j);
  }
  return report;
}

namespace {

std::string format_labels(const LabelSet& labels) {
  if (labels.empty()) return "(empty)";
  std::string out;
  for (const auto& l : labels) {
    if (!out.empty()) out += ", ";
    out += l;
  }
  return out;
}

}  // namespace

std::string inspect_run(const fs::path& run_dir, const std::string& id,
                        const std::optional<fs::path>& other_run) {
  KeyValues manifest = parse_config_file(run_dir / "manifest.cfg");
  RunConfig cfg = RunConfig::resolve(manifest);
  Dataset dataset = load_dataset(cfg.dataset_path, cfg.task);

  std::map<std::string, AugmentedSample> augmented;
  for (Split split : kAllSplits) {
    const fs::path path = run_dir / ("augmented_" + to_string(split) + ".jsonl");
    if (!fs::exists(path)) continue;
    for (auto& s : load_augmented_split(path)) augmented.emplace(s.base.id, std::move(s));
  }
  auto it = augmented.find(id);
  if (it == augmented.end()) {
    // Closest ids by shared prefix length keep the error actionable.
    std::vector<std::pair<std::size_t, std::string>> near;
    for (const auto& [known_id, s] : augmented) {
      std::size_t common = 0;
      while (common < known_id.size() && common < id.size() &&
             known_id[common] == id[common]) {
        ++common;
      }
      near.emplace_back(common, known_id);
    }
    std::sort(near.begin(), near.end(), [](const auto& x, const auto& y) {
      if (x.first != y.first) return x.first > y.first;
      return x.second < y.second;
    });
    std::string hint;
    for (std::size_t i = 0; i < near.size() && i < 5; ++i) {
      if (!hint.empty()) hint += ", ";
      hint += near[i].second;
    }
    throw ValidationError("unknown sample id '" + id + "'; nearest ids: " + hint);
  }
  const AugmentedSample& sample = it->second;

  std::map<std::string, std::string> train_texts;
  for (const Sample* s : dataset.split_samples(Split::Train)) {
    train_texts.emplace(s->id, s->text);
  }

  auto prediction_of = [&](const fs::path& dir) -> std::optional<std::pair<std::string, LabelSet>> {
    for (const char* name : {"predictions_test.jsonl", "predictions_validation.jsonl"}) {
      const fs::path path = dir / name;
      if (!fs::exists(path)) continue;
      PredictionsFile file = load_predictions(path);
      for (std::size_t i = 0; i < file.ids.size(); ++i) {
        if (file.ids[i] == id) return std::make_pair(file.arm, file.predicted[i]);
      }
    }
    return std::nullopt;
  };

  std::ostringstream out;
  out << "id: " << sample.base.id << "\n";
  out << "split: " << to_string(sample.base.split) << "\n";
  out << "gold: " << format_labels(sample.base.labels) << "\n";
  out << "text: " << sample.base.text << "\n";
  if (sample.was_augmented) {
    out << "augmented: yes\n";
    for (std::size_t i = 0; i < sample.picks.size(); ++i) {
      out << "  pick " << (i + 1) << ": " << sample.picks[i] << " (dense similarity "
          << csv_number(sample.pick_scores[i]) << ")\n";
      auto text_it = train_texts.find(sample.picks[i]);
      out << "  pick " << (i + 1)
          << " text: " << (text_it == train_texts.end() ? "<missing>" : text_it->second)
          << "\n";
    }
    out << "composed tokens: " << sample.token_count
        << " (truncation: " << to_string(sample.truncation_applied) << ")\n";
    out << "composed: " << sample.composed_text << "\n";
  } else if (!sample.skip_reason.empty()) {
    out << "augmented: no (skip reason: " << sample.skip_reason << ")\n";
  } else {
    out << "augmented: no (not eligible)\n";
  }

  if (auto pred = prediction_of(run_dir)) {
    const bool correct = pred->second == sample.base.labels;
    out << "prediction (" << (pred->first.empty() ? "this run" : pred->first)
        << "): " << format_labels(pred->second) << (correct ? " [correct]" : " [wrong]")
        << "\n";
  }
  if (other_run) {
    if (auto pred = prediction_of(*other_run)) {
      const bool correct = pred->second == sample.base.labels;
      out << "prediction (" << (pred->first.empty() ? "other run" : pred->first)
          << "): " << format_labels(pred->second)
          << (correct ? " [correct]" : " [wrong]") << "\n";
    }
  }
  return out.str();
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const ParseError*>(&e)) return 3;
  if (dynamic_cast<const ValidationError*>(&e)) return 3;
  if (dynamic_cast<const StageError*>(&e)) return 4;
  return 1;
}

}  // namespace sra
