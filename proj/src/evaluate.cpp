#include "sra/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include "sra/errors.hpp"
#include "sra/util.hpp"

namespace sra {

namespace {

double f1_of(double tp, double fp, double fn) {
  const double denom_p = tp + fp;
  const double denom_r = tp + fn;
  const double p = denom_p > 0.0 ? tp / denom_p : 0.0;
  const double r = denom_r > 0.0 ? tp / denom_r : 0.0;
  return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

// Per-sample membership deltas against a fixed vocab index; reused by the
// bootstrap so resamples only accumulate counts.
struct SampleCounts {
  std::vector<std::pair<int, int>> tp;  // (label idx, count=1)
  std::vector<std::pair<int, int>> fp;
  std::vector<std::pair<int, int>> fn;
};

std::vector<SampleCounts> membership_counts(const std::vector<LabelSet>& gold,
                                            const std::vector<LabelSet>& pred,
                                            const std::map<std::string, int>& index) {
  std::vector<SampleCounts> out(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    for (const auto& label : gold[i]) {
      auto it = index.find(label);
      if (it == index.end()) throw ValidationError("gold label '" + label + "' not in vocab");
      if (pred[i].count(label)) {
        out[i].tp.emplace_back(it->second, 1);
      } else {
        out[i].fn.emplace_back(it->second, 1);
      }
    }
    for (const auto& label : pred[i]) {
      auto it = index.find(label);
      if (it == index.end()) throw ValidationError("predicted label '" + label + "' not in vocab");
      if (!gold[i].count(label)) out[i].fp.emplace_back(it->second, 1);
    }
  }
  return out;
}

double macro_from_counts(const std::vector<double>& tp, const std::vector<double>& fp,
                         const std::vector<double>& fn) {
  double total = 0.0;
  for (std::size_t c = 0; c < tp.size(); ++c) total += f1_of(tp[c], fp[c], fn[c]);
  return tp.empty() ? 0.0 : total / static_cast<double>(tp.size());
}

}  // namespace

EvalReport f1_scores(const std::vector<LabelSet>& gold, const std::vector<LabelSet>& pred,
                     const std::vector<std::string>& vocab) {
  if (gold.size() != pred.size()) {
    throw ValidationError("f1_scores: gold/pred length mismatch (" +
                          std::to_string(gold.size()) + " vs " +
                          std::to_string(pred.size()) + ")");
  }
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < vocab.size(); ++i) index.emplace(vocab[i], static_cast<int>(i));

  std::vector<double> tp(vocab.size(), 0.0), fp(vocab.size(), 0.0), fn(vocab.size(), 0.0);
  std::vector<std::size_t> support(vocab.size(), 0);
  for (const auto& counts : membership_counts(gold, pred, index)) {
    for (const auto& [c, n] : counts.tp) { tp[c] += n; ++support[c]; }
    for (const auto& [c, n] : counts.fn) { fn[c] += n; ++support[c]; }
    for (const auto& [c, n] : counts.fp) fp[c] += n;
  }

  EvalReport report;
  report.n_samples = gold.size();
  double pooled_tp = 0.0, pooled_fp = 0.0, pooled_fn = 0.0, macro_sum = 0.0;
  for (std::size_t c = 0; c < vocab.size(); ++c) {
    PerLabelScore score;
    score.support = support[c];
    score.precision = (tp[c] + fp[c]) > 0.0 ? tp[c] / (tp[c] + fp[c]) : 0.0;
    score.recall = (tp[c] + fn[c]) > 0.0 ? tp[c] / (tp[c] + fn[c]) : 0.0;
    score.f1 = f1_of(tp[c], fp[c], fn[c]);
    macro_sum += score.f1;
    pooled_tp += tp[c];
    pooled_fp += fp[c];
    pooled_fn += fn[c];
    report.per_label.emplace(vocab[c], score);
  }
  report.macro_f1 = vocab.empty() ? 0.0 : macro_sum / static_cast<double>(vocab.size());
  report.micro_f1 = f1_of(pooled_tp, pooled_fp, pooled_fn);
  return report;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["micro_f1"] = micro_f1;
  j["macro_f1"] = macro_f1;
  j["n_samples"] = n_samples;
  nlohmann::json labels = nlohmann::json::object();
  for (const auto& [label, s] : per_label) {
    labels[label] = {{"precision", s.precision},
                     {"recall", s.recall},
                     {"f1", s.f1},
                     {"support", s.support}};
  }
  j["per_label"] = std::move(labels);
  j["buckets"] = buckets;
  return j;
}

std::map<std::string, double> bucketed_macro_f1(const EvalReport& report,
                                                const BucketAssignment& buckets) {
  std::map<std::string, double> out;
  for (const auto& bucket : buckets.buckets) {
    double total = 0.0;
    for (const auto& label : bucket.labels) {
      auto it = report.per_label.find(label);
      if (it == report.per_label.end()) {
        throw ValidationError("bucket label '" + label + "' missing from report");
      }
      total += it->second.f1;
    }
    out[bucket.name] =
        bucket.labels.empty() ? 0.0 : total / static_cast<double>(bucket.labels.size());
  }
  return out;
}

std::pair<double, double> bootstrap_delta_ci(const std::vector<LabelSet>& gold,
                                             const std::vector<LabelSet>& pred_a,
                                             const std::vector<LabelSet>& pred_b,
                                             const std::vector<std::string>& vocab,
                                             std::size_t resamples, double level,
                                             std::uint64_t seed) {
  if (resamples < 100) {
    throw ConfigError("bootstrap_delta_ci: fewer than 100 resamples is unstable");
  }
  if (level <= 0.0 || level >= 1.0) throw ConfigError("bootstrap level must be in (0,1)");
  if (gold.size() != pred_a.size() || gold.size() != pred_b.size()) {
    throw ValidationError("bootstrap_delta_ci: prediction lists not aligned");
  }
  if (gold.empty()) throw ValidationError("bootstrap_delta_ci: empty test set");

  std::map<std::string, int> index;
  for (std::size_t i = 0; i < vocab.size(); ++i) index.emplace(vocab[i], static_cast<int>(i));
  const auto counts_a = membership_counts(gold, pred_a, index);
  const auto counts_b = membership_counts(gold, pred_b, index);

  const std::size_t n = gold.size();
  std::vector<double> deltas(resamples);
  std::vector<double> tp_a(vocab.size()), fp_a(vocab.size()), fn_a(vocab.size());
  std::vector<double> tp_b(vocab.size()), fp_b(vocab.size()), fn_b(vocab.size());
  for (std::size_t r = 0; r < resamples; ++r) {
    std::fill(tp_a.begin(), tp_a.end(), 0.0);
    std::fill(fp_a.begin(), fp_a.end(), 0.0);
    std::fill(fn_a.begin(), fn_a.end(), 0.0);
    std::fill(tp_b.begin(), tp_b.end(), 0.0);
    std::fill(fp_b.begin(), fp_b.end(), 0.0);
    std::fill(fn_b.begin(), fn_b.end(), 0.0);
    SplitMix64 rng(mix64(seed, r));
    for (std::size_t draw = 0; draw < n; ++draw) {
      const std::size_t i = rng.below(n);
      for (const auto& [c, cnt] : counts_a[i].tp) tp_a[c] += cnt;
      for (const auto& [c, cnt] : counts_a[i].fp) fp_a[c] += cnt;
      for (const auto& [c, cnt] : counts_a[i].fn) fn_a[c] += cnt;
      for (const auto& [c, cnt] : counts_b[i].tp) tp_b[c] += cnt;
      for (const auto& [c, cnt] : counts_b[i].fp) fp_b[c] += cnt;
      for (const auto& [c, cnt] : counts_b[i].fn) fn_b[c] += cnt;
    }
    deltas[r] = macro_from_counts(tp_b, fp_b, fn_b) - macro_from_counts(tp_a, fp_a, fn_a);
  }
  std::sort(deltas.begin(), deltas.end());

  auto nearest_rank = [&](double p) {
    auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(resamples)));
    if (rank < 1) rank = 1;
    if (rank > resamples) rank = resamples;
    return deltas[rank - 1];
  };
  const double tail = (1.0 - level) / 2.0;
  return {nearest_rank(tail), nearest_rank(1.0 - tail)};
}

McNemarResult mcnemar_test(const std::vector<LabelSet>& gold,
                           const std::vector<LabelSet>& pred_a,
                           const std::vector<LabelSet>& pred_b) {
  if (gold.size() != pred_a.size() || gold.size() != pred_b.size()) {
    throw ValidationError("mcnemar_test: prediction lists not aligned");
  }
  McNemarResult result;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool a_correct = pred_a[i] == gold[i];
    const bool b_correct = pred_b[i] == gold[i];
    if (a_correct && !b_correct) ++result.b;
    if (!a_correct && b_correct) ++result.c;
  }
  const std::size_t n = result.b + result.c;
  if (n == 0) {
    result.p_value = 1.0;
    result.method = "exact";
    return result;
  }
  if (n < 25) {
    // Two-sided exact binomial: 2 * P(X <= min(b,c)) with X ~ Bin(n, 1/2).
    const std::size_t m = std::min(result.b, result.c);
    double tail = 0.0;
    double coeff = 1.0;  // C(n, 0)
    for (std::size_t i = 0; i <= m; ++i) {
      tail += coeff;
      coeff = coeff * static_cast<double>(n - i) / static_cast<double>(i + 1);
    }
    result.p_value = std::min(1.0, 2.0 * tail * std::pow(0.5, static_cast<double>(n)));
    result.method = "exact";
  } else {
    // Continuity-corrected chi-square with one degree of freedom.
    const double diff =
        std::abs(static_cast<double>(result.b) - static_cast<double>(result.c)) - 1.0;
    const double chi2 = diff * diff / static_cast<double>(n);
    result.p_value = std::erfc(std::sqrt(chi2 / 2.0));
    result.method = "chi-square";
  }
  return result;
}

std::vector<CoverageRow> coverage_similarity(
    const std::vector<std::pair<double, CoverageStats>>& stats_per_cutoff) {
  std::vector<CoverageRow> rows;
  rows.reserve(stats_per_cutoff.size());
  for (const auto& [cutoff, stats] : stats_per_cutoff) {
    rows.push_back({cutoff, stats.coverage(), stats.mean_similarity()});
  }
  return rows;
}

std::vector<LabelDelta> top_k_label_deltas(const EvalReport& report_a,
                                           const EvalReport& report_b, std::size_t k) {
  std::vector<LabelDelta> deltas;
  for (const auto& [label, score_a] : report_a.per_label) {
    auto it = report_b.per_label.find(label);
    if (it == report_b.per_label.end()) {
      throw ValidationError("top_k_label_deltas: reports cover different vocabularies");
    }
    deltas.push_back({label, score_a.f1, it->second.f1, it->second.f1 - score_a.f1});
  }
  std::sort(deltas.begin(), deltas.end(), [](const LabelDelta& x, const LabelDelta& y) {
    if (x.delta != y.delta) return x.delta > y.delta;
    return x.label < y.label;
  });
  if (deltas.size() > k) deltas.resize(k);
  return deltas;
}

nlohmann::json ComparisonReport::to_json() const {
  nlohmann::json j;
  j["delta_macro_f1"] = delta_macro_f1;
  j["bootstrap_ci"] = {{"low", bootstrap_ci.first},
                       {"high", bootstrap_ci.second},
                       {"resamples", bootstrap_resamples},
                       {"level", level},
                       {"seed", seed}};
  if (mcnemar) {
    j["mcnemar"] = {{"b", mcnemar->b},
                    {"c", mcnemar->c},
                    {"p_value", mcnemar->p_value},
                    {"method", mcnemar->method}};
  } else {
    j["mcnemar"] = nullptr;
  }
  nlohmann::json deltas = nlohmann::json::array();
  for (const auto& d : per_label_deltas) {
    deltas.push_back(
        {{"label", d.label}, {"f1_a", d.f1_a}, {"f1_b", d.f1_b}, {"delta", d.delta}});
  }
  j["per_label_deltas"] = std::move(deltas);
  nlohmann::json buckets = nlohmann::json::object();
  for (const auto& [name, pair] : bucket_macro_f1) {
    buckets[name] = {{"a", pair.first},
                     {"b", pair.second},
                     {"delta", pair.second - pair.first}};
  }
  j["buckets"] = std::move(buckets);
  return j;
}

ComparisonReport compare_predictions(const std::vector<LabelSet>& gold,
                                     const std::vector<LabelSet>& pred_a,
                                     const std::vector<LabelSet>& pred_b,
                                     const std::vector<std::string>& vocab, Task task,
                                     const std::optional<BucketAssignment>& buckets,
                                     std::size_t resamples, double level,
                                     std::uint64_t seed) {
  ComparisonReport report;
  EvalReport report_a = f1_scores(gold, pred_a, vocab);
  EvalReport report_b = f1_scores(gold, pred_b, vocab);
  report.delta_macro_f1 = report_b.macro_f1 - report_a.macro_f1;
  report.bootstrap_ci =
      bootstrap_delta_ci(gold, pred_a, pred_b, vocab, resamples, level, seed);
  report.bootstrap_resamples = resamples;
  report.level = level;
  report.seed = seed;
  if (task == Task::SingleLabel) report.mcnemar = mcnemar_test(gold, pred_a, pred_b);
  report.per_label_deltas = top_k_label_deltas(report_a, report_b, vocab.size());
  if (buckets) {
    auto bucket_a = bucketed_macro_f1(report_a, *buckets);
    auto bucket_b = bucketed_macro_f1(report_b, *buckets);
    for (const auto& [name, value] : bucket_a) {
      report.bucket_macro_f1[name] = {value, bucket_b[name]};
    }
  }
  return report;
}

}  // namespace sra
