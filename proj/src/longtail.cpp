#include "sra/longtail.hpp"

#include <algorithm>
#include <cmath>

#include "sra/errors.hpp"

namespace sra {

std::string to_string(PolicyMode m) {
  switch (m) {
    case PolicyMode::CutoffRatio: return "cutoff_ratio";
    case PolicyMode::NonEmpty: return "non_empty";
    case PolicyMode::AbsoluteThresholdAndNonEmpty: return "absolute_threshold_non_empty";
  }
  return "cutoff_ratio";
}

std::string to_string(Gate g) {
  return g == Gate::AnyLabel ? "any_label" : "all_labels";
}

PolicyMode policy_mode_from_string(const std::string& s) {
  if (s == "cutoff_ratio") return PolicyMode::CutoffRatio;
  if (s == "non_empty") return PolicyMode::NonEmpty;
  if (s == "absolute_threshold_non_empty") return PolicyMode::AbsoluteThresholdAndNonEmpty;
  throw ConfigError("unknown selection policy mode '" + s + "'");
}

Gate gate_from_string(const std::string& s) {
  if (s == "any_label") return Gate::AnyLabel;
  if (s == "all_labels") return Gate::AllLabels;
  throw ConfigError("unknown gate '" + s + "' (expected any_label or all_labels)");
}

void SelectionPolicy::validate(Task task) const {
  if (tie_break != "label_ascending") {
    throw ConfigError("unknown tie_break rule '" + tie_break + "'");
  }
  switch (mode) {
    case PolicyMode::CutoffRatio:
      if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw ConfigError("cutoff_ratio requires 0 < alpha <= 1, got " +
                          std::to_string(alpha));
      }
      break;
    case PolicyMode::NonEmpty:
      if (task != Task::MultiLabel) {
        throw ConfigError("non_empty policy requires a multi_label task");
      }
      break;
    case PolicyMode::AbsoluteThresholdAndNonEmpty:
      if (task != Task::MultiLabel) {
        throw ConfigError("absolute_threshold_non_empty policy requires a multi_label task");
      }
      break;
  }
}

nlohmann::json SelectionPolicy::to_json() const {
  nlohmann::json j;
  j["mode"] = to_string(mode);
  if (mode == PolicyMode::CutoffRatio) j["alpha"] = alpha;
  if (mode == PolicyMode::AbsoluteThresholdAndNonEmpty) j["threshold"] = threshold;
  j["tie_break"] = tie_break;
  return j;
}

SelectionPolicy SelectionPolicy::from_json(const nlohmann::json& j) {
  SelectionPolicy p;
  p.mode = policy_mode_from_string(j.at("mode").get<std::string>());
  if (j.contains("alpha")) p.alpha = j.at("alpha").get<double>();
  if (j.contains("threshold")) p.threshold = j.at("threshold").get<std::size_t>();
  p.tie_break = j.at("tie_break").get<std::string>();
  return p;
}

nlohmann::json LowFrequencySet::to_json() const {
  nlohmann::json j;
  j["format"] = "sra.low_set/1";
  j["labels"] = labels;
  j["policy"] = policy.to_json();
  j["source_fingerprint"] = source_fingerprint;
  return j;
}

LowFrequencySet LowFrequencySet::from_json(const nlohmann::json& j) {
  LowFrequencySet set;
  for (const auto& l : j.at("labels")) set.labels.insert(l.get<std::string>());
  set.policy = SelectionPolicy::from_json(j.at("policy"));
  set.source_fingerprint = j.at("source_fingerprint").get<std::string>();
  return set;
}

namespace {

// floor with a small nudge so values like 0.3*10 = 2.999... floor to 3.
std::size_t floor_count(double fraction, std::size_t total) {
  double k = std::floor(fraction * static_cast<double>(total) + 1e-9);
  if (k < 0) k = 0;
  if (k > static_cast<double>(total)) k = static_cast<double>(total);
  return static_cast<std::size_t>(k);
}

}  // namespace

LowFrequencySet select_low_frequency(const FrequencyTable& freq,
                                     const SelectionPolicy& policy) {
  policy.validate(freq.task);

  LowFrequencySet result;
  result.policy = policy;
  result.source_fingerprint = freq.fingerprint();

  switch (policy.mode) {
    case PolicyMode::CutoffRatio: {
      // counts iterates ascending by label, so a stable sort on frequency
      // keeps identifier order within ties.
      std::vector<std::pair<std::string, std::size_t>> ranked(freq.counts.begin(),
                                                              freq.counts.end());
      std::stable_sort(ranked.begin(), ranked.end(),
                       [](const auto& a, const auto& b) { return a.second < b.second; });
      std::size_t k = floor_count(policy.alpha, ranked.size());
      for (std::size_t i = 0; i < k; ++i) result.labels.insert(ranked[i].first);
      break;
    }
    case PolicyMode::NonEmpty: {
      for (const auto& [label, count] : freq.counts) result.labels.insert(label);
      break;
    }
    case PolicyMode::AbsoluteThresholdAndNonEmpty: {
      for (const auto& [label, count] : freq.counts) {
        if (count <= policy.threshold) result.labels.insert(label);
      }
      break;
    }
  }
  return result;
}

bool needs_augmentation(const Sample& sample, const LowFrequencySet& low, Gate gate,
                        Task task) {
  if (sample.labels.empty()) return false;
  if (task == Task::SingleLabel) {
    return low.contains(*sample.labels.begin());
  }
  if (gate == Gate::AnyLabel) {
    return std::any_of(sample.labels.begin(), sample.labels.end(),
                       [&](const std::string& l) { return low.contains(l); });
  }
  return std::all_of(sample.labels.begin(), sample.labels.end(),
                     [&](const std::string& l) { return low.contains(l); });
}

BucketAssignment bucketize(const FrequencyTable& freq,
                           const std::vector<double>& fractions,
                           std::vector<std::string> names) {
  if (fractions.empty()) throw ConfigError("bucketize: empty fractions");
  double sum = 0.0;
  for (double f : fractions) {
    if (f <= 0.0) throw ConfigError("bucketize: fraction must be > 0");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("bucketize: fractions must sum to 1, got " + std::to_string(sum));
  }
  if (names.empty()) {
    if (fractions.size() == 3) {
      names = {"high", "mid", "low"};
    } else {
      for (std::size_t i = 0; i < fractions.size(); ++i) {
        names.push_back("bucket_" + std::to_string(i + 1));
      }
    }
  }
  if (names.size() != fractions.size()) {
    throw ConfigError("bucketize: names/fractions size mismatch");
  }

  std::vector<std::pair<std::string, std::size_t>> ranked(freq.counts.begin(),
                                                          freq.counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  BucketAssignment assignment;
  assignment.fractions = fractions;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    std::size_t size = (i + 1 == fractions.size())
                           ? ranked.size() - pos
                           : floor_count(fractions[i], ranked.size());
    if (pos + size > ranked.size()) size = ranked.size() - pos;
    BucketAssignment::Bucket bucket;
    bucket.name = names[i];
    for (std::size_t j = 0; j < size; ++j) bucket.labels.insert(ranked[pos + j].first);
    pos += size;
    assignment.buckets.push_back(std::move(bucket));
  }
  return assignment;
}

}  // namespace sra
