#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "sra/corpus.hpp"

namespace sra {

enum class Gate { AnyLabel, AllLabels };
enum class PolicyMode { CutoffRatio, NonEmpty, AbsoluteThresholdAndNonEmpty };

std::string to_string(PolicyMode m);
std::string to_string(Gate g);
PolicyMode policy_mode_from_string(const std::string& s);
Gate gate_from_string(const std::string& s);

struct SelectionPolicy {
  PolicyMode mode = PolicyMode::CutoffRatio;
  double alpha = 0.65;        // CutoffRatio: fraction in (0, 1]
  std::size_t threshold = 0;  // AbsoluteThresholdAndNonEmpty
  // Ties at the cutoff boundary break by ascending label identifier; the
  // single rule offered, named so serialized sets are self-describing.
  std::string tie_break = "label_ascending";

  void validate(Task task) const;  // throws ConfigError
  nlohmann::json to_json() const;
  static SelectionPolicy from_json(const nlohmann::json& j);
};

struct LowFrequencySet {
  LabelSet labels;
  SelectionPolicy policy;
  std::string source_fingerprint;

  bool contains(const std::string& label) const { return labels.count(label) > 0; }
  nlohmann::json to_json() const;
  static LowFrequencySet from_json(const nlohmann::json& j);
};

struct BucketAssignment {
  struct Bucket {
    std::string name;
    LabelSet labels;
  };
  std::vector<Bucket> buckets;
  std::vector<double> fractions;
};

// Rank labels ascending by train frequency (ties by identifier) and apply the
// policy. CutoffRatio keeps the first floor(alpha*|C|).
LowFrequencySet select_low_frequency(const FrequencyTable& freq,
                                     const SelectionPolicy& policy);

bool needs_augmentation(const Sample& sample, const LowFrequencySet& low, Gate gate,
                        Task task);

// Labels sorted descending by frequency; bucket i takes floor(fractions[i]*|C|)
// labels, the remainder goes to the last bucket. Default names for three
// buckets are high/mid/low.
BucketAssignment bucketize(const FrequencyTable& freq,
                           const std::vector<double>& fractions,
                           std::vector<std::string> names = {});

}  // namespace sra
