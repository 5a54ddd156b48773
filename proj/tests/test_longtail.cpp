#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "sra/corpus.hpp"
#include "sra/errors.hpp"
#include "sra/longtail.hpp"
#include "sra/util.hpp"

using namespace sra;

namespace {

FrequencyTable table(Task task, std::initializer_list<std::pair<std::string, std::size_t>> counts) {
  FrequencyTable t;
  t.task = task;
  for (const auto& [label, n] : counts) t.counts[label] = n;
  return t;
}

SelectionPolicy cutoff(double alpha) {
  SelectionPolicy p;
  p.mode = PolicyMode::CutoffRatio;
  p.alpha = alpha;
  return p;
}

Sample sample_with(std::initializer_list<std::string> labels) {
  Sample s;
  s.id = "q";
  s.text = "text";
  s.labels = LabelSet(labels);
  return s;
}

// Independent oracle: rank by (count, label), take the prefix of mathematical
// floor(alpha * |C|).
LabelSet oracle_select(const FrequencyTable& freq, double alpha) {
  std::vector<std::pair<std::size_t, std::string>> ranked;
  for (const auto& [label, count] : freq.counts) ranked.emplace_back(count, label);
  std::sort(ranked.begin(), ranked.end());
  auto k = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(ranked.size())));
  LabelSet out;
  for (std::size_t i = 0; i < k && i < ranked.size(); ++i) out.insert(ranked[i].second);
  return out;
}

}  // namespace

TEST_CASE("cutoff ratio takes floor(alpha * |C|) labels") {
  FrequencyTable freq;
  freq.task = Task::SingleLabel;
  for (int c = 0; c < 100; ++c) {
    freq.counts["label_" + std::to_string(c)] = 10 + static_cast<std::size_t>(c) * 7;
  }
  CHECK(select_low_frequency(freq, cutoff(0.65)).labels.size() == 65);
  CHECK(select_low_frequency(freq, cutoff(1.0)).labels.size() == 100);
}

TEST_CASE("cutoff selection on small hand tables") {
  FrequencyTable freq = table(Task::SingleLabel, {{"a", 5}, {"b", 3}, {"c", 1}});
  CHECK(select_low_frequency(freq, cutoff(0.34)).labels == LabelSet{"c"});

  FrequencyTable tied = table(Task::SingleLabel, {{"a", 5}, {"b", 3}, {"c", 3}});
  CHECK(select_low_frequency(tied, cutoff(0.67)).labels == LabelSet{"b", "c"});
  // Tie at the boundary breaks by ascending identifier.
  CHECK(select_low_frequency(tied, cutoff(0.34)).labels == LabelSet{"b"});
}

TEST_CASE("policy validation") {
  FrequencyTable freq = table(Task::SingleLabel, {{"a", 5}});
  CHECK_THROWS_AS(select_low_frequency(freq, cutoff(0.0)), ConfigError);
  CHECK_THROWS_AS(select_low_frequency(freq, cutoff(1.5)), ConfigError);

  SelectionPolicy non_empty;
  non_empty.mode = PolicyMode::NonEmpty;
  CHECK_THROWS_AS(select_low_frequency(freq, non_empty), ConfigError);

  SelectionPolicy threshold;
  threshold.mode = PolicyMode::AbsoluteThresholdAndNonEmpty;
  threshold.threshold = 76;
  CHECK_THROWS_AS(select_low_frequency(freq, threshold), ConfigError);
}

TEST_CASE("multi-label policies") {
  FrequencyTable freq = table(Task::MultiLabel, {{"u0", 400}, {"u1", 76}, {"u2", 12}});
  freq.empty_count = 5000;

  SelectionPolicy non_empty;
  non_empty.mode = PolicyMode::NonEmpty;
  CHECK(select_low_frequency(freq, non_empty).labels == LabelSet{"u0", "u1", "u2"});

  SelectionPolicy threshold;
  threshold.mode = PolicyMode::AbsoluteThresholdAndNonEmpty;
  threshold.threshold = 76;
  CHECK(select_low_frequency(freq, threshold).labels == LabelSet{"u1", "u2"});
}

TEST_CASE("needs_augmentation gating") {
  LowFrequencySet low;
  low.labels = {"c", "y"};

  CHECK(needs_augmentation(sample_with({"c"}), low, Gate::AnyLabel, Task::SingleLabel));
  CHECK_FALSE(needs_augmentation(sample_with({"a"}), low, Gate::AnyLabel, Task::SingleLabel));

  CHECK(needs_augmentation(sample_with({"x", "y"}), low, Gate::AnyLabel, Task::MultiLabel));
  CHECK_FALSE(needs_augmentation(sample_with({"x", "y"}), low, Gate::AllLabels, Task::MultiLabel));
  CHECK(needs_augmentation(sample_with({"c", "y"}), low, Gate::AllLabels, Task::MultiLabel));

  // Empty label sets are never augmented.
  CHECK_FALSE(needs_augmentation(sample_with({}), low, Gate::AnyLabel, Task::MultiLabel));
  CHECK_FALSE(needs_augmentation(sample_with({}), low, Gate::AllLabels, Task::MultiLabel));
}

TEST_CASE("bucketize follows floor sizes with the remainder in the last bucket") {
  FrequencyTable freq;
  freq.task = Task::SingleLabel;
  for (int c = 0; c < 100; ++c) {
    freq.counts["label_" + std::to_string(c)] = 2000 - static_cast<std::size_t>(c) * 13;
  }
  BucketAssignment buckets = bucketize(freq, {0.1, 0.4, 0.5});
  REQUIRE(buckets.buckets.size() == 3);
  CHECK(buckets.buckets[0].name == "high");
  CHECK(buckets.buckets[0].labels.size() == 10);
  CHECK(buckets.buckets[1].labels.size() == 40);
  CHECK(buckets.buckets[2].labels.size() == 50);
  // The high bucket holds the most frequent classes.
  CHECK(buckets.buckets[0].labels.count("label_0") == 1);
  CHECK(buckets.buckets[2].labels.count("label_99") == 1);

  FrequencyTable tiny = table(Task::SingleLabel, {{"a", 3}, {"b", 2}, {"c", 1}});
  BucketAssignment one = bucketize(tiny, {1.0});
  REQUIRE(one.buckets.size() == 1);
  CHECK(one.buckets[0].labels.size() == 3);

  FrequencyTable seven;
  seven.task = Task::SingleLabel;
  for (int c = 0; c < 7; ++c) seven.counts["l" + std::to_string(c)] = 100 - static_cast<std::size_t>(c);
  BucketAssignment b7 = bucketize(seven, {0.1, 0.4, 0.5});
  CHECK(b7.buckets[0].labels.size() == 0);
  CHECK(b7.buckets[1].labels.size() == 2);
  CHECK(b7.buckets[2].labels.size() == 5);
}

TEST_CASE("bucketize input validation") {
  FrequencyTable freq = table(Task::SingleLabel, {{"a", 1}});
  CHECK_THROWS_AS(bucketize(freq, {}), ConfigError);
  CHECK_THROWS_AS(bucketize(freq, {0.5, -0.5, 1.0}), ConfigError);
  CHECK_THROWS_AS(bucketize(freq, {0.5, 0.4}), ConfigError);
}

TEST_CASE("bucket partition covers every label exactly once") {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    FrequencyTable freq;
    freq.task = Task::SingleLabel;
    const std::size_t n = 1 + rng.below(25);
    for (std::size_t c = 0; c < n; ++c) {
      freq.counts["l" + std::to_string(c)] = rng.below(1000);
    }
    BucketAssignment buckets = bucketize(freq, {0.1, 0.4, 0.5});
    LabelSet all;
    std::size_t total = 0;
    for (const auto& bucket : buckets.buckets) {
      total += bucket.labels.size();
      all.insert(bucket.labels.begin(), bucket.labels.end());
    }
    CHECK(total == n);
    CHECK(all.size() == n);
  }
}

TEST_CASE("selection equals the brute-force oracle and is monotone in alpha") {
  SplitMix64 rng(1234);
  for (int trial = 0; trial < 200; ++trial) {
    FrequencyTable freq;
    freq.task = Task::SingleLabel;
    const std::size_t n = 1 + rng.below(20);
    for (std::size_t c = 0; c < n; ++c) {
      freq.counts["l" + std::to_string(10 + c)] = rng.below(100000);
    }
    double a1 = rng.unit();
    double a2 = rng.unit();
    if (a1 > a2) std::swap(a1, a2);
    if (a1 <= 0.0) a1 = 0.5;
    if (a2 < a1) a2 = a1;

    LowFrequencySet s1 = select_low_frequency(freq, cutoff(a1));
    LowFrequencySet s2 = select_low_frequency(freq, cutoff(a2));
    CHECK(s1.labels == oracle_select(freq, a1));
    CHECK(s2.labels == oracle_select(freq, a2));
    CHECK(std::includes(s2.labels.begin(), s2.labels.end(), s1.labels.begin(),
                        s1.labels.end()));
  }
}

TEST_CASE("low-frequency set serializes deterministically and round-trips") {
  FrequencyTable freq = table(Task::SingleLabel, {{"a", 5}, {"b", 3}, {"c", 1}});
  LowFrequencySet set = select_low_frequency(freq, cutoff(0.67));
  CHECK(set.source_fingerprint == freq.fingerprint());
  std::string once = set.to_json().dump();
  std::string twice = select_low_frequency(freq, cutoff(0.67)).to_json().dump();
  CHECK(once == twice);

  LowFrequencySet back = LowFrequencySet::from_json(set.to_json());
  CHECK(back.labels == set.labels);
  CHECK(back.policy.alpha == set.policy.alpha);
  CHECK(back.source_fingerprint == set.source_fingerprint);
}
