#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "sra/augment.hpp"
#include "sra/corpus.hpp"
#include "sra/errors.hpp"
#include "sra/synthetic.hpp"
#include "sra/util.hpp"

using namespace sra;

namespace {

Sample sample(const std::string& id, const std::string& text,
              std::initializer_list<std::string> labels, Split split = Split::Train) {
  Sample s;
  s.id = id;
  s.text = text;
  s.labels = LabelSet(labels);
  s.split = split;
  return s;
}

std::string n_tokens(std::size_t n, const std::string& word = "tok") {
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < n; ++i) tokens.push_back(word + std::to_string(i % 97));
  return text::join(tokens);
}

SyntheticSpec mini_spec() {
  SyntheticSpec spec;
  spec.head_train = 40;
  spec.head_eval = 10;
  spec.bait_per_head = 2;
  spec.traps_per_head = 2;
  spec.tail_train = 4;
  spec.tail_eval = 3;
  spec.seed = 42;
  return spec;
}

}  // namespace

TEST_CASE("truncate_tokens keeps the first cap tokens") {
  CHECK(truncate_tokens("one two three", 64) == "one two three");
  std::string long_text = n_tokens(70);
  std::string capped = truncate_tokens(long_text, 64);
  CHECK(text::whitespace_token_count(capped) == 64);
  CHECK(truncate_tokens("a  b\tc", 2) == "a b");
  CHECK_THROWS_AS(truncate_tokens("x", 0), ConfigError);
}

TEST_CASE("compose builds the prompt layout verbatim") {
  AugmentationConfig config;
  Sample base = sample("s", "Payment due in thirty days", {"payments"});
  AugmentedSample out = compose(base, {"Fees payable monthly"}, config);
  CHECK(out.composed_text ==
        "Original clause: Payment due in thirty days [SEP] "
        "Related clause for reference: Fees payable monthly");
  CHECK(out.was_augmented);
  CHECK(out.truncation_applied == Truncation::None);
  CHECK(out.token_count == text::whitespace_token_count(out.composed_text));
}

TEST_CASE("compose with no retrieved texts passes the sample through byte-identically") {
  AugmentationConfig config;
  Sample base = sample("s", "odd   spacing\tpreserved", {"x"});
  AugmentedSample out = compose(base, {}, config);
  CHECK_FALSE(out.was_augmented);
  CHECK(out.composed_text == base.text);
  CHECK(out.picks.empty());
}

TEST_CASE("truncation flags cover clause, total and both") {
  AugmentationConfig config;

  AugmentedSample clause_only =
      compose(sample("s", "short base", {"x"}), {n_tokens(70)}, config);
  CHECK(clause_only.truncation_applied == Truncation::Clause);

  // 2 + 500 + 1 + 4 + 64 = 571 tokens -> tail-truncated to exactly 512.
  AugmentedSample total_only =
      compose(sample("s", n_tokens(500), {"x"}), {n_tokens(64)}, config);
  CHECK(total_only.truncation_applied == Truncation::Total);
  CHECK(total_only.token_count == 512);
  CHECK(text::whitespace_token_count(total_only.composed_text) == 512);

  AugmentedSample both =
      compose(sample("s", n_tokens(500), {"x"}), {n_tokens(80)}, config);
  CHECK(both.truncation_applied == Truncation::Both);
  CHECK(both.token_count == 512);

  // The surviving prefix keeps the original clause; only the tail is cut.
  CHECK(total_only.composed_text.substr(0, 16) == "Original clause:");
}

TEST_CASE("augment_split: empty low set passes everything through") {
  Dataset dataset = make_synthetic_corpus(mini_spec());
  LowFrequencySet empty_low;
  empty_low.source_fingerprint = "none";
  AugmentationConfig config;
  auto [samples, stats] = augment_split(dataset, Split::Train, empty_low, Gate::AnyLabel,
                                        EligibilityMode::Policy, nullptr, config);
  CHECK(stats.coverage() == 0.0);
  CHECK(stats.eligible == 0);
  CHECK_FALSE(stats.mean_similarity().has_value());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK_FALSE(samples[i].was_augmented);
    CHECK(samples[i].composed_text == samples[i].base.text);
  }
}

TEST_CASE("augment_split: coverage is (N-1)/N when one query has no candidates") {
  std::string body;
  body += test::record_line("t1", "alpha bravo charlie", {"a"}, "train");
  body += test::record_line("t2", "alpha bravo delta", {"a"}, "train");
  body += test::record_line("t3", "alpha charlie delta", {"a"}, "train");
  body += test::record_line("t4", "bravo charlie delta", {"a"}, "train");
  body += test::record_line("t5", "zulu yankee xray", {"a"}, "train");  // disjoint
  body += test::record_line("v1", "alpha bravo", {"a"}, "validation");
  body += test::record_line("s1", "alpha charlie", {"a"}, "test");
  auto dir = test::temp_dir("augment_skip");
  test::write_file(dir / "c.jsonl", body);
  Dataset dataset = load_dataset(dir / "c.jsonl", Task::SingleLabel);

  Retriever retriever = Retriever::build(
      dataset, {}, std::make_shared<TrigramProjectionProvider>(), {});
  AugmentationConfig config;
  auto [samples, stats] = augment_split(dataset, Split::Train, std::nullopt,
                                        Gate::AnyLabel, EligibilityMode::All,
                                        &retriever, config);
  CHECK(stats.total == 5);
  CHECK(stats.augmented == 4);
  CHECK(stats.coverage() == doctest::Approx(4.0 / 5.0));
  CHECK(stats.skip_reasons.at("no-candidates") == 1);

  // Output order equals input order.
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(samples[i].base.id == dataset.split_samples(Split::Train)[i]->id);
  }
}

TEST_CASE("augment_split: validation and test picks stay inside train") {
  Dataset dataset = make_synthetic_corpus(mini_spec());
  Retriever retriever = Retriever::build(
      dataset, {}, std::make_shared<TrigramProjectionProvider>(), {});
  LabelSet train_ids;
  for (const Sample* s : dataset.split_samples(Split::Train)) train_ids.insert(s->id);

  AugmentationConfig config;
  for (Split split : {Split::Validation, Split::Test}) {
    auto [samples, stats] = augment_split(dataset, split, std::nullopt, Gate::AnyLabel,
                                          EligibilityMode::All, &retriever, config);
    CHECK(stats.augmented > 0);
    for (const auto& s : samples) {
      for (const auto& pick : s.picks) CHECK(train_ids.count(pick) == 1);
    }
  }
}

TEST_CASE("augmented token counts respect the model length bound") {
  Dataset dataset = make_synthetic_corpus(mini_spec());
  Retriever retriever = Retriever::build(
      dataset, {}, std::make_shared<TrigramProjectionProvider>(), {});
  AugmentationConfig config;
  config.clause_token_cap = 8;
  config.max_model_length = 24;
  auto [samples, stats] = augment_split(dataset, Split::Train, std::nullopt,
                                        Gate::AnyLabel, EligibilityMode::All,
                                        &retriever, config);
  for (const auto& s : samples) {
    if (s.was_augmented) CHECK(s.token_count <= 24);
  }
}

TEST_CASE("augmented split files round-trip through the line format") {
  Dataset dataset = make_synthetic_corpus(mini_spec());
  FrequencyTable freq = frequency_table(dataset);
  SelectionPolicy policy;
  policy.alpha = 0.8;
  LowFrequencySet low = select_low_frequency(freq, policy);
  Retriever retriever = Retriever::build(
      dataset, {}, std::make_shared<TrigramProjectionProvider>(), {});
  AugmentationConfig config;
  auto [samples, stats] = augment_split(dataset, Split::Test, low, Gate::AnyLabel,
                                        EligibilityMode::Policy, &retriever, config);

  auto dir = test::temp_dir("augment_rt");
  save_augmented_split(samples, low, config, Split::Test, dir / "aug.jsonl");
  auto loaded = load_augmented_split(dir / "aug.jsonl");
  REQUIRE(loaded.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(loaded[i].base.id == samples[i].base.id);
    CHECK(loaded[i].composed_text == samples[i].composed_text);
    CHECK(loaded[i].picks == samples[i].picks);
    CHECK(loaded[i].was_augmented == samples[i].was_augmented);
    CHECK(loaded[i].token_count == samples[i].token_count);
  }

  // The header records which low-frequency set produced the file.
  std::string first_line = test::read_file(dir / "aug.jsonl");
  first_line = first_line.substr(0, first_line.find('\n'));
  nlohmann::json header = nlohmann::json::parse(first_line);
  CHECK(header["record_type"] == "header");
  CHECK(header["low_frequency_set"]["source_fingerprint"] == freq.fingerprint());
}

TEST_CASE("coverage grows with the cutoff") {
  Dataset dataset = make_synthetic_corpus(mini_spec());
  FrequencyTable freq = frequency_table(dataset);
  Retriever retriever = Retriever::build(
      dataset, {}, std::make_shared<TrigramProjectionProvider>(), {});
  AugmentationConfig config;

  double previous = -1.0;
  for (double alpha : {0.25, 0.5, 0.75, 1.0}) {
    SelectionPolicy policy;
    policy.alpha = alpha;
    LowFrequencySet low = select_low_frequency(freq, policy);
    CoverageStats pooled;
    for (Split split : kAllSplits) {
      auto [samples, stats] = augment_split(dataset, split, low, Gate::AnyLabel,
                                            EligibilityMode::Policy, &retriever, config);
      pooled.merge(stats);
    }
    CHECK(pooled.coverage() >= previous);
    previous = pooled.coverage();
  }
  CHECK(previous > 0.0);
}

TEST_CASE("augmentation config validation") {
  AugmentationConfig config;
  config.clause_token_cap = 0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config.clause_token_cap = 600;
  config.max_model_length = 512;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config.clause_token_cap = 64;
  config.eval_gating = "predicted_labels";
  CHECK_THROWS_AS(config.validate(), ConfigError);
}
