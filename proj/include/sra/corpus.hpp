#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

namespace sra {

enum class Task { SingleLabel, MultiLabel };
enum class Split { Train, Validation, Test };

inline constexpr std::array<Split, 3> kAllSplits = {Split::Train, Split::Validation,
                                                    Split::Test};

std::string to_string(Task t);
std::string to_string(Split s);
Task task_from_string(const std::string& s);
Split split_from_string(const std::string& s);

using LabelSet = std::set<std::string>;

struct Sample {
  std::string id;
  std::string text;
  LabelSet labels;
  Split split = Split::Train;
  // Unknown record fields, preserved verbatim on save.
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const Sample&) const = default;
};

struct Dataset {
  Task task = Task::SingleLabel;
  std::vector<Sample> samples;               // file order
  std::vector<std::string> label_vocab;      // labels observed in train, ascending

  std::vector<const Sample*> split_samples(Split s) const;
  std::size_t split_size(Split s) const;
};

struct FrequencyTable {
  Task task = Task::SingleLabel;
  std::map<std::string, std::size_t> counts;  // train occurrences per label
  std::size_t empty_count = 0;                // MultiLabel: train samples with no labels

  std::string fingerprint() const;
  nlohmann::json to_json() const;
};

// Line-delimited JSON records with fields id, text, labels, split.
Dataset load_dataset(const std::filesystem::path& path, Task task);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

FrequencyTable frequency_table(const Dataset& dataset);

// Nearest-rank percentiles: value at rank ceil(p*N) of the ascending lengths.
std::map<double, std::size_t> length_percentiles(
    const std::vector<std::size_t>& lengths, const std::vector<double>& percentiles);

}  // namespace sra
