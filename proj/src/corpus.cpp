#include "sra/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_set>

#include "sra/errors.hpp"
#include "sra/util.hpp"

namespace sra {

std::string to_string(Task t) {
  return t == Task::SingleLabel ? "single_label" : "multi_label";
}

std::string to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  return "train";
}

Task task_from_string(const std::string& s) {
  if (s == "single_label") return Task::SingleLabel;
  if (s == "multi_label") return Task::MultiLabel;
  throw ConfigError("unknown task kind '" + s + "' (expected single_label or multi_label)");
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "validation") return Split::Validation;
  if (s == "test") return Split::Test;
  throw ValidationError("unknown split '" + s + "' (expected train, validation or test)");
}

std::vector<const Sample*> Dataset::split_samples(Split s) const {
  std::vector<const Sample*> out;
  for (const auto& sample : samples) {
    if (sample.split == s) out.push_back(&sample);
  }
  return out;
}

std::size_t Dataset::split_size(Split s) const {
  std::size_t n = 0;
  for (const auto& sample : samples) {
    if (sample.split == s) ++n;
  }
  return n;
}

namespace {

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

std::string at_line(std::size_t line_no, const std::string& msg) {
  return "line " + std::to_string(line_no) + ": " + msg;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path, Task task) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset file: " + path.string());

  Dataset dataset;
  dataset.task = task;

  std::unordered_set<std::string> seen_ids;
  std::set<std::string> train_labels;
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;

    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(at_line(line_no, std::string("invalid JSON: ") + e.what()));
    }
    if (!record.is_object()) throw ParseError(at_line(line_no, "record is not a JSON object"));

    Sample sample;
    try {
      sample.id = record.at("id").get<std::string>();
      sample.text = record.at("text").get<std::string>();
      for (const auto& l : record.at("labels")) {
        sample.labels.insert(l.get<std::string>());
      }
      sample.split = split_from_string(record.at("split").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(at_line(line_no, std::string("bad record fields: ") + e.what()));
    }

    if (!seen_ids.insert(sample.id).second) {
      throw ValidationError(at_line(line_no, "duplicate id '" + sample.id + "'"));
    }
    bool all_space = std::all_of(sample.text.begin(), sample.text.end(),
                                 [](unsigned char c) { return std::isspace(c); });
    if (sample.text.empty() || all_space) {
      throw ValidationError(at_line(line_no, "text is empty after whitespace trimming"));
    }
    if (task == Task::SingleLabel && sample.labels.size() != 1) {
      throw ValidationError(at_line(
          line_no, "single-label record must carry exactly 1 label, got " +
                       std::to_string(sample.labels.size())));
    }

    for (auto it = record.begin(); it != record.end(); ++it) {
      if (it.key() != "id" && it.key() != "text" && it.key() != "labels" &&
          it.key() != "split") {
        sample.extra[it.key()] = it.value();
      }
    }
    if (sample.split == Split::Train) {
      train_labels.insert(sample.labels.begin(), sample.labels.end());
    }
    dataset.samples.push_back(std::move(sample));
  }

  for (Split s : kAllSplits) {
    if (dataset.split_size(s) == 0) {
      throw ValidationError("split '" + to_string(s) + "' is empty");
    }
  }
  for (const auto& sample : dataset.samples) {
    if (sample.split == Split::Train) continue;
    for (const auto& label : sample.labels) {
      if (!train_labels.count(label)) {
        throw ValidationError("label '" + label + "' absent from train (sample '" +
                              sample.id + "')");
      }
    }
  }
  dataset.label_vocab.assign(train_labels.begin(), train_labels.end());
  return dataset;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path.string());
  for (const auto& sample : dataset.samples) {
    nlohmann::json record = sample.extra;
    record["id"] = sample.id;
    record["text"] = sample.text;
    record["labels"] = sample.labels;
    record["split"] = to_string(sample.split);
    out << record.dump() << "\n";
  }
}

FrequencyTable frequency_table(const Dataset& dataset) {
  FrequencyTable table;
  table.task = dataset.task;
  for (const auto& label : dataset.label_vocab) table.counts[label] = 0;
  for (const auto& sample : dataset.samples) {
    if (sample.split != Split::Train) continue;
    if (sample.labels.empty()) {
      ++table.empty_count;
      continue;
    }
    for (const auto& label : sample.labels) ++table.counts[label];
  }
  return table;
}

std::string FrequencyTable::fingerprint() const {
  std::uint64_t h = fnv1a64(std::string("sra.freq/1|") + sra::to_string(task));
  for (const auto& [label, count] : counts) {
    h = fnv1a64(label, h);
    h = fnv1a64("=" + std::to_string(count) + ";", h);
  }
  h = fnv1a64("empty=" + std::to_string(empty_count), h);
  return to_hex(h);
}

nlohmann::json FrequencyTable::to_json() const {
  nlohmann::json j;
  j["format"] = "sra.freq_table/1";
  j["task"] = sra::to_string(task);
  j["counts"] = counts;
  j["empty_count"] = empty_count;
  j["fingerprint"] = fingerprint();
  return j;
}

std::map<double, std::size_t> length_percentiles(
    const std::vector<std::size_t>& lengths, const std::vector<double>& percentiles) {
  if (lengths.empty()) throw ValidationError("length_percentiles: empty input");
  for (double p : percentiles) {
    if (p < 0.0 || p > 1.0) {
      throw ValidationError("percentile out of [0,1]: " + std::to_string(p));
    }
  }
  std::vector<std::size_t> sorted = lengths;
  std::sort(sorted.begin(), sorted.end());
  std::map<double, std::size_t> out;
  const double n = static_cast<double>(sorted.size());
  for (double p : percentiles) {
    auto rank = static_cast<std::size_t>(std::ceil(p * n));
    if (rank < 1) rank = 1;
    if (rank > sorted.size()) rank = sorted.size();
    out[p] = sorted[rank - 1];
  }
  return out;
}

}  // namespace sra
