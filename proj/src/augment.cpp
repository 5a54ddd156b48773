#include "sra/augment.hpp"

#include <fstream>

#include "sra/errors.hpp"
#include "sra/util.hpp"

namespace sra {

std::string to_string(Truncation t) {
  switch (t) {
    case Truncation::None: return "none";
    case Truncation::Clause: return "clause";
    case Truncation::Total: return "total";
    case Truncation::Both: return "both";
  }
  return "none";
}

Truncation truncation_from_string(const std::string& s) {
  if (s == "none") return Truncation::None;
  if (s == "clause") return Truncation::Clause;
  if (s == "total") return Truncation::Total;
  if (s == "both") return Truncation::Both;
  throw ParseError("unknown truncation tag '" + s + "'");
}

void AugmentationConfig::validate() const {
  if (clause_token_cap < 1) throw ConfigError("clause_token_cap must be >= 1");
  if (max_model_length <= clause_token_cap) {
    throw ConfigError("max_model_length must exceed clause_token_cap");
  }
  if (k < 1) throw ConfigError("augmentation k must be >= 1");
  if (eval_gating != "ground_truth_labels") {
    throw ConfigError("unsupported eval_gating '" + eval_gating + "'");
  }
}

nlohmann::json AugmentationConfig::to_json() const {
  return {{"clause_token_cap", clause_token_cap},
          {"max_model_length", max_model_length},
          {"prompt_orig", prompt_orig},
          {"prompt_ref", prompt_ref},
          {"separator", separator},
          {"k", k},
          {"eval_gating", eval_gating}};
}

void CoverageStats::merge(const CoverageStats& other) {
  total += other.total;
  eligible += other.eligible;
  augmented += other.augmented;
  for (const auto& [reason, count] : other.skip_reasons) skip_reasons[reason] += count;
  similarity_sum += other.similarity_sum;
  similarity_count += other.similarity_count;
}

nlohmann::json CoverageStats::to_json() const {
  nlohmann::json j;
  j["total"] = total;
  j["eligible"] = eligible;
  j["augmented"] = augmented;
  j["coverage"] = coverage();
  auto sim = mean_similarity();
  if (sim) {
    j["mean_dense_similarity"] = *sim;
  } else {
    j["mean_dense_similarity"] = nullptr;
  }
  j["skip_reasons"] = skip_reasons;
  return j;
}

std::string truncate_tokens(const std::string& text, std::size_t cap) {
  if (cap < 1) throw ConfigError("truncate_tokens: cap must be >= 1");
  auto tokens = text::whitespace_tokens(text);
  if (tokens.size() > cap) tokens.resize(cap);
  return text::join(tokens);
}

AugmentedSample compose(const Sample& base, const std::vector<std::string>& retrieved,
                        const AugmentationConfig& config) {
  AugmentedSample out;
  out.base = base;
  if (retrieved.empty()) {
    out.composed_text = base.text;
    out.token_count = text::whitespace_token_count(base.text);
    return out;
  }

  bool clause_truncated = false;
  std::string composed = config.prompt_orig + " " + base.text + " " + config.separator +
                         " " + config.prompt_ref;
  for (const auto& clause : retrieved) {
    if (text::whitespace_token_count(clause) > config.clause_token_cap) {
      clause_truncated = true;
    }
    composed += " " + truncate_tokens(clause, config.clause_token_cap);
  }

  bool total_truncated = false;
  auto tokens = text::whitespace_tokens(composed);
  if (tokens.size() > config.max_model_length) {
    tokens.resize(config.max_model_length);
    composed = text::join(tokens);
    total_truncated = true;
  }
  out.composed_text = std::move(composed);
  out.token_count = tokens.size();
  out.was_augmented = true;
  if (clause_truncated && total_truncated) {
    out.truncation_applied = Truncation::Both;
  } else if (clause_truncated) {
    out.truncation_applied = Truncation::Clause;
  } else if (total_truncated) {
    out.truncation_applied = Truncation::Total;
  }
  return out;
}

std::pair<std::vector<AugmentedSample>, CoverageStats> augment_split(
    const Dataset& dataset, Split split, const std::optional<LowFrequencySet>& low,
    Gate gate, EligibilityMode mode, const Retriever* retriever,
    const AugmentationConfig& config) {
  config.validate();
  if (mode == EligibilityMode::Policy && !low) {
    throw ValidationError("augment_split: policy mode requires a low-frequency set");
  }

  std::vector<AugmentedSample> out;
  CoverageStats stats;
  for (const Sample* sample : dataset.split_samples(split)) {
    ++stats.total;
    bool eligible = false;
    switch (mode) {
      case EligibilityMode::None: eligible = false; break;
      case EligibilityMode::All: eligible = true; break;
      case EligibilityMode::Policy:
        eligible = needs_augmentation(*sample, *low, gate, dataset.task);
        break;
    }
    if (!eligible) {
      out.push_back(compose(*sample, {}, config));
      continue;
    }
    ++stats.eligible;
    if (!retriever) {
      throw ValidationError("augment_split: retriever required for eligible sample '" +
                            sample->id + "'");
    }

    RetrievalResult result = retriever->retrieve(*sample);
    if (result.skipped || result.picks.empty()) {
      AugmentedSample pass = compose(*sample, {}, config);
      pass.skip_reason = result.skipped ? result.skip_reason : "no-picks";
      ++stats.skip_reasons[pass.skip_reason];
      out.push_back(std::move(pass));
      continue;
    }

    std::vector<std::string> texts;
    const std::size_t k = std::min(config.k, result.picks.size());
    for (std::size_t i = 0; i < k; ++i) {
      texts.push_back(retriever->text_of(result.picks[i]));
    }
    AugmentedSample augmented = compose(*sample, texts, config);
    for (std::size_t i = 0; i < k; ++i) {
      augmented.picks.push_back(result.picks[i]);
      augmented.pick_scores.push_back(result.candidates[i].dense_score);
      stats.similarity_sum += result.candidates[i].dense_score;
      ++stats.similarity_count;
    }
    ++stats.augmented;
    out.push_back(std::move(augmented));
  }
  return {std::move(out), std::move(stats)};
}

void save_augmented_split(const std::vector<AugmentedSample>& samples,
                          const std::optional<LowFrequencySet>& low,
                          const AugmentationConfig& config, Split split,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path.string());
  nlohmann::json header;
  header["record_type"] = "header";
  header["format"] = "sra.augmented/1";
  header["split"] = to_string(split);
  header["low_frequency_set"] = low ? low->to_json() : nlohmann::json(nullptr);
  header["config"] = config.to_json();
  out << header.dump() << "\n";
  for (const auto& s : samples) {
    nlohmann::json record = s.base.extra;
    record["id"] = s.base.id;
    record["text"] = s.base.text;
    record["labels"] = s.base.labels;
    record["split"] = to_string(s.base.split);
    record["composed_text"] = s.composed_text;
    record["picks"] = s.picks;
    record["pick_scores"] = s.pick_scores;
    record["token_count"] = s.token_count;
    record["was_augmented"] = s.was_augmented;
    record["truncation_applied"] = to_string(s.truncation_applied);
    if (!s.skip_reason.empty()) record["skip_reason"] = s.skip_reason;
    out << record.dump() << "\n";
  }
}

std::vector<AugmentedSample> load_augmented_split(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open augmented split: " + path.string());
  std::vector<AugmentedSample> out;
  std::string line;
  std::size_t line_no = 0;
  static const char* known[] = {"id",          "text",       "labels",
                                "split",       "composed_text", "picks",
                                "pick_scores", "token_count", "was_augmented",
                                "truncation_applied", "skip_reason", "record_type"};
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (record.value("record_type", "") == "header") continue;
    AugmentedSample s;
    s.base.id = record.at("id").get<std::string>();
    s.base.text = record.at("text").get<std::string>();
    for (const auto& l : record.at("labels")) s.base.labels.insert(l.get<std::string>());
    s.base.split = split_from_string(record.at("split").get<std::string>());
    s.composed_text = record.at("composed_text").get<std::string>();
    s.picks = record.at("picks").get<std::vector<std::string>>();
    s.pick_scores = record.at("pick_scores").get<std::vector<double>>();
    s.token_count = record.at("token_count").get<std::size_t>();
    s.was_augmented = record.at("was_augmented").get<bool>();
    s.truncation_applied =
        truncation_from_string(record.at("truncation_applied").get<std::string>());
    s.skip_reason = record.value("skip_reason", "");
    for (auto it = record.begin(); it != record.end(); ++it) {
      bool is_known = false;
      for (const char* key : known) {
        if (it.key() == key) { is_known = true; break; }
      }
      if (!is_known) s.base.extra[it.key()] = it.value();
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace sra
