#include "sra/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "sra/errors.hpp"
#include "sra/util.hpp"

namespace sra {

namespace {

std::string trim(const std::string& s) {
  std::size_t start = s.find_first_not_of(" \t\r\n");
  if (start == std::string::npos) return "";
  std::size_t end = s.find_last_not_of(" \t\r\n");
  return s.substr(start, end - start + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a number: '" + value + "'");
  }
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(value, &pos);
    if (pos != value.size() || v < 0) throw std::invalid_argument("bad integer");
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a non-negative integer: '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an unsigned integer: '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config key '" + key + "': not a boolean: '" + value + "'");
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_double(key, item));
  }
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

std::string render_double_list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += format_double(values[i]);
  }
  return out;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "dataset_path", "task", "arm",
      "policy_mode", "policy_alpha", "policy_threshold", "gate",
      "sparse_min_df", "sparse_max_df", "sparse_sublinear_tf",
      "retrieval_top_n", "retrieval_top_m", "retrieval_k",
      "embedding_provider", "embedding_file", "embedding_dim", "embedding_seed",
      "embedding_max_tokens",
      "clause_token_cap", "max_model_length", "prompt_orig", "prompt_ref", "separator",
      "eval_gating",
      "learning_rate", "batch_size_train", "batch_size_eval", "patience", "max_epochs",
      "grad_clip_norm", "multilabel_threshold",
      "feature_min_df", "feature_max_df", "feature_sublinear_tf",
      "eval_resamples", "eval_level", "seed", "compare_top_k",
      "out_dir", "bucket_fractions", "percentiles", "sweep_cutoffs", "selection_metric",
  };
  return keys;
}

}  // namespace

KeyValues parse_config_text(const std::string& text) {
  KeyValues kv;
  std::stringstream ss(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value', got '" + stripped + "'");
    }
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    }
    kv[key] = value;
  }
  return kv;
}

KeyValues parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

void apply_override(KeyValues& kv, const std::string& assignment) {
  std::size_t eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override must be key=value, got '" + assignment + "'");
  }
  std::string key = trim(assignment.substr(0, eq));
  if (key.empty()) throw ConfigError("override has empty key: '" + assignment + "'");
  kv[key] = trim(assignment.substr(eq + 1));
}

std::string render_config(const KeyValues& kv) {
  std::string out;
  for (const auto& [key, value] : kv) {
    out += key + " = " + value + "\n";
  }
  return out;
}

RunConfig RunConfig::resolve(const KeyValues& kv) {
  for (const auto& [key, value] : kv) {
    if (!known_keys().count(key)) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  auto get = [&](const char* key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  RunConfig cfg;
  if (const auto* v = get("dataset_path")) cfg.dataset_path = *v;
  if (const auto* v = get("task")) cfg.task = task_from_string(*v);
  if (const auto* v = get("arm")) cfg.arm = *v;
  if (const auto* v = get("policy_mode")) cfg.policy.mode = policy_mode_from_string(*v);
  if (const auto* v = get("policy_alpha")) cfg.policy.alpha = parse_double("policy_alpha", *v);
  if (const auto* v = get("policy_threshold")) {
    cfg.policy.threshold = parse_size("policy_threshold", *v);
  }
  if (const auto* v = get("gate")) cfg.gate = gate_from_string(*v);
  if (const auto* v = get("sparse_min_df")) cfg.sparse.min_df = parse_size("sparse_min_df", *v);
  if (const auto* v = get("sparse_max_df")) cfg.sparse.max_df = parse_double("sparse_max_df", *v);
  if (const auto* v = get("sparse_sublinear_tf")) {
    cfg.sparse.sublinear_tf = parse_bool("sparse_sublinear_tf", *v);
  }
  if (const auto* v = get("retrieval_top_n")) cfg.retrieval.top_n = parse_size("retrieval_top_n", *v);
  if (const auto* v = get("retrieval_top_m")) cfg.retrieval.top_m = parse_size("retrieval_top_m", *v);
  if (const auto* v = get("retrieval_k")) cfg.retrieval.k = parse_size("retrieval_k", *v);
  if (const auto* v = get("embedding_provider")) cfg.embedding_provider = *v;
  if (const auto* v = get("embedding_file")) cfg.embedding_file = *v;
  if (const auto* v = get("embedding_dim")) cfg.trigram.dim = parse_size("embedding_dim", *v);
  if (const auto* v = get("embedding_seed")) cfg.trigram.seed = parse_u64("embedding_seed", *v);
  if (const auto* v = get("embedding_max_tokens")) {
    cfg.trigram.max_seq_tokens = parse_size("embedding_max_tokens", *v);
  }
  if (const auto* v = get("clause_token_cap")) {
    cfg.augmentation.clause_token_cap = parse_size("clause_token_cap", *v);
  }
  if (const auto* v = get("max_model_length")) {
    cfg.augmentation.max_model_length = parse_size("max_model_length", *v);
  }
  if (const auto* v = get("prompt_orig")) cfg.augmentation.prompt_orig = *v;
  if (const auto* v = get("prompt_ref")) cfg.augmentation.prompt_ref = *v;
  if (const auto* v = get("separator")) cfg.augmentation.separator = *v;
  if (const auto* v = get("eval_gating")) cfg.augmentation.eval_gating = *v;
  if (const auto* v = get("learning_rate")) cfg.training.learning_rate = parse_double("learning_rate", *v);
  if (const auto* v = get("batch_size_train")) {
    cfg.training.batch_size_train = parse_size("batch_size_train", *v);
  }
  if (const auto* v = get("batch_size_eval")) {
    cfg.training.batch_size_eval = parse_size("batch_size_eval", *v);
  }
  if (const auto* v = get("patience")) cfg.training.patience = parse_size("patience", *v);
  if (const auto* v = get("max_epochs")) cfg.training.max_epochs = parse_size("max_epochs", *v);
  if (const auto* v = get("grad_clip_norm")) {
    cfg.training.grad_clip_norm = parse_double("grad_clip_norm", *v);
  }
  if (const auto* v = get("multilabel_threshold")) {
    cfg.training.multilabel_threshold = parse_double("multilabel_threshold", *v);
  }
  if (const auto* v = get("feature_min_df")) cfg.featurizer.min_df = parse_size("feature_min_df", *v);
  if (const auto* v = get("feature_max_df")) cfg.featurizer.max_df = parse_double("feature_max_df", *v);
  if (const auto* v = get("feature_sublinear_tf")) {
    cfg.featurizer.sublinear_tf = parse_bool("feature_sublinear_tf", *v);
  }
  if (const auto* v = get("eval_resamples")) cfg.eval_resamples = parse_size("eval_resamples", *v);
  if (const auto* v = get("eval_level")) cfg.eval_level = parse_double("eval_level", *v);
  if (const auto* v = get("seed")) cfg.seed = parse_u64("seed", *v);
  if (const auto* v = get("compare_top_k")) cfg.compare_top_k = parse_size("compare_top_k", *v);
  if (const auto* v = get("out_dir")) cfg.out_dir = *v;
  if (const auto* v = get("bucket_fractions")) {
    cfg.bucket_fractions = parse_double_list("bucket_fractions", *v);
  }
  if (const auto* v = get("percentiles")) cfg.percentiles = parse_double_list("percentiles", *v);
  if (const auto* v = get("sweep_cutoffs")) cfg.sweep_cutoffs = parse_double_list("sweep_cutoffs", *v);
  if (const auto* v = get("selection_metric")) cfg.selection_metric = *v;

  // The run seed also drives training unless the caller pinned it separately.
  cfg.training.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

void RunConfig::validate() const {
  if (arm != "baseline" && arm != "full" && arm != "sra") {
    throw ConfigError("arm must be baseline, full or sra; got '" + arm + "'");
  }
  if (embedding_provider != "trigram" && embedding_provider != "file") {
    throw ConfigError("embedding_provider must be trigram or file; got '" +
                      embedding_provider + "'");
  }
  if (embedding_provider == "file" && embedding_file.empty()) {
    throw ConfigError("embedding_provider=file requires embedding_file");
  }
  if (selection_metric != "macro_f1" && selection_metric != "micro_f1") {
    throw ConfigError("selection_metric must be macro_f1 or micro_f1");
  }
  augmentation.validate();
  training.validate();
}

KeyValues RunConfig::to_key_values() const {
  KeyValues kv;
  kv["dataset_path"] = dataset_path;
  kv["task"] = to_string(task);
  kv["arm"] = arm;
  kv["policy_mode"] = to_string(policy.mode);
  kv["policy_alpha"] = format_double(policy.alpha);
  kv["policy_threshold"] = std::to_string(policy.threshold);
  kv["gate"] = to_string(gate);
  kv["sparse_min_df"] = std::to_string(sparse.min_df);
  kv["sparse_max_df"] = format_double(sparse.max_df);
  kv["sparse_sublinear_tf"] = sparse.sublinear_tf ? "true" : "false";
  kv["retrieval_top_n"] = std::to_string(retrieval.top_n);
  kv["retrieval_top_m"] = std::to_string(retrieval.top_m);
  kv["retrieval_k"] = std::to_string(retrieval.k);
  kv["embedding_provider"] = embedding_provider;
  kv["embedding_file"] = embedding_file;
  kv["embedding_dim"] = std::to_string(trigram.dim);
  kv["embedding_seed"] = std::to_string(trigram.seed);
  kv["embedding_max_tokens"] = std::to_string(trigram.max_seq_tokens);
  kv["clause_token_cap"] = std::to_string(augmentation.clause_token_cap);
  kv["max_model_length"] = std::to_string(augmentation.max_model_length);
  kv["prompt_orig"] = augmentation.prompt_orig;
  kv["prompt_ref"] = augmentation.prompt_ref;
  kv["separator"] = augmentation.separator;
  kv["eval_gating"] = augmentation.eval_gating;
  kv["learning_rate"] = format_double(training.learning_rate);
  kv["batch_size_train"] = std::to_string(training.batch_size_train);
  kv["batch_size_eval"] = std::to_string(training.batch_size_eval);
  kv["patience"] = std::to_string(training.patience);
  kv["max_epochs"] = std::to_string(training.max_epochs);
  kv["grad_clip_norm"] = format_double(training.grad_clip_norm);
  kv["multilabel_threshold"] = format_double(training.multilabel_threshold);
  kv["feature_min_df"] = std::to_string(featurizer.min_df);
  kv["feature_max_df"] = format_double(featurizer.max_df);
  kv["feature_sublinear_tf"] = featurizer.sublinear_tf ? "true" : "false";
  kv["eval_resamples"] = std::to_string(eval_resamples);
  kv["eval_level"] = format_double(eval_level);
  kv["seed"] = std::to_string(seed);
  kv["compare_top_k"] = std::to_string(compare_top_k);
  kv["out_dir"] = out_dir;
  kv["bucket_fractions"] = render_double_list(bucket_fractions);
  kv["percentiles"] = render_double_list(percentiles);
  kv["sweep_cutoffs"] = render_double_list(sweep_cutoffs);
  kv["selection_metric"] = selection_metric;
  return kv;
}

}  // namespace sra
