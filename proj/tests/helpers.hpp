#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sra/corpus.hpp"

namespace sra::test {

inline std::filesystem::path temp_dir(const std::string& name) {
  std::filesystem::path dir = std::filesystem::current_path() / "test_tmp" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline std::string record_line(const std::string& id, const std::string& text,
                               const std::vector<std::string>& labels,
                               const std::string& split) {
  nlohmann::json j;
  j["id"] = id;
  j["text"] = text;
  j["labels"] = labels;
  j["split"] = split;
  return j.dump() + "\n";
}

// Minimal three-split corpus shells for tests that need a loadable dataset.
inline std::string toy_corpus() {
  std::string body;
  body += record_line("t1", "alpha beta gamma", {"a"}, "train");
  body += record_line("t2", "alpha beta delta", {"a"}, "train");
  body += record_line("t3", "beta gamma delta", {"b"}, "train");
  body += record_line("v1", "alpha gamma", {"a"}, "validation");
  body += record_line("s1", "beta delta", {"b"}, "test");
  return body;
}

}  // namespace sra::test
