#include "sra/util.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

namespace sra {

std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  SplitMix64 g(b);
  return SplitMix64(a ^ g.next()).next();
}

std::uint64_t fnv1a64_bytes(const void* data, std::size_t len, std::uint64_t state) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    state ^= p[i];
    state *= 0x100000001b3ull;
  }
  return state;
}

std::uint64_t fnv1a64(const std::string& s, std::uint64_t state) {
  return fnv1a64_bytes(s.data(), s.size(), state);
}

std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

namespace text {

std::vector<std::string> whitespace_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  const std::size_t n = s.size();
  while (i < n) {
    while (i < n && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t start = i;
    while (i < n && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.emplace_back(s, start, i - start);
  }
  return out;
}

std::size_t whitespace_token_count(const std::string& s) {
  std::size_t count = 0;
  bool in_token = false;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++count;
    }
  }
  return count;
}

std::string join(const std::vector<std::string>& tokens, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

std::vector<std::string> word_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : s) {
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<std::string> unigrams_and_bigrams(const std::string& s) {
  std::vector<std::string> words = word_tokens(s);
  std::vector<std::string> out;
  out.reserve(words.size() * 2);
  for (const auto& w : words) out.push_back(w);
  for (std::size_t i = 0; i + 1 < words.size(); ++i) {
    out.push_back(words[i] + " " + words[i + 1]);
  }
  return out;
}

}  // namespace text
}  // namespace sra
