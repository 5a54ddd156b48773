#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace sra {

// SplitMix64. Pinned here so every random stream in the toolkit is
// reproducible across platforms and standard-library versions.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform draw in [0, n). Modulo bias is negligible at the scales used here
  // and keeps the stream identical everywhere.
  std::uint64_t below(std::uint64_t n) { return next() % n; }

  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

std::uint64_t mix64(std::uint64_t a, std::uint64_t b);

std::uint64_t fnv1a64_bytes(const void* data, std::size_t len,
                            std::uint64_t state = 0xcbf29ce484222325ull);
std::uint64_t fnv1a64(const std::string& s,
                      std::uint64_t state = 0xcbf29ce484222325ull);
std::string to_hex(std::uint64_t v);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

// In-place Fisher-Yates with an explicit stream; std::shuffle is not
// reproducible across standard libraries.
template <typename T>
void deterministic_shuffle(std::vector<T>& v, SplitMix64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.below(i)]);
  }
}

namespace text {

// Tokens separated by runs of whitespace; used for length caps and
// percentile statistics.
std::vector<std::string> whitespace_tokens(const std::string& s);
std::size_t whitespace_token_count(const std::string& s);
std::string join(const std::vector<std::string>& tokens,
                 const std::string& sep = " ");

// Lowercased words split on non-alphanumeric runs; used by the sparse index
// and the classifier featurizer.
std::vector<std::string> word_tokens(const std::string& s);

// Word unigrams plus adjacent bigrams; bigram terms are "w1 w2".
std::vector<std::string> unigrams_and_bigrams(const std::string& s);

}  // namespace text
}  // namespace sra
