#pragma once

#include <cstdint>
#include <string>

#include "sra/corpus.hpp"

namespace sra {

// Deterministic single-label corpus with three head classes and nine tail
// classes. Tail train samples come in informative near-duplicate pairs that
// share rare cross-reference tokens; tail validation/test samples carry the
// cross-reference tokens but not the class signature, so they are only
// classifiable once the paired train clause is retrieved and appended. Head
// "boilerplate trap" samples in validation/test carry a thin own-class
// signature plus cross-reference tokens that occur in train only inside
// host documents of the next head class, so indiscriminate augmentation
// appends wrong-class evidence while the policy-gated arm leaves them alone.
struct SyntheticSpec {
  std::size_t head_train = 500;  // per head class, includes host docs
  std::size_t head_eval = 50;    // per head class, per eval split, includes traps
  std::size_t bait_per_head = 3;    // host pairs per head class
  std::size_t traps_per_head = 6;   // per eval split
  std::size_t tail_train = 10;      // per tail class; even (near-duplicate pairs)
  std::size_t tail_eval = 6;        // per tail class, per eval split
  std::size_t confusers_per_tail_eval = 2;
  std::uint64_t seed = 42;
};

Dataset make_synthetic_corpus(const SyntheticSpec& spec = {});

}  // namespace sra
