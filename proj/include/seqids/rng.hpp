#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace seqids {

using Rng = std::mt19937_64;

// Independent generator for a (seed, key...) tuple. Streams for different
// keys do not overlap in any practical sense and do not depend on the
// order in which they are created.
inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys = {}) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * keys.size());
  auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (std::uint64_t k : keys) push(k);
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

/// Stream tags used across the pipeline so that each consumer draws from
/// its own generator.
enum class StreamTag : std::uint64_t {
  Episode = 1,
  Split = 2,
  RankingForest = 3,
  Symbolizer = 4,
  BaumWelch = 5,
  Lstm = 6,
  ActionForest = 7,
  LabelSample = 8,
};

inline Rng make_stream(std::uint64_t seed, StreamTag tag, std::uint64_t sub = 0) {
  return make_stream(seed, {static_cast<std::uint64_t>(tag), sub});
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace seqids
