#pragma once

// Seeded weighted sampling of scores from a composition spec.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "probmusic/error.hpp"
#include "probmusic/spec.hpp"

namespace probmusic {

struct GenParams {
  int length_ms = 120;  // words per stream
  int streams_k = 3;
  double change_prob_p = 0.4;
  double stagger_s = 3.0;
  std::uint64_t master_seed = 0;
  std::string tempo = "Allegro";

  // Throws Error(InvalidParams) or Error(TooManyStreams).
  void validate() const;
};

// 64-bit Mersenne Twister behind a fixed draw discipline: every uniform
// index and every Bernoulli trial consumes exactly one 64-bit output.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  // Independent stream for (master_seed, index), seeded through splitmix64.
  static RandomStream substream(std::uint64_t master_seed, std::uint64_t index);

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, n) by 128-bit multiply-high; n must be > 0.
  std::size_t uniform_index(std::size_t n);
  bool bernoulli(double p);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

template <typename T>
const T& pick_from_bag(std::span<const T> bag, RandomStream& rng) {
  if (bag.empty()) throw Error(Errc::EmptyBag, "cannot pick from an empty bag");
  return bag[rng.uniform_index(bag.size())];
}

template <typename T>
const T& pick_from_bag(const std::vector<T>& bag, RandomStream& rng) {
  return pick_from_bag(std::span<const T>(bag), rng);
}

struct TempoMark {
  std::string name;
  bool operator==(const TempoMark&) const = default;
};

struct InstrumentChange {
  InstrumentName instrument;
  bool operator==(const InstrumentChange&) const = default;
};

struct Word {
  NoteElement notes;
  OctaveDuration od;
  bool operator==(const Word&) const = default;
};

using ScoreEvent = std::variant<TempoMark, InstrumentChange, Word>;

struct MScore {
  std::vector<ScoreEvent> events;
  int stream_index = 0;

  std::size_t word_count() const;
  std::size_t instrument_change_count() const;

  bool operator==(const MScore&) const = default;
};

// Tempo, an initial instrument pick, then length_ms words. After every word
// but the last, a Bernoulli(change_prob_p) trial may emit a fresh uniform
// instrument pick (possibly the current one).
MScore generate_mscore(const CompositionSpec& spec, const GenParams& params, RandomStream& rng,
                       int stream_index = 0);

// streams_k scores; stream i draws from RandomStream::substream(master_seed, i).
std::vector<MScore> generate_piece(const CompositionSpec& spec, const GenParams& params);

}  // namespace probmusic
