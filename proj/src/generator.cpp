#include "probmusic/generator.hpp"

#include <cmath>

#include "probmusic/midi.hpp"

namespace probmusic {

namespace {
__extension__ typedef unsigned __int128 uint128;
}

void GenParams::validate() const {
  if (length_ms < 1) throw Error(Errc::InvalidParams, "length must be at least 1 word");
  if (streams_k < 1) throw Error(Errc::InvalidParams, "need at least one stream");
  if (streams_k > kMaxStreams) {
    throw Error(Errc::TooManyStreams,
                "at most " + std::to_string(kMaxStreams) + " streams fit on the melodic MIDI channels");
  }
  if (!(change_prob_p >= 0.0 && change_prob_p <= 1.0)) {
    throw Error(Errc::InvalidParams, "instrument-change probability must lie in [0, 1]");
  }
  if (!(stagger_s >= 0.0) || !std::isfinite(stagger_s)) {
    throw Error(Errc::InvalidParams, "stagger must be a non-negative number of seconds");
  }
  if (tempo.empty()) throw Error(Errc::InvalidParams, "tempo name must not be empty");
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RandomStream RandomStream::substream(std::uint64_t master_seed, std::uint64_t index) {
  return RandomStream(splitmix64(splitmix64(master_seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL)));
}

std::size_t RandomStream::uniform_index(std::size_t n) {
  auto wide = static_cast<uint128>(next()) * static_cast<uint128>(n);
  return static_cast<std::size_t>(wide >> 64);
}

bool RandomStream::bernoulli(double p) {
  // 53 high bits give a uniform double in [0, 1).
  double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
  return u < p;
}

std::size_t MScore::word_count() const {
  std::size_t n = 0;
  for (const ScoreEvent& e : events) n += std::holds_alternative<Word>(e);
  return n;
}

std::size_t MScore::instrument_change_count() const {
  std::size_t n = 0;
  for (const ScoreEvent& e : events) n += std::holds_alternative<InstrumentChange>(e);
  return n;
}

MScore generate_mscore(const CompositionSpec& spec, const GenParams& params, RandomStream& rng,
                       int stream_index) {
  params.validate();
  MScore score;
  score.stream_index = stream_index;
  score.events.reserve(static_cast<std::size_t>(params.length_ms) * 2 + 2);
  score.events.emplace_back(TempoMark{params.tempo});
  score.events.emplace_back(InstrumentChange{pick_from_bag(spec.instruments, rng)});
  for (int w = 0; w < params.length_ms; ++w) {
    const NoteElement& notes = pick_from_bag(spec.notes, rng);
    const OctaveDuration& od = pick_from_bag(spec.octave_durations, rng);
    score.events.emplace_back(Word{notes, od});
    if (w + 1 < params.length_ms && rng.bernoulli(params.change_prob_p)) {
      score.events.emplace_back(InstrumentChange{pick_from_bag(spec.instruments, rng)});
    }
  }
  return score;
}

std::vector<MScore> generate_piece(const CompositionSpec& spec, const GenParams& params) {
  params.validate();
  std::vector<MScore> scores;
  scores.reserve(static_cast<std::size_t>(params.streams_k));
  for (int i = 0; i < params.streams_k; ++i) {
    RandomStream rng = RandomStream::substream(params.master_seed, static_cast<std::uint64_t>(i));
    scores.push_back(generate_mscore(spec, params, rng, i));
  }
  return scores;
}

}  // namespace probmusic
