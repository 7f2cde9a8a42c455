#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "probmusic/spec.hpp"

namespace fixtures {

// The example piece, byte for byte, including the trailing comma.
inline const std::string kFig1Text = R"({
  {"Relaxing, Oct 24, 2013"},
  {"A","C","E","G"},
  {"3q","2h","5w","h","4h"},
  {"Oboe","ELECTRIC_JAZZ_GUITAR","Atmosphere","Choir","Choir_AAHS"},
}
)";

inline const std::string kMinimalText = R"({{"t"},{"C"},{"q"},{"Oboe"}})";

inline probmusic::CompositionSpec fig1() { return probmusic::parse_spec(kFig1Text); }

// Random valid spec for property tests. Octaves stay in 1..9 so every
// note fits in MIDI; multi-note elements only when allowed.
inline probmusic::CompositionSpec random_spec(std::mt19937_64& rng, bool allow_sequences = false) {
  using namespace probmusic;
  static const char* kInstruments[] = {"Oboe", "ELECTRIC_JAZZ_GUITAR", "Atmosphere", "Choir", "Choir_AAHS",
                                       "Flute", "Violin", "Acoustic Grand Piano", "Tuba", "Koto"};
  auto uniform = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  CompositionSpec spec;
  spec.title = "piece " + std::to_string(uniform(0, 9999));
  int notes = uniform(1, 8);
  for (int i = 0; i < notes; ++i) {
    NoteElement e;
    int len = allow_sequences ? uniform(1, 3) : 1;
    for (int k = 0; k < len; ++k) e.notes.push_back(static_cast<Pitch>(uniform(0, 6)));
    spec.notes.push_back(e);
  }
  int ods = uniform(1, 8);
  for (int i = 0; i < ods; ++i) {
    OctaveDuration od;
    if (uniform(0, 3) != 0) od.octave = uniform(1, 9);
    od.duration = static_cast<Duration>(uniform(0, 3));
    spec.octave_durations.push_back(od);
  }
  int instruments = uniform(1, 6);
  for (int i = 0; i < instruments; ++i) spec.instruments.push_back({kInstruments[uniform(0, 9)]});
  int keywords = uniform(0, 3);
  for (int i = 0; i < keywords; ++i) spec.keywords.insert("kw" + std::to_string(uniform(0, 5)));
  return spec;
}

}  // namespace fixtures
