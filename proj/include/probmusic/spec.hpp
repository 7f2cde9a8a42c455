#pragma once

// Composition specifications: the four-row brace format with an optional
// keyword row.
//
//   {
//     {"Relaxing, Oct 24, 2013"},
//     {"A","C","E","G"},
//     {"3q","2h","5w","h","4h"},
//     {"Oboe","ELECTRIC_JAZZ_GUITAR","Atmosphere","Choir","Choir_AAHS"},
//   }
//
// Every row after the title is a bag: an ordered multiset in which
// duplicates raise the selection weight of an element.

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "probmusic/error.hpp"

namespace probmusic {

enum class Pitch : std::uint8_t { C, D, E, F, G, A, B };

char pitch_letter(Pitch pitch) noexcept;
std::optional<Pitch> pitch_from_letter(char letter) noexcept;
// Semitone offset above C: C=0 D=2 E=4 F=5 G=7 A=9 B=11.
int pitch_offset(Pitch pitch) noexcept;

// One element of the note bag. Usually a single pitch; "A B" is a sequence
// played consecutively as one word.
struct NoteElement {
  std::vector<Pitch> notes;

  bool is_single() const noexcept { return notes.size() == 1; }
  std::string to_string() const;

  auto operator<=>(const NoteElement&) const = default;
};

enum class Duration : std::uint8_t { Whole, Half, Quarter, Eighth };

char duration_letter(Duration duration) noexcept;
std::optional<Duration> duration_from_letter(char letter) noexcept;

inline constexpr int kMinOctave = 1;
inline constexpr int kMaxOctave = 10;
// Octave used when a token carries only a duration letter; puts C on 60.
inline constexpr int kDefaultOctave = 5;

struct OctaveDuration {
  std::optional<int> octave;
  Duration duration = Duration::Quarter;

  int effective_octave() const noexcept { return octave.value_or(kDefaultOctave); }
  std::string to_string() const;

  auto operator<=>(const OctaveDuration&) const = default;
};

struct InstrumentName {
  std::string value;

  // Upper-cased with spaces folded to '_'; two names denote the same
  // instrument iff their keys are equal.
  std::string key() const;

  auto operator<=>(const InstrumentName&) const = default;
};

struct CompositionSpec {
  std::string title;
  std::vector<NoteElement> notes;
  std::vector<OctaveDuration> octave_durations;
  std::vector<InstrumentName> instruments;
  std::set<std::string> keywords;

  bool operator==(const CompositionSpec&) const = default;
};

// Throws ParseError (MissingRow, EmptyBag, BadNoteToken, BadOctaveDuration,
// BadInstrumentName, UnbalancedBraces, Syntax). Outside strings, "//"
// comments out the rest of the line.
CompositionSpec parse_spec(std::string_view text);

std::string serialize_spec(const CompositionSpec& spec);

// Single-field parsers shared with the score notation.
NoteElement parse_note_element(std::string_view text);
OctaveDuration parse_octave_duration(std::string_view text);
InstrumentName parse_instrument_name(std::string_view text);

struct Violation {
  Errc kind;
  std::string message;
};

// Semantic checks beyond the grammar: every reachable (note, octave) pair
// must fit in MIDI and every instrument must resolve to a GM program.
std::vector<Violation> validate_spec(const CompositionSpec& spec);

struct DistinctCounts {
  std::uint64_t notes = 0;
  std::uint64_t octave_durations = 0;
  std::uint64_t instruments = 0;

  bool operator==(const DistinctCounts&) const = default;
};

// Set cardinalities of the three bags, duplicates collapsed. Instruments
// are compared by InstrumentName::key().
DistinctCounts distinct_counts(const CompositionSpec& spec);

}  // namespace probmusic
