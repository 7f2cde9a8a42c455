#pragma once

// Offline realization of scores as tick-stamped MIDI events and type-1
// Standard MIDI Files.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "probmusic/generator.hpp"
#include "probmusic/spec.hpp"

namespace probmusic {

struct TimingConfig {
  int ppq = 480;
  int bpm = 120;
  int velocity = 64;

  // Throws Error(InvalidParams). ppq must be even so eighths land on ticks.
  void validate() const;
  // Microseconds per quarter note for the tempo meta event.
  std::uint32_t tempo_us_per_quarter() const noexcept;
};

inline constexpr int kPercussionChannel = 9;
inline constexpr int kMaxStreams = 15;
inline constexpr std::uint8_t kVolumeController = 7;
inline constexpr std::uint8_t kAllNotesOffController = 123;
inline constexpr double kDefaultFadeWindowSeconds = 5.0;
inline constexpr int kFadeSteps = 20;
inline constexpr std::uint8_t kFadeStartVolume = 100;

enum class MidiType : std::uint8_t { NoteOff, NoteOn, ControlChange, ProgramChange };

struct MidiEvent {
  std::int64_t tick = 0;
  std::uint8_t channel = 0;
  MidiType type = MidiType::NoteOn;
  std::uint8_t data1 = 0;
  std::uint8_t data2 = 0;

  static MidiEvent note_on(std::int64_t tick, int channel, int note, int velocity);
  static MidiEvent note_off(std::int64_t tick, int channel, int note);
  static MidiEvent program_change(std::int64_t tick, int channel, int program);
  static MidiEvent control_change(std::int64_t tick, int channel, int controller, int value);

  std::uint8_t status() const noexcept;
  // Wire bytes: status plus one or two data bytes.
  std::vector<std::uint8_t> bytes() const;

  bool operator==(const MidiEvent&) const = default;
};

// 12 * octave + pitch offset; absent octave means kDefaultOctave.
// Throws Error(OutOfMidiRange) above 127.
int note_number(Pitch pitch, std::optional<int> octave);

std::int64_t duration_ticks(Duration duration, const TimingConfig& timing);

std::int64_t seconds_to_ticks(double seconds, const TimingConfig& timing);
double ticks_to_seconds(std::int64_t ticks, const TimingConfig& timing);

// Stream i plays on channel i, skipping the percussion channel.
int stream_channel(int stream_index);

std::vector<MidiEvent> render_mscore(const MScore& score, int channel, const TimingConfig& timing);

// Adds a CC7 baseline at tick 0 and a kFadeSteps-step linear ramp from
// kFadeStartVolume to 0 across the last window_s seconds of the track.
std::vector<MidiEvent> apply_fadeout(std::span<const MidiEvent> track, int channel,
                                     const TimingConfig& timing,
                                     double window_s = kDefaultFadeWindowSeconds);

struct SmfDocument {
  int format = 1;
  int ppq = 480;
  std::uint32_t tempo_us_per_quarter = 500000;
  std::vector<std::vector<MidiEvent>> tracks;
};

// Renders one track per score: channel stream_channel(i), fade-out, then
// every tick shifted by round(i * stagger_s * bpm / 60 * ppq).
SmfDocument assemble_smf(std::span<const MScore> scores, const GenParams& params,
                         const TimingConfig& timing);

std::int64_t stagger_offset_ticks(int stream_index, double stagger_s, const TimingConfig& timing);

// Big-endian chunks, VLQ delta times, no running status. Tempo meta on
// track 0, end-of-track meta on every track.
std::vector<std::uint8_t> encode_smf(const SmfDocument& doc);

void append_vlq(std::vector<std::uint8_t>& out, std::uint32_t value);

}  // namespace probmusic
