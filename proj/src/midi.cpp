#include "probmusic/midi.hpp"

#include <algorithm>
#include <cmath>

#include "probmusic/instruments.hpp"

namespace probmusic {

void TimingConfig::validate() const {
  if (ppq < 2 || ppq % 2 != 0 || ppq > 0x7FFF) {
    throw Error(Errc::InvalidParams, "ppq must be an even number between 2 and 32767");
  }
  if (bpm < 20 || bpm > 300) throw Error(Errc::InvalidParams, "bpm must lie in [20, 300]");
  if (velocity < 0 || velocity > 127) throw Error(Errc::InvalidParams, "velocity must lie in [0, 127]");
}

std::uint32_t TimingConfig::tempo_us_per_quarter() const noexcept {
  return static_cast<std::uint32_t>(60'000'000 / bpm);
}

namespace {

std::uint8_t data_byte(int value, const char* what) {
  if (value < 0 || value > 127) {
    throw Error(Errc::OutOfMidiRange, std::string(what) + " " + std::to_string(value) + " is outside 0..127");
  }
  return static_cast<std::uint8_t>(value);
}

std::int64_t checked_tick(std::int64_t tick) {
  if (tick < 0) throw Error(Errc::InvalidParams, "event tick must not be negative");
  return tick;
}

std::uint8_t channel_nibble(int channel) {
  if (channel < 0 || channel > 15) throw Error(Errc::InvalidParams, "MIDI channel must lie in 0..15");
  return static_cast<std::uint8_t>(channel);
}

}  // namespace

MidiEvent MidiEvent::note_on(std::int64_t tick, int channel, int note, int velocity) {
  return {checked_tick(tick), channel_nibble(channel), MidiType::NoteOn, data_byte(note, "note"), data_byte(velocity, "velocity")};
}

MidiEvent MidiEvent::note_off(std::int64_t tick, int channel, int note) {
  return {checked_tick(tick), channel_nibble(channel), MidiType::NoteOff, data_byte(note, "note"), 0};
}

MidiEvent MidiEvent::program_change(std::int64_t tick, int channel, int program) {
  return {checked_tick(tick), channel_nibble(channel), MidiType::ProgramChange, data_byte(program, "program"), 0};
}

MidiEvent MidiEvent::control_change(std::int64_t tick, int channel, int controller, int value) {
  return {checked_tick(tick), channel_nibble(channel), MidiType::ControlChange, data_byte(controller, "controller"),
          data_byte(value, "controller value")};
}

std::uint8_t MidiEvent::status() const noexcept {
  std::uint8_t high = 0;
  switch (type) {
    case MidiType::NoteOff: high = 0x80; break;
    case MidiType::NoteOn: high = 0x90; break;
    case MidiType::ControlChange: high = 0xB0; break;
    case MidiType::ProgramChange: high = 0xC0; break;
  }
  return static_cast<std::uint8_t>(high | (channel & 0x0F));
}

std::vector<std::uint8_t> MidiEvent::bytes() const {
  if (type == MidiType::ProgramChange) return {status(), data1};
  return {status(), data1, data2};
}

int note_number(Pitch pitch, std::optional<int> octave) {
  int oct = octave.value_or(kDefaultOctave);
  int number = 12 * oct + pitch_offset(pitch);
  if (number > 127) {
    throw Error(Errc::OutOfMidiRange, std::string(1, pitch_letter(pitch)) + std::to_string(oct) +
                                          " is MIDI note " + std::to_string(number) + " (> 127)");
  }
  return number;
}

std::int64_t duration_ticks(Duration duration, const TimingConfig& timing) {
  switch (duration) {
    case Duration::Whole: return 4LL * timing.ppq;
    case Duration::Half: return 2LL * timing.ppq;
    case Duration::Quarter: return timing.ppq;
    case Duration::Eighth: return timing.ppq / 2;
  }
  return timing.ppq;
}

std::int64_t seconds_to_ticks(double seconds, const TimingConfig& timing) {
  return std::llround(seconds * timing.bpm / 60.0 * timing.ppq);
}

double ticks_to_seconds(std::int64_t ticks, const TimingConfig& timing) {
  return static_cast<double>(ticks) * 60.0 / (static_cast<double>(timing.bpm) * timing.ppq);
}

int stream_channel(int stream_index) {
  if (stream_index < 0 || stream_index >= kMaxStreams) {
    throw Error(Errc::TooManyStreams, "stream index " + std::to_string(stream_index) + " has no free channel");
  }
  return stream_index < kPercussionChannel ? stream_index : stream_index + 1;
}

std::vector<MidiEvent> render_mscore(const MScore& score, int channel, const TimingConfig& timing) {
  timing.validate();
  std::vector<MidiEvent> out;
  std::int64_t cursor = 0;
  for (const ScoreEvent& event : score.events) {
    if (const auto* change = std::get_if<InstrumentChange>(&event)) {
      out.push_back(MidiEvent::program_change(cursor, channel, program_number(change->instrument)));
    } else if (const auto* word = std::get_if<Word>(&event)) {
      std::int64_t length = duration_ticks(word->od.duration, timing);
      for (Pitch pitch : word->notes.notes) {
        int note = note_number(pitch, word->od.octave);
        out.push_back(MidiEvent::note_on(cursor, channel, note, timing.velocity));
        out.push_back(MidiEvent::note_off(cursor + length, channel, note));
        cursor += length;
      }
    }
  }
  return out;
}

std::vector<MidiEvent> apply_fadeout(std::span<const MidiEvent> track, int channel, const TimingConfig& timing,
                                     double window_s) {
  std::vector<MidiEvent> out;
  out.reserve(track.size() + kFadeSteps + 1);
  out.push_back(MidiEvent::control_change(0, channel, kVolumeController, kFadeStartVolume));
  if (track.empty()) return out;

  std::int64_t end = 0;
  for (const MidiEvent& e : track) end = std::max(end, e.tick);
  std::int64_t start = std::max<std::int64_t>(0, end - seconds_to_ticks(window_s, timing));

  std::vector<MidiEvent> ramp;
  for (int step = 0; step < kFadeSteps; ++step) {
    double frac = static_cast<double>(step) / (kFadeSteps - 1);
    std::int64_t tick = start + std::llround(frac * static_cast<double>(end - start));
    int value = static_cast<int>(std::lround(kFadeStartVolume * (1.0 - frac)));
    ramp.push_back(MidiEvent::control_change(tick, channel, kVolumeController, value));
  }

  // Ramp steps go after the track's own events at the same tick, so the
  // final note-offs land before the volume reaches zero.
  std::size_t r = 0;
  for (const MidiEvent& e : track) {
    while (r < ramp.size() && ramp[r].tick < e.tick) out.push_back(ramp[r++]);
    out.push_back(e);
  }
  while (r < ramp.size()) out.push_back(ramp[r++]);
  return out;
}

std::int64_t stagger_offset_ticks(int stream_index, double stagger_s, const TimingConfig& timing) {
  return seconds_to_ticks(stream_index * stagger_s, timing);
}

SmfDocument assemble_smf(std::span<const MScore> scores, const GenParams& params, const TimingConfig& timing) {
  timing.validate();
  if (scores.size() > static_cast<std::size_t>(kMaxStreams)) {
    throw Error(Errc::TooManyStreams, "at most " + std::to_string(kMaxStreams) + " streams per file");
  }
  SmfDocument doc;
  doc.ppq = timing.ppq;
  doc.tempo_us_per_quarter = timing.tempo_us_per_quarter();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    int channel = stream_channel(static_cast<int>(i));
    std::vector<MidiEvent> track = apply_fadeout(render_mscore(scores[i], channel, timing), channel, timing);
    std::int64_t offset = stagger_offset_ticks(static_cast<int>(i), params.stagger_s, timing);
    for (MidiEvent& e : track) e.tick += offset;
    doc.tracks.push_back(std::move(track));
  }
  return doc;
}

void append_vlq(std::vector<std::uint8_t>& out, std::uint32_t value) {
  if (value > 0x0FFFFFFF) throw Error(Errc::OutOfMidiRange, "delta time exceeds the 28-bit VLQ range");
  std::uint8_t groups[4];
  int n = 0;
  do {
    groups[n++] = static_cast<std::uint8_t>(value & 0x7F);
    value >>= 7;
  } while (value);
  while (n > 1) out.push_back(static_cast<std::uint8_t>(groups[--n] | 0x80));
  out.push_back(groups[0]);
}

namespace {

void append_be(std::vector<std::uint8_t>& out, std::uint32_t value, int bytes) {
  for (int shift = (bytes - 1) * 8; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>((value >> shift) & 0xFF));
  }
}

std::vector<std::uint8_t> track_chunk(const std::vector<MidiEvent>& events, const SmfDocument& doc,
                                      bool with_tempo) {
  std::vector<std::uint8_t> data;
  std::int64_t last = 0;
  if (with_tempo) {
    append_vlq(data, 0);
    data.insert(data.end(), {0xFF, 0x51, 0x03});
    append_be(data, doc.tempo_us_per_quarter, 3);
  }
  for (const MidiEvent& e : events) {
    if (e.tick < last) throw Error(Errc::InvalidParams, "track events are not tick-sorted");
    append_vlq(data, static_cast<std::uint32_t>(e.tick - last));
    last = e.tick;
    auto bytes = e.bytes();
    data.insert(data.end(), bytes.begin(), bytes.end());
  }
  append_vlq(data, 0);
  data.insert(data.end(), {0xFF, 0x2F, 0x00});

  std::vector<std::uint8_t> chunk = {'M', 'T', 'r', 'k'};
  append_be(chunk, static_cast<std::uint32_t>(data.size()), 4);
  chunk.insert(chunk.end(), data.begin(), data.end());
  return chunk;
}

}  // namespace

std::vector<std::uint8_t> encode_smf(const SmfDocument& doc) {
  std::vector<std::uint8_t> out = {'M', 'T', 'h', 'd'};
  append_be(out, 6, 4);
  append_be(out, static_cast<std::uint32_t>(doc.format), 2);
  // An empty piece still gets one track to carry the tempo.
  std::size_t ntracks = std::max<std::size_t>(1, doc.tracks.size());
  append_be(out, static_cast<std::uint32_t>(ntracks), 2);
  append_be(out, static_cast<std::uint32_t>(doc.ppq), 2);
  static const std::vector<MidiEvent> kEmpty;
  for (std::size_t i = 0; i < ntracks; ++i) {
    auto chunk = track_chunk(i < doc.tracks.size() ? doc.tracks[i] : kEmpty, doc, i == 0);
    out.insert(out.end(), chunk.begin(), chunk.end());
  }
  return out;
}

}  // namespace probmusic
