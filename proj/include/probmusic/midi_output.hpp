#pragma once

// MIDI output ports and the clocks that pace live playback.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <set>
#include <span>
#include <stop_token>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace probmusic {

class Clock {
 public:
  using Duration = std::chrono::nanoseconds;

  virtual ~Clock() = default;

  virtual Duration now() const = 0;
  // Blocks until now() >= deadline. Returns false if stop was requested first.
  virtual bool sleep_until(Duration deadline, std::stop_token stop) = 0;

  // A virtual clock only advances while every attached context is asleep.
  virtual void attach() {}
  virtual void detach() {}
};

class SteadyClock final : public Clock {
 public:
  SteadyClock() : origin_(std::chrono::steady_clock::now()) {}

  Duration now() const override;
  bool sleep_until(Duration deadline, std::stop_token stop) override;

 private:
  std::chrono::steady_clock::time_point origin_;
  std::mutex mutex_;
  std::condition_variable cv_;
};

// Discrete-event clock: when all attached contexts are blocked in
// sleep_until, time jumps to the earliest pending deadline.
class VirtualClock final : public Clock {
 public:
  Duration now() const override;
  bool sleep_until(Duration deadline, std::stop_token stop) override;
  void attach() override;
  void detach() override;

  // Manual advance for tests that drive time without attaching.
  void advance_to(Duration t);

 private:
  void advance_locked();

  mutable std::mutex mutex_;
  std::condition_variable cv_;
  Duration now_{0};
  int participants_ = 0;
  std::uint64_t next_ticket_ = 0;
  std::map<std::uint64_t, Duration> waiting_;
};

class ClockParticipant {
 public:
  explicit ClockParticipant(Clock& clock) : clock_(&clock) { clock_->attach(); }
  ~ClockParticipant() {
    if (clock_) clock_->detach();
  }
  ClockParticipant(const ClockParticipant&) = delete;
  ClockParticipant& operator=(const ClockParticipant&) = delete;

 private:
  Clock* clock_;
};

class MidiOutput {
 public:
  virtual ~MidiOutput() = default;
  // One complete channel message per call.
  virtual void send(std::span<const std::uint8_t> message) = 0;
  virtual std::string name() const = 0;
};

class NullMidiOutput final : public MidiOutput {
 public:
  void send(std::span<const std::uint8_t>) override {}
  std::string name() const override { return "null"; }
};

// Writes a readable line per message, e.g. "90 2D 40".
class TraceMidiOutput final : public MidiOutput {
 public:
  explicit TraceMidiOutput(std::ostream& out) : out_(&out) {}
  void send(std::span<const std::uint8_t> message) override;
  std::string name() const override { return "trace"; }

 private:
  std::mutex mutex_;
  std::ostream* out_;
};

// Raw byte stream to a character device such as /dev/snd/midiC0D0.
class RawMidiOutput final : public MidiOutput {
 public:
  explicit RawMidiOutput(std::string path);
  ~RawMidiOutput() override;
  RawMidiOutput(const RawMidiOutput&) = delete;
  RawMidiOutput& operator=(const RawMidiOutput&) = delete;

  void send(std::span<const std::uint8_t> message) override;
  std::string name() const override { return path_; }

 private:
  std::string path_;
  int fd_ = -1;
};

// Test device: timestamps every message against a clock, tracks sounding
// notes and counts calls that overlapped another send in progress.
class RecordingMidiOutput final : public MidiOutput {
 public:
  struct Entry {
    Clock::Duration time;
    std::vector<std::uint8_t> bytes;
  };

  explicit RecordingMidiOutput(const Clock& clock) : clock_(&clock) {}

  void send(std::span<const std::uint8_t> message) override;
  std::string name() const override { return "recording"; }

  std::vector<Entry> entries() const;
  // (channel, note) pairs currently held down.
  std::set<std::pair<int, int>> sounding() const;
  int overlapping_sends() const;

 private:
  const Clock* clock_;
  mutable std::mutex mutex_;
  std::vector<Entry> entries_;
  std::set<std::pair<int, int>> sounding_;
  int in_flight_ = 0;
  int overlaps_ = 0;
};

// Candidate hardware ports: /dev/snd/midiC*D* and /dev/midi*.
std::vector<std::string> list_midi_devices();

// "null", "trace" (to stderr), a device index into list_midi_devices(),
// or a path. An empty selector picks the first available port. Throws
// Error(DeviceUnavailable).
std::unique_ptr<MidiOutput> open_midi_output(std::string_view selector);

}  // namespace probmusic
