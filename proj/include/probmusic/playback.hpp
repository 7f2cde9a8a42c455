#pragma once

// Live playback: one execution context per stream, each staggered and paced
// against its own start time. Streams never wait on each other; only the
// write of a single message to the shared port is serialized.

#include <atomic>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "probmusic/generator.hpp"
#include "probmusic/midi.hpp"
#include "probmusic/midi_output.hpp"
#include "probmusic/notation.hpp"

namespace probmusic {

enum class SessionState { Playing, Stopping, Stopped };

std::string_view session_state_name(SessionState state) noexcept;

struct PlaybackStatus {
  SessionState state = SessionState::Stopped;
  double elapsed_s = 0.0;
  std::vector<std::size_t> words_played;
  std::size_t length_ms = 0;
};

struct PlaybackOptions {
  // Invoked on stream `stream`'s own context when it begins playing.
  std::function<void(int stream)> on_stream_start;
  // Invoked on the stream's context before it waits for event `index`,
  // outside the port lock. Lets tests inject per-stream delays.
  std::function<void(int stream, std::size_t index)> before_event;
};

// One timed message of a stream, relative to that stream's start.
struct ScheduledEvent {
  Clock::Duration at;
  MidiEvent event;
  bool starts_word = false;
};

// Render + fade of one score, converted to nanoseconds at the configured tempo.
std::vector<ScheduledEvent> schedule_stream(const MScore& score, int channel, const TimingConfig& timing);

Clock::Duration ticks_to_duration(std::int64_t ticks, const TimingConfig& timing);

class PlaybackSession {
 public:
  PlaybackSession(std::string piece_id, std::vector<MScore> scores, const TimingConfig& timing,
                  const GenParams& params, std::shared_ptr<MidiOutput> device, std::shared_ptr<Clock> clock,
                  PlaybackOptions options = {});
  ~PlaybackSession();

  PlaybackSession(const PlaybackSession&) = delete;
  PlaybackSession& operator=(const PlaybackSession&) = delete;

  // Halts every stream, then sends All-Notes-Off and a volume reset on each
  // used channel. Idempotent and callable from any context except a stream's.
  SessionState stop();

  PlaybackStatus status() const;
  SessionState state() const;
  // Blocks (in real time) until the session reaches Stopped.
  void wait() const;

  const std::string& piece_id() const noexcept { return piece_id_; }
  CivilTime started_at() const noexcept { return started_at_; }
  const std::vector<MScore>& scores() const noexcept { return scores_; }

 private:
  void run_stream(std::stop_token stop, int index);
  void send(const MidiEvent& event);
  void finish_stream();

  std::string piece_id_;
  std::vector<MScore> scores_;
  TimingConfig timing_;
  GenParams params_;
  std::shared_ptr<MidiOutput> device_;
  std::shared_ptr<Clock> clock_;
  PlaybackOptions options_;
  CivilTime started_at_;
  Clock::Duration start_time_{0};

  std::vector<std::vector<ScheduledEvent>> schedules_;
  std::unique_ptr<std::atomic<std::size_t>[]> progress_;
  std::mutex device_mutex_;

  mutable std::mutex state_mutex_;
  mutable std::condition_variable state_cv_;
  SessionState state_ = SessionState::Playing;
  Clock::Duration stopped_at_{0};
  int running_ = 0;

  std::mutex stop_mutex_;
  std::vector<std::jthread> threads_;
};

// Validates inputs, then launches one context per score. Throws
// Error(TooManyStreams) or Error(InvalidParams).
std::shared_ptr<PlaybackSession> play_piece(std::string piece_id, std::vector<MScore> scores,
                                            const TimingConfig& timing, const GenParams& params,
                                            std::shared_ptr<MidiOutput> device, std::shared_ptr<Clock> clock,
                                            PlaybackOptions options = {});

}  // namespace probmusic
