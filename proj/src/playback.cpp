#include "probmusic/playback.hpp"

#include <cmath>

namespace probmusic {

std::string_view session_state_name(SessionState state) noexcept {
  switch (state) {
    case SessionState::Playing: return "playing";
    case SessionState::Stopping: return "stopping";
    case SessionState::Stopped: return "stopped";
  }
  return "unknown";
}

Clock::Duration ticks_to_duration(std::int64_t ticks, const TimingConfig& timing) {
  __extension__ typedef __int128 int128;
  int128 ns = static_cast<int128>(ticks) * 60'000'000'000LL / (static_cast<int128>(timing.bpm) * timing.ppq);
  return Clock::Duration(static_cast<std::int64_t>(ns));
}

std::vector<ScheduledEvent> schedule_stream(const MScore& score, int channel, const TimingConfig& timing) {
  std::vector<MidiEvent> events = apply_fadeout(render_mscore(score, channel, timing), channel, timing);

  // NoteOn ordinals at which a new word begins.
  std::vector<bool> word_start_at_note;
  for (const ScoreEvent& e : score.events) {
    if (const auto* w = std::get_if<Word>(&e)) {
      for (std::size_t k = 0; k < w->notes.notes.size(); ++k) word_start_at_note.push_back(k == 0);
    }
  }

  std::vector<ScheduledEvent> out;
  out.reserve(events.size());
  std::size_t note_ordinal = 0;
  for (const MidiEvent& e : events) {
    bool starts_word = false;
    if (e.type == MidiType::NoteOn) starts_word = word_start_at_note.at(note_ordinal++);
    out.push_back({ticks_to_duration(e.tick, timing), e, starts_word});
  }
  return out;
}

PlaybackSession::PlaybackSession(std::string piece_id, std::vector<MScore> scores, const TimingConfig& timing,
                                 const GenParams& params, std::shared_ptr<MidiOutput> device,
                                 std::shared_ptr<Clock> clock, PlaybackOptions options)
    : piece_id_(std::move(piece_id)),
      scores_(std::move(scores)),
      timing_(timing),
      params_(params),
      device_(std::move(device)),
      clock_(std::move(clock)),
      options_(std::move(options)),
      started_at_(local_now()) {
  if (!device_) throw Error(Errc::DeviceUnavailable, "no MIDI output");
  if (!clock_) throw Error(Errc::InvalidParams, "no clock");
  timing_.validate();
  if (scores_.size() > static_cast<std::size_t>(kMaxStreams)) {
    throw Error(Errc::TooManyStreams, "at most " + std::to_string(kMaxStreams) + " streams can play at once");
  }
  for (std::size_t i = 0; i < scores_.size(); ++i) {
    schedules_.push_back(schedule_stream(scores_[i], stream_channel(static_cast<int>(i)), timing_));
  }
  progress_ = std::make_unique<std::atomic<std::size_t>[]>(scores_.size());
  for (std::size_t i = 0; i < scores_.size(); ++i) progress_[i] = 0;

  start_time_ = clock_->now();
  running_ = static_cast<int>(scores_.size());
  if (running_ == 0) {
    state_ = SessionState::Stopped;
    return;
  }
  // Attach before launch so a virtual clock cannot run ahead of a stream
  // that has not reached its first sleep yet.
  for (std::size_t i = 0; i < scores_.size(); ++i) clock_->attach();
  for (std::size_t i = 0; i < scores_.size(); ++i) {
    threads_.emplace_back([this, i](std::stop_token stop) { run_stream(stop, static_cast<int>(i)); });
  }
}

PlaybackSession::~PlaybackSession() { stop(); }

void PlaybackSession::send(const MidiEvent& event) {
  auto bytes = event.bytes();
  std::lock_guard lock(device_mutex_);
  device_->send(bytes);
}

void PlaybackSession::run_stream(std::stop_token stop, int index) {
  struct Detach {
    Clock& clock;
    ~Detach() { clock.detach(); }
  } detach{*clock_};

  const auto stagger = Clock::Duration(std::llround(index * params_.stagger_s * 1e9));
  if (clock_->sleep_until(start_time_ + stagger, stop) && !stop.stop_requested()) {
    // The stream is paced against the moment it actually woke up.
    const Clock::Duration origin = clock_->now();
    if (options_.on_stream_start) options_.on_stream_start(index);
    const auto& schedule = schedules_[static_cast<std::size_t>(index)];
    for (std::size_t k = 0; k < schedule.size(); ++k) {
      if (options_.before_event) options_.before_event(index, k);
      if (!clock_->sleep_until(origin + schedule[k].at, stop) || stop.stop_requested()) break;
      send(schedule[k].event);
      if (schedule[k].starts_word) progress_[static_cast<std::size_t>(index)].fetch_add(1);
    }
  }
  finish_stream();
}

void PlaybackSession::finish_stream() {
  std::lock_guard lock(state_mutex_);
  if (--running_ == 0 && state_ == SessionState::Playing) {
    state_ = SessionState::Stopping;
    stopped_at_ = clock_->now();
    state_ = SessionState::Stopped;
    state_cv_.notify_all();
  }
}

SessionState PlaybackSession::stop() {
  std::lock_guard stop_lock(stop_mutex_);
  bool was_stopped;
  {
    std::lock_guard lock(state_mutex_);
    was_stopped = state_ == SessionState::Stopped;
    if (!was_stopped) state_ = SessionState::Stopping;
  }
  for (auto& t : threads_) t.request_stop();
  for (auto& t : threads_) {
    if (t.joinable() && t.get_id() != std::this_thread::get_id()) t.join();
  }
  if (!was_stopped) {
    for (std::size_t i = 0; i < scores_.size(); ++i) {
      int channel = stream_channel(static_cast<int>(i));
      send(MidiEvent::control_change(0, channel, kAllNotesOffController, 0));
      send(MidiEvent::control_change(0, channel, kVolumeController, kFadeStartVolume));
    }
    std::lock_guard lock(state_mutex_);
    stopped_at_ = clock_->now();
    state_ = SessionState::Stopped;
    state_cv_.notify_all();
  }
  return SessionState::Stopped;
}

SessionState PlaybackSession::state() const {
  std::lock_guard lock(state_mutex_);
  return state_;
}

void PlaybackSession::wait() const {
  std::unique_lock lock(state_mutex_);
  state_cv_.wait(lock, [this] { return state_ == SessionState::Stopped; });
}

PlaybackStatus PlaybackSession::status() const {
  PlaybackStatus s;
  Clock::Duration end;
  {
    std::lock_guard lock(state_mutex_);
    s.state = state_;
    end = state_ == SessionState::Stopped ? stopped_at_ : clock_->now();
  }
  s.elapsed_s = std::chrono::duration<double>(end - start_time_).count();
  s.length_ms = static_cast<std::size_t>(params_.length_ms);
  for (std::size_t i = 0; i < scores_.size(); ++i) s.words_played.push_back(progress_[i].load());
  return s;
}

std::shared_ptr<PlaybackSession> play_piece(std::string piece_id, std::vector<MScore> scores,
                                            const TimingConfig& timing, const GenParams& params,
                                            std::shared_ptr<MidiOutput> device, std::shared_ptr<Clock> clock,
                                            PlaybackOptions options) {
  params.validate();
  if (scores.size() > static_cast<std::size_t>(kMaxStreams)) {
    throw Error(Errc::TooManyStreams, "at most " + std::to_string(kMaxStreams) + " streams can play at once");
  }
  return std::make_shared<PlaybackSession>(std::move(piece_id), std::move(scores), timing, params,
                                           std::move(device), std::move(clock), std::move(options));
}

}  // namespace probmusic
