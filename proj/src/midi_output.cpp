#include "probmusic/midi_output.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <iostream>

#include "probmusic/error.hpp"

namespace probmusic {

Clock::Duration SteadyClock::now() const {
  return std::chrono::duration_cast<Duration>(std::chrono::steady_clock::now() - origin_);
}

bool SteadyClock::sleep_until(Duration deadline, std::stop_token stop) {
  // registered before taking the lock: it runs inline if stop is already set
  std::stop_callback wake_on_stop(stop, [this] {
    std::lock_guard guard(mutex_);
    cv_.notify_all();
  });
  std::unique_lock lock(mutex_);
  cv_.wait_until(lock, origin_ + deadline, [&] { return stop.stop_requested(); });
  return !stop.stop_requested();
}

Clock::Duration VirtualClock::now() const {
  std::lock_guard lock(mutex_);
  return now_;
}

bool VirtualClock::sleep_until(Duration deadline, std::stop_token stop) {
  std::stop_callback wake_on_stop(stop, [this] {
    std::lock_guard guard(mutex_);
    cv_.notify_all();
  });
  std::unique_lock lock(mutex_);
  if (stop.stop_requested()) return false;
  if (deadline <= now_) return true;
  std::uint64_t ticket = next_ticket_++;
  waiting_.emplace(ticket, deadline);
  advance_locked();
  cv_.wait(lock, [&] { return stop.stop_requested() || !waiting_.contains(ticket); });
  if (waiting_.erase(ticket) > 0) return false;
  return true;
}

void VirtualClock::attach() {
  std::lock_guard lock(mutex_);
  ++participants_;
}

void VirtualClock::detach() {
  std::lock_guard lock(mutex_);
  --participants_;
  advance_locked();
}

void VirtualClock::advance_to(Duration t) {
  std::lock_guard lock(mutex_);
  now_ = std::max(now_, t);
  std::erase_if(waiting_, [&](const auto& w) { return w.second <= now_; });
  cv_.notify_all();
}

void VirtualClock::advance_locked() {
  if (participants_ <= 0 || waiting_.empty()) return;
  if (static_cast<int>(waiting_.size()) < participants_) return;
  Duration next = std::min_element(waiting_.begin(), waiting_.end(), [](const auto& a, const auto& b) {
                    return a.second < b.second;
                  })->second;
  now_ = std::max(now_, next);
  std::erase_if(waiting_, [&](const auto& w) { return w.second <= now_; });
  cv_.notify_all();
}

void TraceMidiOutput::send(std::span<const std::uint8_t> message) {
  std::lock_guard lock(mutex_);
  char buf[4];
  for (std::size_t i = 0; i < message.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%02X", message[i]);
    *out_ << (i ? " " : "") << buf;
  }
  *out_ << '\n';
}

RawMidiOutput::RawMidiOutput(std::string path) : path_(std::move(path)) {
  fd_ = ::open(path_.c_str(), O_WRONLY | O_CLOEXEC);
  if (fd_ < 0) {
    throw Error(Errc::DeviceUnavailable, "cannot open MIDI device '" + path_ + "': " + std::strerror(errno));
  }
}

RawMidiOutput::~RawMidiOutput() {
  if (fd_ >= 0) ::close(fd_);
}

void RawMidiOutput::send(std::span<const std::uint8_t> message) {
  std::size_t done = 0;
  while (done < message.size()) {
    ssize_t n = ::write(fd_, message.data() + done, message.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::DeviceUnavailable, "write to '" + path_ + "' failed: " + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
}

void RecordingMidiOutput::send(std::span<const std::uint8_t> message) {
  {
    std::lock_guard lock(mutex_);
    if (in_flight_++ > 0) ++overlaps_;
  }
  Clock::Duration t = clock_->now();
  std::lock_guard lock(mutex_);
  --in_flight_;
  entries_.push_back({t, {message.begin(), message.end()}});
  if (message.empty()) return;
  int status = message[0] & 0xF0;
  int channel = message[0] & 0x0F;
  if (status == 0x90 && message.size() >= 3 && message[2] > 0) {
    sounding_.emplace(channel, message[1]);
  } else if ((status == 0x80 || status == 0x90) && message.size() >= 2) {
    sounding_.erase({channel, message[1]});
  } else if (status == 0xB0 && message.size() >= 2 && message[1] == 123) {
    std::erase_if(sounding_, [channel](const auto& s) { return s.first == channel; });
  }
}

std::vector<RecordingMidiOutput::Entry> RecordingMidiOutput::entries() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

std::set<std::pair<int, int>> RecordingMidiOutput::sounding() const {
  std::lock_guard lock(mutex_);
  return sounding_;
}

int RecordingMidiOutput::overlapping_sends() const {
  std::lock_guard lock(mutex_);
  return overlaps_;
}

std::vector<std::string> list_midi_devices() {
  namespace fs = std::filesystem;
  std::vector<std::string> found;
  std::error_code ec;
  auto scan = [&](const fs::path& dir, std::string_view prefix) {
    if (!fs::is_directory(dir, ec)) return;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
      std::string name = entry.path().filename().string();
      if (name.starts_with(prefix)) found.push_back(entry.path().string());
    }
  };
  scan("/dev/snd", "midiC");
  scan("/dev", "midi");
  std::sort(found.begin(), found.end());
  return found;
}

std::unique_ptr<MidiOutput> open_midi_output(std::string_view selector) {
  if (selector == "null") return std::make_unique<NullMidiOutput>();
  if (selector == "trace") return std::make_unique<TraceMidiOutput>(std::cerr);
  auto devices = list_midi_devices();
  if (selector.empty()) {
    if (devices.empty()) {
      throw Error(Errc::DeviceUnavailable, "no MIDI output port found (use --device null or trace)");
    }
    return std::make_unique<RawMidiOutput>(devices.front());
  }
  std::size_t index = 0;
  auto [end, ec] = std::from_chars(selector.data(), selector.data() + selector.size(), index);
  if (ec == std::errc{} && end == selector.data() + selector.size()) {
    if (index >= devices.size()) {
      throw Error(Errc::DeviceUnavailable, "MIDI device index " + std::string(selector) + " out of range (" +
                                               std::to_string(devices.size()) + " found)");
    }
    return std::make_unique<RawMidiOutput>(devices[index]);
  }
  return std::make_unique<RawMidiOutput>(std::string(selector));
}

}  // namespace probmusic
