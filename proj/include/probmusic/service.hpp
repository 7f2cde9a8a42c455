#pragma once

// HTTP front end for the library: browse and edit pieces, generate and
// render them, and drive the single live playback session.
//
//   GET  /api/pieces                  [{id, title, keywords}]
//   GET  /api/pieces/{id}             {id, title, keywords, spec_text}
//   PUT  /api/pieces/{id}             {spec_text} -> 200 | 422 diagnostics
//   POST /api/pieces/{id}/generate    {length_ms?, streams_k?, seed?}
//   POST /api/pieces/{id}/play        {length_ms?, streams_k?, stagger_s?, seed?} -> 409 while busy
//   POST /api/pieces/{id}/render      as generate -> audio/midi
//   POST /api/stop                    {state}
//   GET  /api/status                  {state, piece_id?, elapsed_s, progress}
//   GET  /api/keywords                [string]
//   POST /api/filters                 {excluded: [string]}
//   POST /api/playall                 {queue: [id]}

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <thread>

#include "probmusic/midi.hpp"
#include "probmusic/midi_output.hpp"
#include "probmusic/playback.hpp"
#include "probmusic/playlist.hpp"

namespace httplib {
class Server;
}

namespace probmusic {

inline constexpr int kDefaultPort = 8642;
inline constexpr double kPlayAllGapSeconds = 1.0;

struct ServiceConfig {
  std::filesystem::path directory = ".";
  std::string host = "127.0.0.1";
  int port = kDefaultPort;
  std::string device;
  std::filesystem::path static_dir;
  TimingConfig timing;
};

struct HttpRequest {
  std::string method;
  std::string path;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::map<std::string, std::string> headers;
};

using DeviceFactory = std::function<std::shared_ptr<MidiOutput>()>;

class PlaylistService {
 public:
  explicit PlaylistService(ServiceConfig config, DeviceFactory devices = {},
                           std::shared_ptr<Clock> clock = nullptr);
  ~PlaylistService();

  PlaylistService(const PlaylistService&) = delete;
  PlaylistService& operator=(const PlaylistService&) = delete;

  // Routing core, independent of the socket layer.
  HttpResponse handle(const HttpRequest& request);

  // Blocks serving HTTP on config.host:config.port until shutdown().
  void listen();
  // Binds an ephemeral port, serves on a background thread, returns the port.
  int listen_in_background();
  void shutdown();

  Library& library() noexcept { return library_; }
  PlayerConfig player_config() const;
  // Session currently or most recently playing.
  std::shared_ptr<PlaybackSession> session() const;

 private:
  HttpResponse list_pieces();
  HttpResponse get_piece(const std::string& id);
  HttpResponse put_piece(const std::string& id, const std::string& body);
  HttpResponse generate(const std::string& id, const std::string& body);
  HttpResponse render(const std::string& id, const std::string& body);
  HttpResponse play(const std::string& id, const std::string& body);
  HttpResponse stop();
  HttpResponse status();
  HttpResponse keywords();
  HttpResponse set_filters(const std::string& body);
  HttpResponse play_all(const std::string& body);

  bool busy_locked() const;
  std::uint64_t draw_seed();
  void run_queue(std::stop_token stop, std::vector<PlaylistEntry> queue, GenParams params);
  void install_routes(httplib::Server& server);

  ServiceConfig config_;
  DeviceFactory devices_;
  std::shared_ptr<Clock> clock_;
  Library library_;

  mutable std::mutex mutex_;
  PlayerConfig player_;
  std::shared_ptr<PlaybackSession> session_;
  std::uint64_t session_counter_ = 0;
  std::string session_id_;
  std::jthread queue_thread_;
  std::atomic<bool> queue_running_{false};
  std::mt19937_64 seed_source_;

  std::unique_ptr<httplib::Server> server_;
  std::thread server_thread_;
};

}  // namespace probmusic
