#include "probmusic/service.hpp"

#include <httplib.h>

#include <json.hpp>
#include <sstream>

#include "probmusic/combinatorics.hpp"
#include "probmusic/generator.hpp"
#include "probmusic/notation.hpp"

namespace probmusic {

using nlohmann::json;

namespace {

HttpResponse json_response(int status, const json& body) {
  HttpResponse r;
  r.status = status;
  r.body = body.dump();
  return r;
}

HttpResponse error_response(int status, std::string_view kind, const std::string& message) {
  return json_response(status, {{"error", {{"kind", kind}, {"message", message}}}});
}

int status_for(Errc code) {
  switch (code) {
    case Errc::NotFound: return 404;
    case Errc::Conflict: return 409;
    case Errc::DeviceUnavailable: return 503;
    case Errc::Io: return 500;
    default: return 400;
  }
}

HttpResponse error_response(const Error& e) { return error_response(status_for(e.code()), errc_name(e.code()), e.what()); }

json parse_body(const std::string& body) {
  if (body.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw Error(Errc::InvalidParams, "request body must be a JSON object");
  return doc;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(path.substr(0, path.find('?')));
  while (std::getline(in, part, '/')) {
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

template <typename T>
T field_or(const json& body, const char* name, T fallback) {
  if (!body.contains(name) || body.at(name).is_null()) return fallback;
  try {
    return body.at(name).get<T>();
  } catch (const json::exception&) {
    throw Error(Errc::InvalidParams, std::string("field '") + name + "' has the wrong type");
  }
}

std::optional<std::uint64_t> seed_field(const json& body) {
  if (!body.contains("seed") || body.at("seed").is_null()) return std::nullopt;
  const json& seed = body.at("seed");
  if (seed.is_number_unsigned()) return seed.get<std::uint64_t>();
  if (seed.is_number_integer() && seed.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(seed.get<std::int64_t>());
  if (seed.is_string()) {
    const std::string& s = seed.get_ref<const std::string&>();
    if (!s.empty() && s.size() <= 20 && s.find_first_not_of("0123456789") == std::string::npos) {
      try {
        return std::stoull(s);
      } catch (const std::out_of_range&) {
      }
    }
  }
  throw Error(Errc::InvalidParams, "seed must be a non-negative 64-bit integer");
}

json entry_summary(const PlaylistEntry& e) {
  return {{"id", e.id}, {"title", e.title}, {"keywords", e.keywords}};
}

}  // namespace

PlaylistService::PlaylistService(ServiceConfig config, DeviceFactory devices, std::shared_ptr<Clock> clock)
    : config_(std::move(config)),
      devices_(std::move(devices)),
      clock_(clock ? std::move(clock) : std::make_shared<SteadyClock>()),
      library_(config_.directory),
      seed_source_(std::random_device{}()) {
  config_.timing.validate();
  if (!devices_) {
    devices_ = [selector = config_.device] { return std::shared_ptr<MidiOutput>(open_midi_output(selector)); };
  }
}

PlaylistService::~PlaylistService() {
  shutdown();
  stop();
}

PlayerConfig PlaylistService::player_config() const {
  std::lock_guard lock(mutex_);
  return player_;
}

std::shared_ptr<PlaybackSession> PlaylistService::session() const {
  std::lock_guard lock(mutex_);
  return session_;
}

std::uint64_t PlaylistService::draw_seed() {
  std::lock_guard lock(mutex_);
  // 53 bits so the value survives a round trip through JavaScript numbers.
  return seed_source_() >> 11;
}

bool PlaylistService::busy_locked() const {
  return queue_running_ || (session_ && session_->state() != SessionState::Stopped);
}

HttpResponse PlaylistService::handle(const HttpRequest& request) {
  try {
    auto parts = split_path(request.path);
    const std::string& m = request.method;
    if (parts.empty() || parts[0] != "api") return error_response(404, "NotFound", "no such endpoint");
    if (parts.size() == 2) {
      const std::string& what = parts[1];
      if (what == "pieces" && m == "GET") return list_pieces();
      if (what == "stop" && m == "POST") return stop();
      if (what == "status" && m == "GET") return status();
      if (what == "keywords" && m == "GET") return keywords();
      if (what == "filters" && m == "POST") return set_filters(request.body);
      if (what == "playall" && m == "POST") return play_all(request.body);
    } else if (parts.size() == 3 && parts[1] == "pieces") {
      if (m == "GET") return get_piece(parts[2]);
      if (m == "PUT") return put_piece(parts[2], request.body);
    } else if (parts.size() == 4 && parts[1] == "pieces" && m == "POST") {
      if (parts[3] == "generate") return generate(parts[2], request.body);
      if (parts[3] == "play") return play(parts[2], request.body);
      if (parts[3] == "render") return render(parts[2], request.body);
    }
    return error_response(404, "NotFound", "no such endpoint: " + m + " " + request.path);
  } catch (const Error& e) {
    return error_response(e);
  } catch (const std::exception& e) {
    return error_response(500, "Internal", e.what());
  }
}

HttpResponse PlaylistService::list_pieces() {
  json out = json::array();
  for (const PlaylistEntry& e : library_.entries()) out.push_back(entry_summary(e));
  return json_response(200, out);
}

HttpResponse PlaylistService::get_piece(const std::string& id) {
  auto entry = library_.find(id);
  if (!entry) return error_response(404, "NotFound", "no piece '" + id + "'");
  json out = entry_summary(*entry);
  out["spec_text"] = library_.read_text(id);
  return json_response(200, out);
}

HttpResponse PlaylistService::put_piece(const std::string& id, const std::string& body) {
  json doc = parse_body(body);
  if (!doc.contains("spec_text") || !doc.at("spec_text").is_string()) {
    return error_response(400, "InvalidParams", "body must carry a string field 'spec_text'");
  }
  const std::string& text = doc.at("spec_text").get_ref<const std::string&>();
  try {
    CompositionSpec spec = parse_spec(text);
    auto violations = validate_spec(spec);
    if (!violations.empty()) {
      json diags = json::array();
      for (const Violation& v : violations) diags.push_back({{"kind", errc_name(v.kind)}, {"message", v.message}});
      return json_response(422, {{"error", {{"kind", "Invalid"}, {"message", violations.front().message}}},
                                 {"diagnostics", diags}});
    }
    PlaylistEntry entry = library_.upsert(id, text);
    return json_response(200, entry_summary(entry));
  } catch (const ParseError& e) {
    json diag = {{"kind", errc_name(e.code())}, {"message", e.detail()}, {"line", e.line()}, {"column", e.column()}};
    return json_response(422, {{"error", diag}, {"diagnostics", json::array({diag})}});
  }
}

namespace {

GenParams params_from(const json& doc, const PlayerConfig& defaults, std::optional<std::uint64_t> seed) {
  GenParams params;
  params.length_ms = field_or(doc, "length_ms", defaults.length_ms);
  params.streams_k = field_or(doc, "streams_k", defaults.streams_k);
  params.stagger_s = field_or(doc, "stagger_s", defaults.stagger_s);
  params.master_seed = seed.value_or(0);
  params.validate();
  return params;
}

}  // namespace

HttpResponse PlaylistService::generate(const std::string& id, const std::string& body) {
  json doc = parse_body(body);
  auto entry = library_.find(id);
  if (!entry) return error_response(404, "NotFound", "no piece '" + id + "'");
  GenParams params = params_from(doc, player_config(), seed_field(doc).value_or(draw_seed()));

  auto scores = generate_piece(entry->spec, params);
  CivilTime start = local_now();
  json texts = json::array(), headers = json::array();
  for (const MScore& s : scores) {
    auto offset = std::chrono::seconds(std::llround(s.stream_index * params.stagger_s));
    ScoreText text = format_mscore(s, start + offset);
    headers.push_back(text.header);
    texts.push_back(text.body);
  }
  MultiplicityReport report = multiplicity_report(entry->spec, static_cast<std::uint64_t>(params.length_ms),
                                                  static_cast<std::uint64_t>(params.streams_k));
  json multiplicity = {{"w", report.words},
                       {"per_stream_digits", report.per_stream_digits},
                       {"total_digits", report.total_digits},
                       {"per_stream", describe(report.per_stream)},
                       {"total", describe(report.total)}};
  return json_response(200, {{"seed", params.master_seed},
                             {"scores", texts},
                             {"headers", headers},
                             {"multiplicity", multiplicity}});
}

HttpResponse PlaylistService::render(const std::string& id, const std::string& body) {
  json doc = parse_body(body);
  auto entry = library_.find(id);
  if (!entry) return error_response(404, "NotFound", "no piece '" + id + "'");
  GenParams params = params_from(doc, player_config(), seed_field(doc).value_or(draw_seed()));

  auto scores = generate_piece(entry->spec, params);
  auto bytes = encode_smf(assemble_smf(scores, params, config_.timing));
  HttpResponse r;
  r.content_type = "audio/midi";
  r.body.assign(bytes.begin(), bytes.end());
  r.headers["X-Seed"] = std::to_string(params.master_seed);
  r.headers["Content-Disposition"] = "attachment; filename=\"" + id + ".mid\"";
  return r;
}

HttpResponse PlaylistService::play(const std::string& id, const std::string& body) {
  json doc = parse_body(body);
  auto entry = library_.find(id);
  if (!entry) return error_response(404, "NotFound", "no piece '" + id + "'");
  GenParams params = params_from(doc, player_config(), seed_field(doc).value_or(draw_seed()));
  auto scores = generate_piece(entry->spec, params);

  std::lock_guard lock(mutex_);
  if (busy_locked()) return error_response(409, "Conflict", "already playing; stop first");
  std::shared_ptr<MidiOutput> device = devices_();
  session_ = play_piece(id, std::move(scores), config_.timing, params, std::move(device), clock_);
  session_id_ = "s" + std::to_string(++session_counter_);
  return json_response(200, {{"session_id", session_id_}, {"seed", params.master_seed}});
}

HttpResponse PlaylistService::stop() {
  std::shared_ptr<PlaybackSession> current;
  std::jthread queue;
  {
    std::lock_guard lock(mutex_);
    current = session_;
    // requested under the lock so the queue cannot start another piece
    if (queue_thread_.joinable()) queue_thread_.request_stop();
    queue = std::move(queue_thread_);
  }
  if (current) current->stop();
  if (queue.joinable()) queue.join();
  return json_response(200, {{"state", session_state_name(SessionState::Stopped)}});
}

HttpResponse PlaylistService::status() {
  std::shared_ptr<PlaybackSession> current;
  bool queue_running;
  std::string session_id;
  {
    std::lock_guard lock(mutex_);
    current = session_;
    queue_running = queue_running_;
    session_id = session_id_;
  }
  json out;
  if (!current) {
    out = {{"state", queue_running ? "playing" : "stopped"}, {"elapsed_s", 0.0}, {"progress", json::array()}};
    return json_response(200, out);
  }
  PlaybackStatus s = current->status();
  SessionState state = queue_running ? SessionState::Playing : s.state;
  out = {{"state", session_state_name(state)},
         {"piece_id", current->piece_id()},
         {"session_id", session_id},
         {"elapsed_s", s.elapsed_s},
         {"progress", s.words_played},
         {"length_ms", s.length_ms}};
  return json_response(200, out);
}

HttpResponse PlaylistService::keywords() { return json_response(200, library_.keywords()); }

HttpResponse PlaylistService::set_filters(const std::string& body) {
  json doc = parse_body(body);
  auto excluded = field_or(doc, "excluded", std::set<std::string>{});
  std::lock_guard lock(mutex_);
  player_.excluded_keywords = excluded;
  return json_response(200, {{"excluded", excluded}});
}

HttpResponse PlaylistService::play_all(const std::string& body) {
  json doc = parse_body(body);
  PlayerConfig config = player_config();
  GenParams params = params_from(doc, config, std::nullopt);

  auto entries = library_.entries();
  std::vector<PlaylistEntry> queue = play_all_queue(entries, config);
  json ids = json::array();
  for (const PlaylistEntry& e : queue) ids.push_back(e.id);

  std::lock_guard lock(mutex_);
  if (busy_locked()) return error_response(409, "Conflict", "already playing; stop first");
  if (queue_thread_.joinable()) queue_thread_.join();
  if (!queue.empty()) {
    queue_running_ = true;
    queue_thread_ = std::jthread([this, queue = std::move(queue), params](std::stop_token stop) {
      run_queue(stop, queue, params);
    });
  }
  return json_response(200, {{"queue", ids}});
}

void PlaylistService::run_queue(std::stop_token stop, std::vector<PlaylistEntry> queue, GenParams params) {
  for (std::size_t i = 0; i < queue.size() && !stop.stop_requested(); ++i) {
    if (i > 0) {
      ClockParticipant participant(*clock_);
      if (!clock_->sleep_until(clock_->now() + std::chrono::milliseconds(std::llround(kPlayAllGapSeconds * 1000)),
                               stop)) {
        break;
      }
    }
    std::shared_ptr<PlaybackSession> current;
    try {
      params.master_seed = draw_seed();
      auto scores = generate_piece(queue[i].spec, params);
      std::lock_guard lock(mutex_);
      if (stop.stop_requested()) break;
      current = play_piece(queue[i].id, std::move(scores), config_.timing, params, devices_(), clock_);
      session_ = current;
      session_id_ = "s" + std::to_string(++session_counter_);
    } catch (const Error&) {
      continue;  // unplayable piece, move on
    }
    current->wait();
  }
  queue_running_ = false;
}

void PlaylistService::install_routes(httplib::Server& server) {
  auto bridge = [this](const httplib::Request& req, httplib::Response& res) {
    HttpResponse r = handle({req.method, req.path, req.body});
    res.status = r.status;
    for (const auto& [k, v] : r.headers) res.set_header(k, v);
    res.set_content(r.body, r.content_type);
  };
  server.Get(R"(/api/.*)", bridge);
  server.Put(R"(/api/.*)", bridge);
  server.Post(R"(/api/.*)", bridge);
  if (!config_.static_dir.empty()) server.set_mount_point("/", config_.static_dir.string());
}

void PlaylistService::listen() {
  server_ = std::make_unique<httplib::Server>();
  install_routes(*server_);
  if (!server_->listen(config_.host, config_.port)) {
    throw Error(Errc::Io, "cannot listen on " + config_.host + ":" + std::to_string(config_.port));
  }
}

int PlaylistService::listen_in_background() {
  server_ = std::make_unique<httplib::Server>();
  install_routes(*server_);
  int port = server_->bind_to_any_port(config_.host);
  if (port < 0) throw Error(Errc::Io, "cannot bind " + config_.host);
  server_thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void PlaylistService::shutdown() {
  if (server_) server_->stop();
  if (server_thread_.joinable()) server_thread_.join();
}

}  // namespace probmusic
