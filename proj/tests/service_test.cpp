#include <doctest.h>

#include <httplib.h>

#include <json.hpp>
#include <thread>

#include "fixtures.hpp"
#include "probmusic/notation.hpp"
#include "probmusic/service.hpp"
#include "smf_reader.hpp"
#include "temp_dir.hpp"

using namespace probmusic;
using fixtures::TempDir;
using nlohmann::json;

namespace {

const std::string kCalm = R"({{"Calm"},{"C"},{"q"},{"Oboe"},{"relaxing"}})";
const std::string kBusy = R"({{"Busy"},{"E","G"},{"i"},{"Flute"},{"fast"}})";

struct Harness {
  TempDir dir;
  std::shared_ptr<Clock> clock;
  std::shared_ptr<RecordingMidiOutput> device;
  std::unique_ptr<PlaylistService> service;
  bool device_ok = true;

  explicit Harness(std::shared_ptr<Clock> c = std::make_shared<VirtualClock>()) : clock(std::move(c)) {
    dir.write("relaxing.pm", fixtures::kFig1Text);
    dir.write("calm.pm", kCalm);
    dir.write("busy.pm", kBusy);
    device = std::make_shared<RecordingMidiOutput>(*clock);
    ServiceConfig config;
    config.directory = dir.path();
    service = std::make_unique<PlaylistService>(
        config,
        [this]() -> std::shared_ptr<MidiOutput> {
          if (!device_ok) throw Error(Errc::DeviceUnavailable, "unplugged");
          return device;
        },
        clock);
  }

  HttpResponse call(std::string method, std::string path, std::string body = "") {
    return service->handle({std::move(method), std::move(path), std::move(body)});
  }

  json call_json(std::string method, std::string path, std::string body = "", int expect = 200) {
    HttpResponse r = call(std::move(method), std::move(path), std::move(body));
    CHECK_MESSAGE(r.status == expect, r.body);
    return json::parse(r.body);
  }
};

}  // namespace

TEST_CASE("list and fetch pieces") {
  Harness h;
  json list = h.call_json("GET", "/api/pieces");
  REQUIRE(list.size() == 3);
  CHECK(list[0]["id"] == "busy");
  CHECK(list[2]["id"] == "relaxing");
  CHECK(list[2]["title"] == "Relaxing, Oct 24, 2013");
  json piece = h.call_json("GET", "/api/pieces/relaxing");
  CHECK(piece["spec_text"] == fixtures::kFig1Text);
  CHECK(piece["keywords"] == json::array());
  h.call_json("GET", "/api/pieces/nope", "", 404);
  h.call_json("GET", "/api/nothing", "", 404);
  h.call_json("DELETE", "/api/pieces/relaxing", "", 404);
}

TEST_CASE("put pieces") {
  Harness h;
  json ok = h.call_json("PUT", "/api/pieces/fresh", json{{"spec_text", kCalm}}.dump());
  CHECK(ok["id"] == "fresh");
  CHECK(h.call_json("GET", "/api/pieces/fresh")["spec_text"] == kCalm);
  CHECK(h.dir.read("fresh.pm") == kCalm);
  CHECK(h.call_json("GET", "/api/pieces").size() == 4);

  json bad = h.call_json("PUT", "/api/pieces/fresh",
                         json{{"spec_text", "{\n{\"t\"},\n{\"C\",\"H\"},{\"q\"},{\"Oboe\"}}"}}.dump(), 422);
  CHECK(bad["diagnostics"][0]["kind"] == "BadNoteToken");
  CHECK(bad["diagnostics"][0]["line"] == 3);
  CHECK(bad["diagnostics"][0]["column"] == 7);
  CHECK(h.dir.read("fresh.pm") == kCalm);

  json range = h.call_json("PUT", "/api/pieces/fresh", json{{"spec_text", R"({{"t"},{"A"},{"10w"},{"Oboe"}})"}}.dump(), 422);
  CHECK(range["diagnostics"][0]["kind"] == "OutOfMidiRange");

  h.call_json("PUT", "/api/pieces/fresh", "[]", 400);
  h.call_json("PUT", "/api/pieces/Bad%20Id", json{{"spec_text", kCalm}}.dump(), 400);
}

TEST_CASE("generate reports seed, scores and multiplicity") {
  Harness h;
  json r = h.call_json("POST", "/api/pieces/relaxing/generate", R"({"length_ms": 33, "streams_k": 3, "seed": 7})");
  CHECK(r["seed"] == 7);
  REQUIRE(r["scores"].size() == 3);
  CHECK(r["multiplicity"]["w"] == 100);
  CHECK(r["multiplicity"]["per_stream_digits"] == 67);
  CHECK(r["multiplicity"]["total_digits"] == 199);
  int words = 0;
  for (const auto& body : r["scores"]) {
    MScore s = parse_mscore({"", body.get<std::string>()}, fixtures::fig1());
    words += static_cast<int>(s.word_count());
  }
  CHECK(words == 99);
  CHECK(r["headers"][1].get<std::string>().rfind("Thread No1 has started on ", 0) == 0);

  json again = h.call_json("POST", "/api/pieces/relaxing/generate", R"({"length_ms": 33, "streams_k": 3, "seed": "7"})");
  CHECK(again["scores"] == r["scores"]);

  json defaults = h.call_json("POST", "/api/pieces/relaxing/generate");
  CHECK(defaults["multiplicity"]["per_stream"] == "10^240");
  CHECK(defaults["multiplicity"]["total"] == "10^720");
  CHECK(defaults["seed"].get<std::uint64_t>() < (1ull << 53));
  json replay = h.call_json("POST", "/api/pieces/relaxing/generate",
                            json{{"seed", defaults["seed"]}}.dump());
  CHECK(replay["scores"] == defaults["scores"]);

  h.call_json("POST", "/api/pieces/relaxing/generate", R"({"streams_k": 16})", 400);
  h.call_json("POST", "/api/pieces/relaxing/generate", R"({"length_ms": "long"})", 400);
  h.call_json("POST", "/api/pieces/relaxing/generate", R"({"seed": -1})", 400);
  h.call_json("POST", "/api/pieces/relaxing/generate", "not json", 400);
}

TEST_CASE("render returns a midi file") {
  Harness h;
  HttpResponse r = h.call("POST", "/api/pieces/relaxing/render", R"({"seed": 42})");
  CHECK(r.status == 200);
  CHECK(r.content_type == "audio/midi");
  CHECK(r.headers["X-Seed"] == "42");
  std::vector<std::uint8_t> bytes(r.body.begin(), r.body.end());
  smfcheck::File file = smfcheck::read(bytes);
  CHECK(file.tracks.size() == 3);
  CHECK(h.call("POST", "/api/pieces/relaxing/render", R"({"seed": 42})").body == r.body);
}

TEST_CASE("play, conflict, stop, status") {
  Harness h(std::make_shared<SteadyClock>());
  json started = h.call_json("POST", "/api/pieces/relaxing/play", R"({"seed": 3})");
  CHECK(started["seed"] == 3);
  CHECK(started["session_id"].is_string());
  h.call_json("POST", "/api/pieces/calm/play", "", 409);
  h.call_json("POST", "/api/playall", "", 409);
  json status = h.call_json("GET", "/api/status");
  CHECK(status["state"] == "playing");
  CHECK(status["piece_id"] == "relaxing");
  CHECK(status["progress"].size() == 3);
  json stopped = h.call_json("POST", "/api/stop");
  CHECK(stopped["state"] == "stopped");
  CHECK(h.device->sounding().empty());
  CHECK(h.call_json("GET", "/api/status")["state"] == "stopped");
  // free again
  h.call_json("POST", "/api/pieces/calm/play", R"({"length_ms": 2})");
  h.call_json("POST", "/api/stop");
}

TEST_CASE("natural completion under the virtual clock") {
  Harness h;
  h.call_json("POST", "/api/pieces/relaxing/play", R"({"length_ms": 10, "seed": 1})");
  h.service->session()->wait();
  json status = h.call_json("GET", "/api/status");
  CHECK(status["state"] == "stopped");
  CHECK(status["progress"] == json::array({10, 10, 10}));
}

TEST_CASE("device unavailable") {
  Harness h;
  h.device_ok = false;
  json r = h.call_json("POST", "/api/pieces/relaxing/play", "", 503);
  CHECK(r["error"]["kind"] == "DeviceUnavailable");
}

TEST_CASE("keywords, filters and play all") {
  Harness h;
  CHECK(h.call_json("GET", "/api/keywords") == json::array({"fast", "relaxing"}));
  json filters = h.call_json("POST", "/api/filters", R"({"excluded": ["Relaxing"]})");
  CHECK(filters["excluded"] == json::array({"Relaxing"}));
  json queued = h.call_json("POST", "/api/playall", R"({"length_ms": 3})");
  CHECK(queued["queue"] == json::array({"busy", "relaxing"}));
  // the virtual clock runs both pieces and the gap between them instantly
  for (int i = 0; i < 500 && h.call_json("GET", "/api/status")["state"] != "stopped"; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  json status = h.call_json("GET", "/api/status");
  CHECK(status["state"] == "stopped");
  CHECK(status["piece_id"] == "relaxing");

  CHECK_FALSE(h.device->entries().empty());

  h.call_json("POST", "/api/filters", R"({"excluded": ["fast", "relaxing"]})");
  CHECK(h.call_json("POST", "/api/playall")["queue"] == json::array({"relaxing"}));
  h.call_json("POST", "/api/stop");
}

TEST_CASE("stop while play all is running") {
  Harness h(std::make_shared<SteadyClock>());
  h.call_json("POST", "/api/playall");
  CHECK(h.call_json("GET", "/api/status")["state"] == "playing");
  h.call_json("POST", "/api/stop");
  CHECK(h.call_json("GET", "/api/status")["state"] == "stopped");
  CHECK(h.device->sounding().empty());
}

TEST_CASE("real socket round trip") {
  TempDir web;
  web.write("index.html", "<html>composer</html>");
  TempDir lib;
  lib.write("relaxing.pm", fixtures::kFig1Text);
  auto clock = std::make_shared<VirtualClock>();
  auto device = std::make_shared<NullMidiOutput>();
  ServiceConfig config;
  config.directory = lib.path();
  config.static_dir = web.path();
  PlaylistService service(config, [device] { return device; }, clock);
  int port = service.listen_in_background();
  REQUIRE(port > 0);

  httplib::Client client("127.0.0.1", port);
  auto list = client.Get("/api/pieces");
  REQUIRE(list);
  CHECK(list->status == 200);
  CHECK(json::parse(list->body)[0]["id"] == "relaxing");

  auto gen = client.Post("/api/pieces/relaxing/generate", R"({"seed": 9, "length_ms": 5})", "application/json");
  REQUIRE(gen);
  CHECK(json::parse(gen->body)["seed"] == 9);

  auto put = client.Put("/api/pieces/other", json{{"spec_text", kCalm}}.dump(), "application/json");
  REQUIRE(put);
  CHECK(put->status == 200);

  auto mid = client.Post("/api/pieces/relaxing/render", R"({"seed": 1})", "application/json");
  REQUIRE(mid);
  CHECK(mid->get_header_value("Content-Type") == "audio/midi");
  CHECK(mid->body.substr(0, 4) == "MThd");

  auto page = client.Get("/index.html");
  REQUIRE(page);
  CHECK(page->status == 200);
  CHECK(page->body == "<html>composer</html>");

  auto missing = client.Get("/api/pieces/zzz");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  service.shutdown();
}

TEST_CASE("missing library directory") {
  ServiceConfig config;
  config.directory = "/nonexistent/probmusic";
  CHECK_THROWS_AS(PlaylistService(config, [] { return std::make_shared<NullMidiOutput>(); }), Error);
}
