#include "probmusic/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "probmusic/combinatorics.hpp"
#include "probmusic/generator.hpp"
#include "probmusic/midi.hpp"
#include "probmusic/midi_output.hpp"
#include "probmusic/notation.hpp"
#include "probmusic/playback.hpp"
#include "probmusic/service.hpp"
#include "probmusic/spec.hpp"

namespace probmusic {

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_interrupt(int) { g_interrupted = true; }

struct DataError {
  std::string message;
};

CompositionSpec load_spec(const std::string& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) throw DataError{path + ": file not found"};
  std::ifstream in(path, std::ios::binary);
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_spec(text.str());
  } catch (const ParseError& e) {
    throw DataError{path + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) + ": " +
                    std::string(errc_name(e.code())) + ": " + e.detail()};
  }
}

// Semantic problems make rendering impossible; report them all at once.
void require_valid(const CompositionSpec& spec, const std::string& path) {
  auto violations = validate_spec(spec);
  if (violations.empty()) return;
  std::string message;
  for (const Violation& v : violations) {
    if (!message.empty()) message += "\n";
    message += path + ": " + std::string(errc_name(v.kind)) + ": " + v.message;
  }
  throw DataError{message};
}

struct Options {
  std::string file;
  int length = 120;
  int threads = 3;
  double stagger = 3.0;
  double change_prob = 0.4;
  std::uint64_t seed = 0;
  std::vector<CLI::Option*> seed_opts;
  int bpm = 120;
  int ppq = 480;
  int velocity = 64;
  std::string out;
  std::string device;
  std::string start;
  int port = kDefaultPort;
  std::string host = "127.0.0.1";
  std::string dir = ".";
  std::string static_dir;
};

void add_generation_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--length", o.length, "Words per stream")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--threads", o.threads, "Number of streams")->capture_default_str()->check(CLI::Range(1, 15));
  cmd->add_option("--stagger", o.stagger, "Seconds between stream starts")->capture_default_str()->check(CLI::NonNegativeNumber);
  cmd->add_option("--change-prob", o.change_prob, "Instrument-change probability after each word")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  o.seed_opts.push_back(cmd->add_option("--seed", o.seed, "Master seed (drawn at random when absent)"));
}

void add_timing_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--bpm", o.bpm, "Tempo in beats per minute")->capture_default_str()->check(CLI::Range(20, 300));
  cmd->add_option("--ppq", o.ppq, "Ticks per quarter note")->capture_default_str();
  cmd->add_option("--velocity", o.velocity, "Note-on velocity")->capture_default_str()->check(CLI::Range(0, 127));
}

GenParams gen_params(const Options& o, std::ostream& err) {
  GenParams p;
  p.length_ms = o.length;
  p.streams_k = o.threads;
  p.stagger_s = o.stagger;
  p.change_prob_p = o.change_prob;
  bool seeded = std::any_of(o.seed_opts.begin(), o.seed_opts.end(), [](CLI::Option* opt) { return opt->count() > 0; });
  if (seeded) {
    p.master_seed = o.seed;
  } else {
    p.master_seed = std::random_device{}() | (static_cast<std::uint64_t>(std::random_device{}()) << 32);
    err << "seed: " << p.master_seed << "\n";
  }
  p.validate();
  return p;
}

TimingConfig timing_config(const Options& o) {
  TimingConfig t{o.ppq, o.bpm, o.velocity};
  t.validate();
  return t;
}

CivilTime header_time(CivilTime start, int stream, double stagger_s) {
  return start + std::chrono::seconds(std::llround(stream * stagger_s));
}

int cmd_parse(const Options& o, std::ostream& out) {
  CompositionSpec spec = load_spec(o.file);
  require_valid(spec, o.file);
  out << serialize_spec(spec);
  return kExitOk;
}

int cmd_info(const Options& o, std::ostream& out) {
  CompositionSpec spec = load_spec(o.file);
  out << "title: " << spec.title << "\n";
  out << format_report(multiplicity_report(spec, static_cast<std::uint64_t>(o.length),
                                           static_cast<std::uint64_t>(o.threads)));
  return kExitOk;
}

int cmd_generate(const Options& o, std::ostream& out, std::ostream& err) {
  CompositionSpec spec = load_spec(o.file);
  require_valid(spec, o.file);
  GenParams params = gen_params(o, err);
  CivilTime start = o.start.empty() ? local_now() : parse_timestamp(o.start);
  auto scores = generate_piece(spec, params);
  for (const MScore& score : scores) {
    ScoreText text = format_mscore(score, header_time(start, score.stream_index, params.stagger_s));
    if (score.stream_index > 0) out << "\n";
    out << text.header << "\n" << text.body << "\n";
  }
  return kExitOk;
}

int cmd_render(const Options& o, std::ostream& err) {
  CompositionSpec spec = load_spec(o.file);
  require_valid(spec, o.file);
  GenParams params = gen_params(o, err);
  TimingConfig timing = timing_config(o);
  auto bytes = encode_smf(assemble_smf(generate_piece(spec, params), params, timing));
  std::ofstream file(o.out, std::ios::binary | std::ios::trunc);
  file.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw DataError{o.out + ": cannot write"};
  err << "wrote " << o.out << " (" << bytes.size() << " bytes)\n";
  return kExitOk;
}

int cmd_play(const Options& o, std::ostream& out, std::ostream& err) {
  CompositionSpec spec = load_spec(o.file);
  require_valid(spec, o.file);
  GenParams params = gen_params(o, err);
  TimingConfig timing = timing_config(o);
  auto scores = generate_piece(spec, params);
  std::shared_ptr<MidiOutput> device = open_midi_output(o.device);
  err << "device: " << device->name() << "\n";

  std::mutex out_mutex;
  PlaybackOptions options;
  options.on_stream_start = [&](int stream) {
    ScoreText text = format_mscore(scores[static_cast<std::size_t>(stream)], local_now());
    std::lock_guard lock(out_mutex);
    out << text.header << "\n" << text.body << "\n\n" << std::flush;
  };

  g_interrupted = false;
  auto previous = std::signal(SIGINT, on_interrupt);
  auto session = play_piece(spec.title, scores, timing, params, device, std::make_shared<SteadyClock>(), options);
  while (session->state() != SessionState::Stopped) {
    if (g_interrupted) {
      session->stop();
      err << "stopped\n";
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  session->stop();
  std::signal(SIGINT, previous);
  return kExitOk;
}

int cmd_serve(const Options& o, std::ostream& err) {
  ServiceConfig config;
  config.directory = o.dir;
  config.host = o.host;
  config.port = o.port;
  config.device = o.device;
  config.static_dir = o.static_dir;
  config.timing = timing_config(o);
  PlaylistService service(config);
  for (const LoadDiagnostic& d : service.library().diagnostics()) err << d.file.string() << ": " << d.message << "\n";
  err << "serving " << service.library().entries().size() << " piece(s) from " << o.dir << " on http://" << o.host
      << ":" << o.port << "\n";
  service.listen();
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generative multi-stream MIDI music from four-row composition specs", "probmusic"};
  app.require_subcommand(1, 1);
  Options o;

  auto* parse = app.add_subcommand("parse", "Validate a spec and print it normalized");
  parse->add_option("file", o.file, "Spec file (.pm)")->required();

  auto* info = app.add_subcommand("info", "Print distinct counts and the number of possible serializations");
  info->add_option("file", o.file, "Spec file (.pm)")->required();
  info->add_option("--length", o.length, "Words per stream")->capture_default_str()->check(CLI::PositiveNumber);
  info->add_option("--threads", o.threads, "Number of streams")->capture_default_str()->check(CLI::PositiveNumber);

  auto* generate = app.add_subcommand("generate", "Print the generated scores in console notation");
  generate->add_option("file", o.file, "Spec file (.pm)")->required();
  add_generation_flags(generate, o);
  generate->add_option("--start", o.start, "Header timestamp of stream 0 (yyyy/MM/dd HH:mm:ss)");

  auto* render = app.add_subcommand("render", "Write a type-1 Standard MIDI File");
  render->add_option("file", o.file, "Spec file (.pm)")->required();
  render->add_option("--out", o.out, "Output .mid path")->required();
  add_generation_flags(render, o);
  add_timing_flags(render, o);

  auto* play = app.add_subcommand("play", "Play live on a MIDI output port");
  play->add_option("file", o.file, "Spec file (.pm)")->required();
  add_generation_flags(play, o);
  add_timing_flags(play, o);
  play->add_option("--device", o.device, "Port: null, trace, an index or a device path");

  auto* serve = app.add_subcommand("serve", "Run the HTTP playlist service");
  serve->add_option("--dir", o.dir, "Library directory of .pm files")->capture_default_str();
  serve->add_option("--port", o.port, "TCP port")->capture_default_str()->check(CLI::Range(1, 65535));
  serve->add_option("--host", o.host, "Bind address")->capture_default_str();
  serve->add_option("--device", o.device, "Port: null, trace, an index or a device path");
  serve->add_option("--static", o.static_dir, "Directory of web assets served at /");
  add_timing_flags(serve, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (app.got_subcommand(parse)) return cmd_parse(o, out);
    if (app.got_subcommand(info)) return cmd_info(o, out);
    if (app.got_subcommand(generate)) return cmd_generate(o, out, err);
    if (app.got_subcommand(render)) return cmd_render(o, err);
    if (app.got_subcommand(play)) return cmd_play(o, out, err);
    if (app.got_subcommand(serve)) return cmd_serve(o, err);
  } catch (const DataError& e) {
    err << "error: " << e.message << "\n";
    return kExitData;
  } catch (const Error& e) {
    err << "error: " << errc_name(e.code()) << ": " << e.what() << "\n";
    return e.code() == Errc::InvalidParams ? kExitUsage : kExitData;
  }
  return kExitUsage;
}

}  // namespace probmusic
