#include "probmusic/notation.hpp"

#include <cctype>
#include <ctime>
#include <iomanip>
#include <regex>
#include <set>
#include <sstream>

namespace probmusic {

using namespace std::chrono;

CivilTime local_now() {
  auto now = time_point_cast<seconds>(system_clock::now());
  std::time_t t = system_clock::to_time_t(now);
  std::tm local{};
  localtime_r(&t, &local);
  return now + seconds(local.tm_gmtoff);
}

std::string format_timestamp(CivilTime t) {
  auto day = floor<days>(t);
  year_month_day ymd{day};
  hh_mm_ss hms{t - day};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d/%02u/%02u %02lld:%02lld:%02lld", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long long>(hms.hours().count()), static_cast<long long>(hms.minutes().count()),
                static_cast<long long>(hms.seconds().count()));
  return buf;
}

CivilTime parse_timestamp(std::string_view text) {
  static const std::regex pattern(R"((\d{4})/(\d{2})/(\d{2}) (\d{2}):(\d{2}):(\d{2}))");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_match(text.begin(), text.end(), m, pattern)) {
    throw Error(Errc::InvalidParams, "timestamp must look like yyyy/MM/dd HH:mm:ss");
  }
  auto num = [&](int i) { return std::stoi(m[i].str()); };
  year_month_day ymd{year{num(1)}, month{static_cast<unsigned>(num(2))}, day{static_cast<unsigned>(num(3))}};
  if (!ymd.ok() || num(4) > 23 || num(5) > 59 || num(6) > 59) {
    throw Error(Errc::InvalidParams, "timestamp out of range: " + std::string(text));
  }
  return sys_days{ymd} + hours{num(4)} + minutes{num(5)} + seconds{num(6)};
}

std::string format_header(int stream_index, CivilTime start) {
  return "Thread No" + std::to_string(stream_index) + " has started on " + format_timestamp(start);
}

std::vector<std::string> format_tokens(const ScoreEvent& event) {
  struct Visitor {
    std::vector<std::string> operator()(const TempoMark& t) const { return {"T[" + t.name + "]"}; }
    std::vector<std::string> operator()(const InstrumentChange& c) const {
      return {"I[" + c.instrument.value + "]"};
    }
    std::vector<std::string> operator()(const Word& w) const {
      std::vector<std::string> out;
      std::string suffix = w.od.to_string();
      for (Pitch p : w.notes.notes) out.push_back(pitch_letter(p) + suffix);
      return out;
    }
  };
  return std::visit(Visitor{}, event);
}

ScoreText format_mscore(const MScore& score, CivilTime start) {
  std::string body;
  for (const ScoreEvent& event : score.events) {
    for (const std::string& token : format_tokens(event)) {
      if (!body.empty()) body += ' ';
      body += token;
    }
  }
  return {format_header(score.stream_index, start), std::move(body)};
}

namespace {

struct NoteToken {
  Pitch pitch;
  OctaveDuration od;
};

std::vector<std::string> split_tokens(std::string_view body) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < body.size()) {
    if (std::isspace(static_cast<unsigned char>(body[i]))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (i + 1 < body.size() && (body[i] == 'T' || body[i] == 'I') && body[i + 1] == '[') {
      // bracketed names may contain spaces
      std::size_t close = body.find(']', i);
      if (close == std::string_view::npos) {
        throw Error(Errc::BadToken, "unterminated token '" + std::string(body.substr(i)) + "'");
      }
      i = close + 1;
    } else {
      while (i < body.size() && !std::isspace(static_cast<unsigned char>(body[i]))) ++i;
    }
    tokens.emplace_back(body.substr(start, i - start));
  }
  return tokens;
}

NoteToken parse_note_token(const std::string& token) {
  static const std::regex pattern(R"(([A-G])(10|[1-9])?([whqi]))");
  std::smatch m;
  if (!std::regex_match(token, m, pattern)) throw Error(Errc::BadToken, "bad token '" + token + "'");
  NoteToken out{*pitch_from_letter(m[1].str()[0]), {}};
  if (m[2].matched) out.od.octave = std::stoi(m[2].str());
  out.od.duration = *duration_from_letter(m[3].str()[0]);
  return out;
}

// Splits one run of note tokens into words drawn from the note bag.
void segment_run(const std::vector<NoteToken>& run, const std::vector<NoteElement>& elements,
                 std::vector<ScoreEvent>& out) {
  const std::size_t n = run.size();
  std::vector<int> ways(n + 1, 0);
  std::vector<std::size_t> back(n + 1, 0);
  ways[0] = 1;
  for (std::size_t j = 0; j < n; ++j) {
    if (ways[j] == 0) continue;
    for (const NoteElement& element : elements) {
      std::size_t len = element.notes.size();
      if (j + len > n) continue;
      bool fits = true;
      for (std::size_t k = 0; k < len && fits; ++k) {
        fits = run[j + k].pitch == element.notes[k] && run[j + k].od == run[j].od;
      }
      if (!fits) continue;
      ways[j + len] = std::min(2, ways[j + len] + ways[j]);
      back[j + len] = j;
    }
  }
  if (ways[n] == 0) throw Error(Errc::BadToken, "note tokens do not match any note-bag element");
  if (ways[n] > 1) throw Error(Errc::AmbiguousSequence, "note tokens can be grouped into words in more than one way");

  std::vector<ScoreEvent> words;
  for (std::size_t end = n; end > 0; end = back[end]) {
    std::size_t start = back[end];
    Word word{{}, run[start].od};
    for (std::size_t k = start; k < end; ++k) word.notes.notes.push_back(run[k].pitch);
    words.emplace_back(std::move(word));
  }
  out.insert(out.end(), words.rbegin(), words.rend());
}

}  // namespace

MScore parse_mscore(const ScoreText& text, const CompositionSpec& spec) {
  MScore score;
  if (!text.header.empty()) {
    static const std::regex header(R"(\s*Thread No(\d+) has started on .*)");
    std::smatch m;
    if (!std::regex_match(text.header, m, header)) {
      throw Error(Errc::BadToken, "bad score header '" + text.header + "'");
    }
    score.stream_index = std::stoi(m[1].str());
  }

  bool single_notes_only = true;
  for (const NoteElement& e : spec.notes) single_notes_only = single_notes_only && e.is_single();
  std::set<NoteElement> unique(spec.notes.begin(), spec.notes.end());
  std::vector<NoteElement> elements(unique.begin(), unique.end());

  std::vector<NoteToken> run;
  auto flush = [&] {
    if (run.empty()) return;
    if (single_notes_only) {
      for (const NoteToken& t : run) score.events.emplace_back(Word{NoteElement{{t.pitch}}, t.od});
    } else {
      segment_run(run, elements, score.events);
    }
    run.clear();
  };

  for (const std::string& token : split_tokens(text.body)) {
    bool bracketed = token.size() >= 3 && token[1] == '[' && token.back() == ']';
    if (bracketed && token[0] == 'T') {
      flush();
      std::string name = token.substr(2, token.size() - 3);
      if (name.empty()) throw Error(Errc::BadToken, "empty tempo name");
      score.events.emplace_back(TempoMark{name});
    } else if (bracketed && token[0] == 'I') {
      flush();
      try {
        score.events.emplace_back(InstrumentChange{parse_instrument_name(token.substr(2, token.size() - 3))});
      } catch (const ParseError&) {
        throw Error(Errc::BadToken, "bad instrument token '" + token + "'");
      }
    } else {
      run.push_back(parse_note_token(token));
    }
  }
  flush();
  return score;
}

}  // namespace probmusic
