#include "probmusic/spec.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "probmusic/instruments.hpp"
#include "probmusic/midi.hpp"

namespace probmusic {

char pitch_letter(Pitch pitch) noexcept { return "CDEFGAB"[static_cast<int>(pitch)]; }

std::optional<Pitch> pitch_from_letter(char letter) noexcept {
  switch (letter) {
    case 'C': return Pitch::C;
    case 'D': return Pitch::D;
    case 'E': return Pitch::E;
    case 'F': return Pitch::F;
    case 'G': return Pitch::G;
    case 'A': return Pitch::A;
    case 'B': return Pitch::B;
    default: return std::nullopt;
  }
}

int pitch_offset(Pitch pitch) noexcept {
  static constexpr int kOffsets[] = {0, 2, 4, 5, 7, 9, 11};
  return kOffsets[static_cast<int>(pitch)];
}

std::string NoteElement::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < notes.size(); ++i) {
    if (i) out += ' ';
    out += pitch_letter(notes[i]);
  }
  return out;
}

char duration_letter(Duration duration) noexcept { return "whqi"[static_cast<int>(duration)]; }

std::optional<Duration> duration_from_letter(char letter) noexcept {
  switch (letter) {
    case 'w': return Duration::Whole;
    case 'h': return Duration::Half;
    case 'q': return Duration::Quarter;
    case 'i': return Duration::Eighth;
    default: return std::nullopt;
  }
}

std::string OctaveDuration::to_string() const {
  std::string out = octave ? std::to_string(*octave) : std::string{};
  out += duration_letter(duration);
  return out;
}

std::string InstrumentName::key() const { return instrument_key(value); }

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

struct Token {
  enum class Kind { LBrace, RBrace, Comma, String, End } kind;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_blank();
    Token tok{Token::Kind::End, {}, line_, column_};
    if (pos_ >= src_.size()) return tok;
    char c = src_[pos_];
    switch (c) {
      case '{': advance(); tok.kind = Token::Kind::LBrace; return tok;
      case '}': advance(); tok.kind = Token::Kind::RBrace; return tok;
      case ',': advance(); tok.kind = Token::Kind::Comma; return tok;
      case '"': {
        advance();
        std::string text;
        while (pos_ < src_.size() && src_[pos_] != '"') {
          text += src_[pos_];
          advance();
        }
        if (pos_ >= src_.size()) {
          throw ParseError(Errc::Syntax, "unterminated string", tok.line, tok.column);
        }
        advance();
        tok.kind = Token::Kind::String;
        tok.text = std::move(text);
        return tok;
      }
      default:
        throw ParseError(Errc::Syntax, std::string("unexpected character '") + c + "'", line_, column_);
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_blank() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

struct RawRow {
  std::vector<Token> strings;
  std::size_t line;
  std::size_t column;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) { tok_ = lexer_.next(); }

  std::vector<RawRow> parse() {
    if (tok_.kind == Token::Kind::End) throw error(Errc::MissingRow, "empty specification");
    if (tok_.kind == Token::Kind::RBrace) throw error(Errc::UnbalancedBraces, "unexpected '}'");
    expect(Token::Kind::LBrace, "expected '{' to open the specification");
    std::vector<RawRow> rows;
    while (true) {
      if (tok_.kind == Token::Kind::RBrace) break;
      if (tok_.kind == Token::Kind::End) throw error(Errc::UnbalancedBraces, "missing '}'");
      if (tok_.kind != Token::Kind::LBrace) throw error(Errc::Syntax, "expected '{' to open a row");
      rows.push_back(parse_row());
      if (tok_.kind == Token::Kind::Comma) {
        shift();
        continue;
      }
      if (tok_.kind == Token::Kind::RBrace) break;
      if (tok_.kind == Token::Kind::End) throw error(Errc::UnbalancedBraces, "missing '}'");
      throw error(Errc::Syntax, "expected ',' or '}' after a row");
    }
    Token close = tok_;
    shift();
    if (tok_.kind == Token::Kind::RBrace) throw error(Errc::UnbalancedBraces, "unexpected '}'");
    if (tok_.kind != Token::Kind::End) throw error(Errc::Syntax, "unexpected text after the specification");
    if (rows.size() < 4) {
      throw ParseError(Errc::MissingRow,
                       "expected at least 4 rows, found " + std::to_string(rows.size()), close.line,
                       close.column);
    }
    if (rows.size() > 5) {
      throw ParseError(Errc::Syntax, "expected at most 5 rows, found " + std::to_string(rows.size()),
                       rows[5].line, rows[5].column);
    }
    return rows;
  }

 private:
  RawRow parse_row() {
    RawRow row{{}, tok_.line, tok_.column};
    shift();
    while (true) {
      if (tok_.kind == Token::Kind::RBrace) break;
      if (tok_.kind == Token::Kind::End) throw error(Errc::UnbalancedBraces, "missing '}' closing a row");
      if (tok_.kind != Token::Kind::String) throw error(Errc::Syntax, "expected a quoted string");
      row.strings.push_back(tok_);
      shift();
      if (tok_.kind == Token::Kind::Comma) {
        shift();
      } else if (tok_.kind == Token::Kind::End) {
        throw error(Errc::UnbalancedBraces, "missing '}' closing a row");
      } else if (tok_.kind != Token::Kind::RBrace) {
        throw error(Errc::Syntax, "expected ',' or '}' after a string");
      }
    }
    shift();
    return row;
  }

  void expect(Token::Kind kind, const char* message) {
    if (tok_.kind != kind) throw error(Errc::Syntax, message);
    shift();
  }

  void shift() { tok_ = lexer_.next(); }

  ParseError error(Errc code, const std::string& message) const {
    return ParseError(code, message, tok_.line, tok_.column);
  }

  Lexer lexer_;
  Token tok_;
};

template <typename F>
auto at(const Token& tok, F&& parse_one) {
  try {
    return parse_one(tok.text);
  } catch (const ParseError& e) {
    // field parsers report column offsets within the string
    throw ParseError(e.code(), e.detail(), tok.line, tok.column + e.column());
  }
}

void require_non_empty(const RawRow& row, const char* what) {
  if (row.strings.empty()) {
    throw ParseError(Errc::EmptyBag, std::string(what) + " bag is empty", row.line, row.column);
  }
}

}  // namespace

NoteElement parse_note_element(std::string_view text) {
  NoteElement element;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::string_view word = text.substr(start, i - start);
    auto pitch = word.size() == 1 ? pitch_from_letter(word[0]) : std::nullopt;
    if (!pitch) {
      throw ParseError(Errc::BadNoteToken, "bad note '" + std::string(word) + "' (expected one of A-G)",
                       1, start + 1);
    }
    element.notes.push_back(*pitch);
  }
  if (element.notes.empty()) throw ParseError(Errc::BadNoteToken, "empty note element", 1, 1);
  return element;
}

OctaveDuration parse_octave_duration(std::string_view raw) {
  std::string_view text = trim(raw);
  auto fail = [&](const std::string& why) {
    return ParseError(Errc::BadOctaveDuration, "bad octave-duration '" + std::string(raw) + "': " + why,
                      1, 1);
  };
  if (text.empty()) throw fail("empty token");
  auto duration = duration_from_letter(text.back());
  if (!duration) throw fail("duration must be one of w, h, q, i");
  std::string_view digits = text.substr(0, text.size() - 1);
  OctaveDuration od{std::nullopt, *duration};
  if (!digits.empty()) {
    if (digits.size() > 2 || !std::all_of(digits.begin(), digits.end(),
                                          [](char c) { return c >= '0' && c <= '9'; })) {
      throw fail("octave must be a number from 1 to 10");
    }
    if (digits.size() == 2 && digits != "10") throw fail("octave must be a number from 1 to 10");
    int octave = std::stoi(std::string(digits));
    if (octave < kMinOctave || octave > kMaxOctave) throw fail("octave must be a number from 1 to 10");
    od.octave = octave;
  }
  return od;
}

InstrumentName parse_instrument_name(std::string_view raw) {
  std::string_view text = trim(raw);
  if (text.empty()) throw ParseError(Errc::BadInstrumentName, "empty instrument name", 1, 1);
  for (std::size_t i = 0; i < text.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (!std::isalnum(c) && c != '_' && c != ' ') {
      throw ParseError(Errc::BadInstrumentName,
                       "bad instrument name '" + std::string(text) + "' (letters, digits, '_' and ' ' only)",
                       1, i + 1);
    }
  }
  return InstrumentName{std::string(text)};
}

CompositionSpec parse_spec(std::string_view text) {
  std::vector<RawRow> rows = Parser(text).parse();
  CompositionSpec spec;

  const RawRow& title = rows[0];
  if (title.strings.size() != 1) {
    throw ParseError(Errc::Syntax, "title row must hold exactly one string", title.line, title.column);
  }
  spec.title = title.strings[0].text;

  require_non_empty(rows[1], "note");
  for (const Token& tok : rows[1].strings) spec.notes.push_back(at(tok, parse_note_element));

  require_non_empty(rows[2], "octave-duration");
  for (const Token& tok : rows[2].strings) spec.octave_durations.push_back(at(tok, parse_octave_duration));

  require_non_empty(rows[3], "instrument");
  for (const Token& tok : rows[3].strings) spec.instruments.push_back(at(tok, parse_instrument_name));

  if (rows.size() == 5) {
    for (const Token& tok : rows[4].strings) {
      std::string_view keyword = trim(tok.text);
      if (keyword.empty()) throw ParseError(Errc::Syntax, "empty keyword", tok.line, tok.column);
      spec.keywords.emplace(keyword);
    }
  }
  return spec;
}

std::string serialize_spec(const CompositionSpec& spec) {
  std::ostringstream out;
  auto row = [&out](auto begin, auto end, auto&& text_of) {
    out << "  {";
    for (auto it = begin; it != end; ++it) {
      if (it != begin) out << ',';
      out << '"' << text_of(*it) << '"';
    }
    out << '}';
  };
  auto same = [](const auto& s) -> const auto& { return s; };

  out << "{\n  {\"" << spec.title << "\"},\n";
  row(spec.notes.begin(), spec.notes.end(), [](const NoteElement& e) { return e.to_string(); });
  out << ",\n";
  row(spec.octave_durations.begin(), spec.octave_durations.end(),
      [](const OctaveDuration& od) { return od.to_string(); });
  out << ",\n";
  row(spec.instruments.begin(), spec.instruments.end(), [](const InstrumentName& n) { return n.value; });
  if (!spec.keywords.empty()) {
    out << ",\n";
    row(spec.keywords.begin(), spec.keywords.end(), same);
  }
  out << "\n}\n";
  return out.str();
}

std::vector<Violation> validate_spec(const CompositionSpec& spec) {
  std::vector<Violation> violations;
  std::set<Pitch> pitches;
  for (const NoteElement& element : spec.notes) pitches.insert(element.notes.begin(), element.notes.end());
  std::set<int> octaves;
  for (const OctaveDuration& od : spec.octave_durations) octaves.insert(od.effective_octave());

  for (Pitch pitch : pitches) {
    for (int octave : octaves) {
      try {
        note_number(pitch, octave);
      } catch (const Error& e) {
        violations.push_back({Errc::OutOfMidiRange, e.what()});
      }
    }
  }
  std::set<std::string> reported;
  for (const InstrumentName& name : spec.instruments) {
    if (!find_program(name.value) && reported.insert(name.key()).second) {
      violations.push_back({Errc::UnknownInstrument, "unknown instrument '" + name.value + "'"});
    }
  }
  return violations;
}

DistinctCounts distinct_counts(const CompositionSpec& spec) {
  std::set<NoteElement> notes(spec.notes.begin(), spec.notes.end());
  std::set<OctaveDuration> ods(spec.octave_durations.begin(), spec.octave_durations.end());
  std::set<std::string> instruments;
  for (const InstrumentName& name : spec.instruments) instruments.insert(name.key());
  return {notes.size(), ods.size(), instruments.size()};
}

}  // namespace probmusic
