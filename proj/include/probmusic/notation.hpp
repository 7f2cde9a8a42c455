#pragma once

// Console score notation:
//
//   Thread No0 has started on 2013/10/28 00:43:12
//   T[Allegro] I[Choir] A3q A2h I[Oboe] Eh A5w ...
//
// A multi-note word is written as one note token per note, all sharing the
// word's octave-duration ("A B" with 3q -> "A3q B3q").

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

#include "probmusic/generator.hpp"
#include "probmusic/spec.hpp"

namespace probmusic {

// Wall-clock time as read off a local clock face. Stored in a sys_seconds
// so arithmetic and formatting never touch the time zone database.
using CivilTime = std::chrono::sys_seconds;

CivilTime local_now();
std::string format_timestamp(CivilTime t);  // yyyy/MM/dd HH:mm:ss
// Throws Error(InvalidParams) unless text matches yyyy/MM/dd HH:mm:ss.
CivilTime parse_timestamp(std::string_view text);

struct ScoreText {
  std::string header;
  std::string body;
};

std::string format_header(int stream_index, CivilTime start);
std::vector<std::string> format_tokens(const ScoreEvent& event);
ScoreText format_mscore(const MScore& score, CivilTime start);

// Inverse of format_mscore. The stream index comes from the header when one
// is present. With a spec holding only single-note elements each note token
// is one word; otherwise note runs are segmented against the note bag and
// Error(AmbiguousSequence) is thrown when more than one segmentation fits.
// Throws Error(BadToken) for malformed tokens.
MScore parse_mscore(const ScoreText& text, const CompositionSpec& spec);

}  // namespace probmusic
