#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace probmusic {

enum class Errc {
  MissingRow,
  EmptyBag,
  BadNoteToken,
  BadOctaveDuration,
  BadInstrumentName,
  UnbalancedBraces,
  Syntax,
  OutOfMidiRange,
  UnknownInstrument,
  TooManyStreams,
  InvalidParams,
  BadToken,
  AmbiguousSequence,
  DeviceUnavailable,
  DirectoryMissing,
  NotFound,
  Conflict,
  Io,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Parse failure with a 1-based source location inside the spec text.
class ParseError : public Error {
 public:
  ParseError(Errc code, const std::string& message, std::size_t line, std::size_t column);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string detail_;
};

}  // namespace probmusic
