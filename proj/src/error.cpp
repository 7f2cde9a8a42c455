#include "probmusic/error.hpp"

namespace probmusic {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::MissingRow: return "MissingRow";
    case Errc::EmptyBag: return "EmptyBag";
    case Errc::BadNoteToken: return "BadNoteToken";
    case Errc::BadOctaveDuration: return "BadOctaveDuration";
    case Errc::BadInstrumentName: return "BadInstrumentName";
    case Errc::UnbalancedBraces: return "UnbalancedBraces";
    case Errc::Syntax: return "Syntax";
    case Errc::OutOfMidiRange: return "OutOfMidiRange";
    case Errc::UnknownInstrument: return "UnknownInstrument";
    case Errc::TooManyStreams: return "TooManyStreams";
    case Errc::InvalidParams: return "InvalidParams";
    case Errc::BadToken: return "BadToken";
    case Errc::AmbiguousSequence: return "AmbiguousSequence";
    case Errc::DeviceUnavailable: return "DeviceUnavailable";
    case Errc::DirectoryMissing: return "DirectoryMissing";
    case Errc::NotFound: return "NotFound";
    case Errc::Conflict: return "Conflict";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message) : std::runtime_error(message), code_(code) {}

ParseError::ParseError(Errc code, const std::string& message, std::size_t line, std::size_t column)
    : Error(code, message + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
      line_(line),
      column_(column),
      detail_(message) {}

}  // namespace probmusic
