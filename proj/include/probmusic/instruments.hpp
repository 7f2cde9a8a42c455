#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "probmusic/spec.hpp"

namespace probmusic {

// General MIDI Level 1 instrument table. Lookups are case-insensitive and
// treat '_' and ' ' as the same character. Besides the 128 standard names
// the table carries the short aliases used by Java MIDI toolkits
// (ELECTRIC_JAZZ_GUITAR, Atmosphere, Choir, ...).

std::string instrument_key(std::string_view name);

std::optional<int> find_program(std::string_view name);

// 0-based GM program; throws Error(UnknownInstrument).
int program_number(const InstrumentName& name);

// Canonical GM name of a 0-based program, e.g. 68 -> "Oboe".
std::string_view gm_program_name(int program);

// Every name the table accepts, canonical names first.
std::vector<std::string> known_instrument_names();

}  // namespace probmusic
