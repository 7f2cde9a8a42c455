#include "probmusic/instruments.hpp"

#include <array>
#include <cctype>
#include <unordered_map>

namespace probmusic {

namespace {

constexpr std::array<std::string_view, 128> kGmNames = {
    "Acoustic Grand Piano", "Bright Acoustic Piano", "Electric Grand Piano", "Honky-tonk Piano",
    "Electric Piano 1", "Electric Piano 2", "Harpsichord", "Clavinet",
    "Celesta", "Glockenspiel", "Music Box", "Vibraphone",
    "Marimba", "Xylophone", "Tubular Bells", "Dulcimer",
    "Drawbar Organ", "Percussive Organ", "Rock Organ", "Church Organ",
    "Reed Organ", "Accordion", "Harmonica", "Tango Accordion",
    "Acoustic Guitar (nylon)", "Acoustic Guitar (steel)", "Electric Guitar (jazz)", "Electric Guitar (clean)",
    "Electric Guitar (muted)", "Overdriven Guitar", "Distortion Guitar", "Guitar Harmonics",
    "Acoustic Bass", "Electric Bass (finger)", "Electric Bass (pick)", "Fretless Bass",
    "Slap Bass 1", "Slap Bass 2", "Synth Bass 1", "Synth Bass 2",
    "Violin", "Viola", "Cello", "Contrabass",
    "Tremolo Strings", "Pizzicato Strings", "Orchestral Harp", "Timpani",
    "String Ensemble 1", "String Ensemble 2", "Synth Strings 1", "Synth Strings 2",
    "Choir Aahs", "Voice Oohs", "Synth Voice", "Orchestra Hit",
    "Trumpet", "Trombone", "Tuba", "Muted Trumpet",
    "French Horn", "Brass Section", "Synth Brass 1", "Synth Brass 2",
    "Soprano Sax", "Alto Sax", "Tenor Sax", "Baritone Sax",
    "Oboe", "English Horn", "Bassoon", "Clarinet",
    "Piccolo", "Flute", "Recorder", "Pan Flute",
    "Blown Bottle", "Shakuhachi", "Whistle", "Ocarina",
    "Lead 1 (square)", "Lead 2 (sawtooth)", "Lead 3 (calliope)", "Lead 4 (chiff)",
    "Lead 5 (charang)", "Lead 6 (voice)", "Lead 7 (fifths)", "Lead 8 (bass + lead)",
    "Pad 1 (new age)", "Pad 2 (warm)", "Pad 3 (polysynth)", "Pad 4 (choir)",
    "Pad 5 (bowed)", "Pad 6 (metallic)", "Pad 7 (halo)", "Pad 8 (sweep)",
    "FX 1 (rain)", "FX 2 (soundtrack)", "FX 3 (crystal)", "FX 4 (atmosphere)",
    "FX 5 (brightness)", "FX 6 (goblins)", "FX 7 (echoes)", "FX 8 (sci-fi)",
    "Sitar", "Banjo", "Shamisen", "Koto",
    "Kalimba", "Bagpipe", "Fiddle", "Shanai",
    "Tinkle Bell", "Agogo", "Steel Drums", "Woodblock",
    "Taiko Drum", "Melodic Tom", "Synth Drum", "Reverse Cymbal",
    "Guitar Fret Noise", "Breath Noise", "Seashore", "Bird Tweet",
    "Telephone Ring", "Helicopter", "Applause", "Gunshot",
};

struct Alias {
  std::string_view name;
  int program;
};

// Identifier-style names as spelled by Java MIDI toolkits, plus a few
// short forms. "Choir" resolves to Choir Aahs.
constexpr Alias kAliases[] = {
    {"PIANO", 0}, {"ACOUSTIC_GRAND", 0}, {"BRIGHT_ACOUSTIC", 1}, {"ELECTRIC_GRAND", 2},
    {"HONKEY_TONK", 3}, {"HONKY_TONK", 3}, {"ELECTRIC_PIANO", 4}, {"RHODES_PIANO", 4},
    {"CHORUSED_PIANO", 5}, {"HARPISCHORD", 6}, {"CLAVI", 7}, {"ACCORDIAN", 21},
    {"TANGO_ACCORDIAN", 23}, {"GUITAR", 24}, {"NYLON_STRING_GUITAR", 24},
    {"STEEL_STRING_GUITAR", 25}, {"ELECTRIC_JAZZ_GUITAR", 26}, {"ELECTRIC_CLEAN_GUITAR", 27},
    {"ELECTRIC_MUTED_GUITAR", 28}, {"ELECTRIC_BASS_FINGER", 33}, {"ELECTRIC_BASS_PICK", 34},
    {"SLAP_BASS_1", 36}, {"SLAP_BASS_2", 37}, {"SYNTH_BASS_1", 38}, {"SYNTH_BASS_2", 39},
    {"HARP", 46}, {"ORCHESTRAL_STRINGS", 46}, {"STRINGS", 48}, {"SYNTH_STRINGS", 50},
    {"CHOIR", 52}, {"AAHS", 52}, {"VOICE_OOHS", 53}, {"OOHS", 53}, {"SYNTH_CHOIR", 54},
    {"BRASS", 61}, {"SYNTHBRASS_1", 62}, {"SYNTHBRASS_2", 63}, {"SKAKUHACHI", 77},
    {"SQUARE", 80}, {"SAWTOOTH", 81}, {"CALLIOPE", 82}, {"CHIFF", 83}, {"CHARANG", 84},
    {"VOICE", 85}, {"FIFTHS", 86}, {"BASSLEAD", 87}, {"BASS_LEAD", 87}, {"NEW_AGE", 88},
    {"WARM", 89}, {"POLYSYNTH", 90}, {"BOWED", 92}, {"METALLIC", 93}, {"HALO", 94},
    {"SWEEP", 95}, {"RAIN", 96}, {"SOUNDTRACK", 97}, {"CRYSTAL", 98}, {"ATMOSPHERE", 99},
    {"BRIGHTNESS", 100}, {"GOBLIN", 101}, {"GOBLINS", 101}, {"ECHOES", 102}, {"ECHO", 102},
    {"SCI_FI", 103}, {"SCIFI", 103}, {"STEEL_DRUM", 114}, {"TAIKO", 116},
    {"FRET_NOISE", 120}, {"TELEPHONE", 124}, {"SYNTHSTRINGS_1", 50}, {"SYNTHSTRINGS_2", 51},
    {"BAG_PIPE", 109},
};

// GM spellings reduced to identifier form: "Electric Guitar (jazz)" ->
// "ELECTRIC_GUITAR_JAZZ", "Lead 8 (bass + lead)" -> "LEAD_8_BASS_LEAD".
std::string identifier_form(std::string_view gm_name) {
  std::string out;
  bool pending_sep = false;
  for (char c : gm_name) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      if (pending_sep && !out.empty()) out += '_';
      pending_sep = false;
      out += static_cast<char>(std::toupper(u));
    } else {
      pending_sep = true;
    }
  }
  return out;
}

const std::unordered_map<std::string, int>& table() {
  static const auto* map = [] {
    auto* m = new std::unordered_map<std::string, int>;
    for (int program = 0; program < 128; ++program) {
      m->emplace(identifier_form(kGmNames[program]), program);
    }
    for (const Alias& alias : kAliases) m->emplace(std::string(alias.name), alias.program);
    return m;
  }();
  return *map;
}

}  // namespace

std::string instrument_key(std::string_view name) {
  std::string key;
  key.reserve(name.size());
  for (char c : name) {
    key += c == ' ' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return key;
}

std::optional<int> find_program(std::string_view name) {
  const auto& map = table();
  auto it = map.find(instrument_key(name));
  // published names such as "Electric Guitar (jazz)"
  if (it == map.end()) it = map.find(identifier_form(name));
  if (it == map.end()) return std::nullopt;
  return it->second;
}

int program_number(const InstrumentName& name) {
  auto program = find_program(name.value);
  if (!program) throw Error(Errc::UnknownInstrument, "unknown instrument '" + name.value + "'");
  return *program;
}

std::string_view gm_program_name(int program) {
  if (program < 0 || program > 127) return {};
  return kGmNames[program];
}

std::vector<std::string> known_instrument_names() {
  std::vector<std::string> names;
  for (int program = 0; program < 128; ++program) names.push_back(identifier_form(kGmNames[program]));
  for (const Alias& alias : kAliases) names.emplace_back(alias.name);
  return names;
}

}  // namespace probmusic
