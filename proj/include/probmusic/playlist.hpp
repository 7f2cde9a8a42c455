#pragma once

// A library of pieces stored as one `.pm` file each, plus an optional
// playlist.json manifest carrying display order and titles. Files are
// authoritative; the manifest only decorates them.

#include <filesystem>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "probmusic/spec.hpp"

namespace probmusic {

struct PlaylistEntry {
  std::string id;
  std::string title;
  CompositionSpec spec;
  std::filesystem::path file_path;
  std::set<std::string> keywords;
  bool excluded = false;
};

struct PlayerConfig {
  int length_ms = 120;
  int streams_k = 3;
  double stagger_s = 3.0;
  std::set<std::string> excluded_keywords;
};

struct LoadDiagnostic {
  std::filesystem::path file;
  std::string message;
};

struct LibraryLoad {
  std::vector<PlaylistEntry> entries;
  std::vector<LoadDiagnostic> diagnostics;
};

inline constexpr std::string_view kSpecExtension = ".pm";
inline constexpr std::string_view kManifestName = "playlist.json";

// Lower-case letters, digits, '-' and '_', starting with a letter or digit.
bool is_valid_slug(std::string_view id);
std::string slugify(std::string_view name);

// Throws Error(DirectoryMissing). Unparseable files become diagnostics.
LibraryLoad load_library(const std::filesystem::path& directory);

// Keyword comparison ignores case.
bool matches_any_keyword(const std::set<std::string>& keywords, const std::set<std::string>& excluded);

// Library order minus every entry carrying an excluded keyword.
std::vector<PlaylistEntry> play_all_queue(std::span<const PlaylistEntry> library, const PlayerConfig& config);

// Thread-safe view over a library directory; writes are serialized.
class Library {
 public:
  explicit Library(std::filesystem::path directory);

  void reload();

  std::vector<PlaylistEntry> entries() const;
  std::vector<LoadDiagnostic> diagnostics() const;
  std::optional<PlaylistEntry> find(std::string_view id) const;
  // Raw file contents, exactly as last written.
  std::string read_text(std::string_view id) const;
  std::set<std::string> keywords() const;

  // Parses spec_text (throws ParseError), then writes <id>.pm through a
  // temporary file and rename. Throws Error(InvalidParams) for a bad id.
  PlaylistEntry upsert(std::string_view id, std::string_view spec_text);

  const std::filesystem::path& directory() const noexcept { return directory_; }

 private:
  std::filesystem::path directory_;
  mutable std::mutex mutex_;
  LibraryLoad state_;
};

}  // namespace probmusic
