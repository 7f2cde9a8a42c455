#include "probmusic/playlist.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace probmusic {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Manifest {
  std::vector<std::string> order;
  std::map<std::string, std::string> titles;
};

Manifest read_manifest(const fs::path& directory, std::vector<LoadDiagnostic>& diagnostics) {
  Manifest manifest;
  fs::path path = directory / kManifestName;
  std::error_code ec;
  if (!fs::exists(path, ec)) return manifest;
  try {
    json doc = json::parse(read_file(path));
    if (doc.contains("order")) manifest.order = doc.at("order").get<std::vector<std::string>>();
    if (doc.contains("titles")) manifest.titles = doc.at("titles").get<std::map<std::string, std::string>>();
  } catch (const std::exception& e) {
    diagnostics.push_back({path, std::string("manifest ignored: ") + e.what()});
  }
  return manifest;
}

void apply_order(std::vector<PlaylistEntry>& entries, const Manifest& manifest) {
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  if (manifest.order.empty()) return;
  std::map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < manifest.order.size(); ++i) rank.emplace(manifest.order[i], i);
  std::stable_sort(entries.begin(), entries.end(), [&](const auto& a, const auto& b) {
    auto ra = rank.find(a.id), rb = rank.find(b.id);
    std::size_t ka = ra == rank.end() ? rank.size() : ra->second;
    std::size_t kb = rb == rank.end() ? rank.size() : rb->second;
    return ka < kb;
  });
}

PlaylistEntry make_entry(std::string id, CompositionSpec spec, fs::path path, const Manifest& manifest) {
  PlaylistEntry entry;
  entry.id = std::move(id);
  auto title = manifest.titles.find(entry.id);
  entry.title = title != manifest.titles.end() ? title->second : spec.title;
  entry.keywords = spec.keywords;
  entry.spec = std::move(spec);
  entry.file_path = std::move(path);
  return entry;
}

}  // namespace

bool is_valid_slug(std::string_view id) {
  if (id.empty() || id.size() > 128) return false;
  if (!std::isalnum(static_cast<unsigned char>(id.front()))) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
  });
}

std::string slugify(std::string_view name) {
  std::string out;
  bool dash = false;
  for (char c : name) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || c == '_') {
      if (dash && !out.empty()) out += '-';
      dash = false;
      out += static_cast<char>(std::tolower(u));
    } else {
      dash = true;
    }
  }
  return out.empty() ? "piece" : out;
}

LibraryLoad load_library(const fs::path& directory) {
  std::error_code ec;
  if (!fs::is_directory(directory, ec)) {
    throw Error(Errc::DirectoryMissing, "library directory '" + directory.string() + "' does not exist");
  }
  LibraryLoad load;
  Manifest manifest = read_manifest(directory, load.diagnostics);

  std::vector<fs::path> files;
  for (const auto& item : fs::directory_iterator(directory)) {
    if (item.is_regular_file() && item.path().extension() == kSpecExtension) files.push_back(item.path());
  }
  std::sort(files.begin(), files.end());

  std::set<std::string> seen;
  for (const fs::path& file : files) {
    std::string id = slugify(file.stem().string());
    if (!seen.insert(id).second) {
      load.diagnostics.push_back({file, "duplicate piece id '" + id + "', file skipped"});
      continue;
    }
    try {
      CompositionSpec spec = parse_spec(read_file(file));
      for (const Violation& v : validate_spec(spec)) {
        load.diagnostics.push_back({file, std::string(errc_name(v.kind)) + ": " + v.message});
      }
      load.entries.push_back(make_entry(id, std::move(spec), file, manifest));
    } catch (const Error& e) {
      load.diagnostics.push_back({file, std::string(errc_name(e.code())) + ": " + e.what()});
    }
  }
  apply_order(load.entries, manifest);
  return load;
}

bool matches_any_keyword(const std::set<std::string>& keywords, const std::set<std::string>& excluded) {
  for (const std::string& k : keywords) {
    for (const std::string& x : excluded) {
      if (lower(k) == lower(x)) return true;
    }
  }
  return false;
}

std::vector<PlaylistEntry> play_all_queue(std::span<const PlaylistEntry> library, const PlayerConfig& config) {
  std::vector<PlaylistEntry> queue;
  for (const PlaylistEntry& entry : library) {
    if (!matches_any_keyword(entry.keywords, config.excluded_keywords)) queue.push_back(entry);
  }
  return queue;
}

Library::Library(fs::path directory) : directory_(std::move(directory)) { reload(); }

void Library::reload() {
  LibraryLoad fresh = load_library(directory_);
  std::lock_guard lock(mutex_);
  state_ = std::move(fresh);
}

std::vector<PlaylistEntry> Library::entries() const {
  std::lock_guard lock(mutex_);
  return state_.entries;
}

std::vector<LoadDiagnostic> Library::diagnostics() const {
  std::lock_guard lock(mutex_);
  return state_.diagnostics;
}

std::optional<PlaylistEntry> Library::find(std::string_view id) const {
  std::lock_guard lock(mutex_);
  for (const PlaylistEntry& e : state_.entries) {
    if (e.id == id) return e;
  }
  return std::nullopt;
}

std::string Library::read_text(std::string_view id) const {
  auto entry = find(id);
  if (!entry) throw Error(Errc::NotFound, "no piece '" + std::string(id) + "'");
  std::lock_guard lock(mutex_);
  return read_file(entry->file_path);
}

std::set<std::string> Library::keywords() const {
  std::lock_guard lock(mutex_);
  std::set<std::string> all;
  for (const PlaylistEntry& e : state_.entries) all.insert(e.keywords.begin(), e.keywords.end());
  return all;
}

PlaylistEntry Library::upsert(std::string_view id, std::string_view spec_text) {
  if (!is_valid_slug(id)) {
    throw Error(Errc::InvalidParams, "piece id must be a lower-case slug ([a-z0-9][a-z0-9_-]*)");
  }
  CompositionSpec spec = parse_spec(spec_text);

  std::lock_guard lock(mutex_);
  auto existing = std::find_if(state_.entries.begin(), state_.entries.end(),
                               [&](const PlaylistEntry& e) { return e.id == id; });
  fs::path target = existing != state_.entries.end()
                        ? existing->file_path
                        : directory_ / (std::string(id) + std::string(kSpecExtension));
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(spec_text.data(), static_cast<std::streamsize>(spec_text.size()));
    out.flush();
    if (!out) throw Error(Errc::Io, "cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(Errc::Io, "cannot replace " + target.string());
  }

  std::vector<LoadDiagnostic> ignored;
  Manifest manifest = read_manifest(directory_, ignored);
  PlaylistEntry entry = make_entry(std::string(id), std::move(spec), target, manifest);
  if (existing != state_.entries.end()) {
    *existing = entry;
  } else {
    state_.entries.push_back(entry);
    apply_order(state_.entries, manifest);
  }
  return entry;
}

}  // namespace probmusic
