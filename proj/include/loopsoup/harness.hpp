#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace loopsoup {

inline constexpr int kSchemaVersion = 1;

/// Invalid configuration; the message names the offending field as config.<key>.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Key-value run configuration.
///
/// Grammar, one entry per line:
///   line    := blank | comment | entry
///   comment := '#' any*
///   entry   := key ws* '=' ws* value
///   key     := [A-Za-z0-9_.-]+
///   value   := everything after '=' with surrounding blanks and one pair of
///              double quotes stripped; a trailing " # ..." is a comment
/// Later entries replace earlier ones; command-line flags are applied last.
class Config {
 public:
  static Config parse(std::string_view text, const std::string& source = "<string>");
  static Config load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /// Throws on any key outside `allowed`.
  void require_known(const std::vector<std::string>& allowed) const;

  /// Values typed where they parse as numbers or booleans.
  nlohmann::json to_json() const;

 private:
  std::map<std::string, std::string> values_;
};

/// SHA-1 of a git blob object: sha1("blob <size>\0" + content), hex.
std::string git_blob_hash(std::string_view content);

/// Hash over named blobs: sha1 of the lines "<blob hash> <name>\n" in name
/// order, so it depends on names and contents only.
std::string content_hash(const std::map<std::string, std::string>& files);

/// Output files of one run. Contents are buffered and written on commit();
/// if writing fails, or the set is dropped uncommitted, nothing is left behind.
class ArtifactSet {
 public:
  explicit ArtifactSet(std::filesystem::path dir);
  ~ArtifactSet();
  ArtifactSet(const ArtifactSet&) = delete;
  ArtifactSet& operator=(const ArtifactSet&) = delete;

  std::ostringstream& open(const std::string& name);
  const std::filesystem::path& dir() const { return dir_; }

  std::map<std::string, std::string> contents() const;
  std::string hash() const { return content_hash(contents()); }

  /// Writes every file plus manifest.json holding `manifest` extended with
  /// the schema version, file blobs, content hash and runtime. Returns the hash.
  std::string commit(nlohmann::json manifest);
  void discard();

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::ostringstream> buffers_;
  std::vector<std::filesystem::path> written_;
  std::chrono::steady_clock::time_point start_;
  bool committed_ = false;
};

}  // namespace loopsoup
