#include "loopsoup/harness.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>

#include <openssl/sha.h>

namespace loopsoup {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_key(std::string_view k) {
  return !k.empty() && std::all_of(k.begin(), k.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
  });
}

ConfigError field_error(const std::string& key, const std::string& what, const std::string& value) {
  return ConfigError("config." + key + ": " + what + ", got '" + value + "'");
}

std::string hex(const unsigned char* d, std::size_t n) {
  std::string out;
  char buf[3];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", d[i]);
    out += buf;
  }
  return out;
}

std::string sha1_hex(std::string_view data) {
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(data.data()), data.size(), digest);
  return hex(digest, SHA_DIGEST_LENGTH);
}

}  // namespace

Config Config::parse(std::string_view text, const std::string& source) {
  Config c;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
    const std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));
    if (!valid_key(key)) throw ConfigError(where + "bad key '" + std::string(key) + "'");
    if (value.size() >= 2 && value.front() == '"') {
      const auto close = value.find('"', 1);
      if (close == std::string_view::npos) throw ConfigError(where + "unterminated quote");
      value = value.substr(1, close - 1);
    } else if (const auto hash = value.find(" #"); hash != std::string_view::npos) {
      value = trim(value.substr(0, hash));
    }
    c.values_[std::string(key)] = std::string(value);
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void Config::set(const std::string& key, const std::string& value) {
  if (!valid_key(key)) throw ConfigError("bad key '" + key + "'");
  values_[key] = value;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(it->second, &used);
  } catch (const std::exception&) {
    throw field_error(key, "expected a number", it->second);
  }
  if (used != it->second.size()) throw field_error(key, "expected a number", it->second);
  return x;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& s = it->second;
  std::int64_t x = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (r.ec == std::errc() && r.ptr == s.data() + s.size()) return x;
  // Accept integral values written in floating notation (1e4).
  std::size_t used = 0;
  double d = 0;
  try {
    d = std::stod(s, &used);
  } catch (const std::exception&) {
    throw field_error(key, "expected an integer", s);
  }
  if (used != s.size() || d != std::floor(d) || std::abs(d) > 9e15) throw field_error(key, "expected an integer", s);
  return static_cast<std::int64_t>(d);
}

std::uint64_t Config::get_uint(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& s = it->second;
  std::uint64_t x = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw field_error(key, "expected a non-negative integer", s);
  return x;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& s = it->second;
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw field_error(key, "expected true or false", s);
}

void Config::require_known(const std::vector<std::string>& allowed) const {
  for (const auto& [k, v] : values_)
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) throw field_error(k, "unknown field", v);
}

nlohmann::json Config::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : values_) {
    std::int64_t i = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), i);
    if (r.ec == std::errc() && r.ptr == v.data() + v.size()) {
      j[k] = i;
      continue;
    }
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (!v.empty() && end == v.c_str() + v.size() && std::isfinite(d)) j[k] = d;
    else if (v == "true" || v == "false") j[k] = v == "true";
    else j[k] = v;
  }
  return j;
}

std::string git_blob_hash(std::string_view content) {
  std::string obj = "blob " + std::to_string(content.size());
  obj.push_back('\0');
  obj.append(content);
  return sha1_hex(obj);
}

std::string content_hash(const std::map<std::string, std::string>& files) {
  std::string listing;
  for (const auto& [name, data] : files) listing += git_blob_hash(data) + " " + name + "\n";
  return sha1_hex(listing);
}

ArtifactSet::ArtifactSet(std::filesystem::path dir) : dir_(std::move(dir)), start_(std::chrono::steady_clock::now()) {}

ArtifactSet::~ArtifactSet() {
  if (!committed_) discard();
}

std::ostringstream& ArtifactSet::open(const std::string& name) {
  if (name == "manifest.json" || name.find('/') != std::string::npos)
    throw std::invalid_argument("ArtifactSet: reserved or nested name " + name);
  auto& b = buffers_[name];
  b << std::setprecision(17);
  return b;
}

std::map<std::string, std::string> ArtifactSet::contents() const {
  std::map<std::string, std::string> out;
  for (const auto& [name, buf] : buffers_) out[name] = buf.str();
  return out;
}

std::string ArtifactSet::commit(nlohmann::json manifest) {
  if (committed_) throw std::logic_error("ArtifactSet: already committed");
  const auto files = contents();
  const std::string digest = content_hash(files);
  try {
    std::filesystem::create_directories(dir_);
    nlohmann::json listing = nlohmann::json::array();
    for (const auto& [name, data] : files) {
      const auto path = dir_ / name;
      written_.push_back(path);
      std::ofstream out(path, std::ios::binary);
      out << data;
      if (!out) throw std::runtime_error("cannot write " + path.string());
      listing.push_back({{"name", name}, {"blob", git_blob_hash(data)}, {"bytes", data.size()}});
    }
    manifest["schema_version"] = kSchemaVersion;
    manifest["files"] = listing;
    manifest["content_hash"] = digest;
    manifest["runtime_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    const auto path = dir_ / "manifest.json";
    written_.push_back(path);
    std::ofstream out(path);
    out << manifest.dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write " + path.string());
  } catch (...) {
    discard();
    throw;
  }
  committed_ = true;
  return digest;
}

void ArtifactSet::discard() {
  std::error_code ec;
  for (const auto& p : written_) std::filesystem::remove(p, ec);
  written_.clear();
}

}  // namespace loopsoup
