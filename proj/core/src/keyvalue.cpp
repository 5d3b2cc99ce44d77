#include "fvfseg/keyvalue.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "fvfseg/error.hpp"
#include "fvfseg/volume_io.hpp"

namespace fvfseg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_real(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used == text.size() && !text.empty() && std::isfinite(v), ErrorCode::Config,
          "'" + key + "' expects a real number, got '" + text + "'");
  return v;
}

long long parse_int(const std::string& key, const std::string& text) {
  long long v = 0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  require(res.ec == std::errc{} && res.ptr == end && !text.empty(), ErrorCode::Config,
          "'" + key + "' expects an integer, got '" + text + "'");
  return v;
}

void KeyValues::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

void KeyValues::set(const std::string& key, double value) { set(key, format_real(value)); }

void KeyValues::set(const std::string& key, long long value) {
  set(key, std::to_string(value));
}

bool KeyValues::has(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return true;
  }
  return false;
}

const std::string& KeyValues::get(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  fail(ErrorCode::Config, "missing key '" + key + "'");
}

double KeyValues::get_real(const std::string& key) const { return parse_real(key, get(key)); }

long long KeyValues::get_int(const std::string& key) const { return parse_int(key, get(key)); }

std::string KeyValues::to_string() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
  return out;
}

KeyValues KeyValues::parse(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    require(eq != std::string::npos && eq > 0, ErrorCode::Config,
            "line " + std::to_string(lineno) + ": expected key=value");
    kv.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return kv;
}

KeyValues KeyValues::load(const std::filesystem::path& path) {
  try {
    return parse(read_file(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void KeyValues::save(const std::filesystem::path& path) const {
  write_file_atomic(path, to_string());
}

}  // namespace fvfseg
