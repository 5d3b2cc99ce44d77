#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace fvfseg {

/// Ordered list of key=value pairs. Used for models, reports, manifests and
/// pipeline configs; one pair per line, '#' starts a comment line.
class KeyValues {
 public:
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);  // %.17g
  void set(const std::string& key, long long value);
  void set(const std::string& key, int value) { set(key, static_cast<long long>(value)); }
  void set(const std::string& key, std::size_t value) {
    set(key, static_cast<long long>(value));
  }

  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;  // Config error if absent
  double get_real(const std::string& key) const;
  long long get_int(const std::string& key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  std::string to_string() const;
  static KeyValues parse(const std::string& text);
  static KeyValues load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::string format_real(double v);
double parse_real(const std::string& key, const std::string& text);
long long parse_int(const std::string& key, const std::string& text);

}  // namespace fvfseg
