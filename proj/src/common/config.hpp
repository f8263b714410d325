#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace graphmem {

// Flat key=value configuration. Blank lines and lines starting with '#' are
// skipped; keys and values are whitespace-trimmed. Later assignments win.
class KeyValueConfig {
public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(std::string_view text, std::string_view origin);
  static KeyValueConfig load(const std::string &path);

  void set(const std::string &key, const std::string &value) {
    entries_[key] = value;
  }
  bool contains(const std::string &key) const {
    return entries_.count(key) != 0;
  }
  std::optional<std::string> get(const std::string &key) const;

  std::string get_string(const std::string &key,
                         const std::string &fallback) const;
  long long get_int(const std::string &key, long long fallback) const;
  double get_double(const std::string &key, double fallback) const;
  bool get_bool(const std::string &key, bool fallback) const;

  // Keys starting with prefix, in lexicographic order.
  std::vector<std::string> keys_with_prefix(std::string_view prefix) const;

  const std::map<std::string, std::string> &entries() const {
    return entries_;
  }

  std::string to_text() const;

private:
  std::map<std::string, std::string> entries_;
};

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

} // namespace graphmem
