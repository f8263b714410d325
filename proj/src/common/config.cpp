#include "common/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "common/error.hpp"

namespace graphmem {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
    ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
    --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      break;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

KeyValueConfig KeyValueConfig::parse(std::string_view text,
                                     std::string_view origin) {
  KeyValueConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t[0] == '#')
      continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(std::string(origin) + ":" + std::to_string(lineno)
                        + ": expected key=value, got '" + t + "'");
    auto key = trim(std::string_view(t).substr(0, eq));
    if (key.empty())
      throw ConfigError(std::string(origin) + ":" + std::to_string(lineno)
                        + ": empty key");
    cfg.entries_[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

std::optional<std::string> KeyValueConfig::get(const std::string &key) const {
  auto it = entries_.find(key);
  if (it == entries_.end())
    return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string &key,
                                       const std::string &fallback) const {
  auto v = get(key);
  return v ? *v : fallback;
}

long long KeyValueConfig::get_int(const std::string &key,
                                  long long fallback) const {
  auto v = get(key);
  if (!v)
    return fallback;
  long long out = 0;
  auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || p != v->data() + v->size())
    throw ConfigError("config key '" + key + "': not an integer: '" + *v
                      + "'");
  return out;
}

double KeyValueConfig::get_double(const std::string &key,
                                  double fallback) const {
  auto v = get(key);
  if (!v)
    return fallback;
  try {
    std::size_t used = 0;
    double out = std::stod(*v, &used);
    if (used != v->size())
      throw std::invalid_argument("trailing");
    return out;
  } catch (const std::exception &) {
    throw ConfigError("config key '" + key + "': not a number: '" + *v + "'");
  }
}

bool KeyValueConfig::get_bool(const std::string &key, bool fallback) const {
  auto v = get(key);
  if (!v)
    return fallback;
  if (*v == "1" || *v == "true" || *v == "yes" || *v == "on")
    return true;
  if (*v == "0" || *v == "false" || *v == "no" || *v == "off")
    return false;
  throw ConfigError("config key '" + key + "': not a boolean: '" + *v + "'");
}

std::vector<std::string>
KeyValueConfig::keys_with_prefix(std::string_view prefix) const {
  std::vector<std::string> out;
  for (const auto &[k, v]: entries_)
    if (std::string_view(k).substr(0, prefix.size()) == prefix)
      out.push_back(k);
  return out;
}

std::string KeyValueConfig::to_text() const {
  std::string out;
  for (const auto &[k, v]: entries_)
    out += k + "=" + v + "\n";
  return out;
}

} // namespace graphmem
