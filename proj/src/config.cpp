#include "kpivae/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace kpivae {

namespace {

std::string trim(const std::string& s) {
  const std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValues KeyValues::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str(), path);
}

KeyValues KeyValues::from_string(const std::string& text,
                                const std::string& origin) {
  KeyValues kv;
  kv.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError(origin + ":" + std::to_string(lineno) +
                      ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw DataError(origin + ":" + std::to_string(lineno) + ": empty key");
    }
    if (!kv.values_.emplace(key, value).second) {
      throw DataError(origin + ":" + std::to_string(lineno) +
                      ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

bool KeyValues::has(const std::string& key) const {
  return values_.count(key) != 0;
}

void KeyValues::set(const std::string& key, std::string value) {
  values_[key] = std::move(value);
}

std::string KeyValues::get_string(const std::string& key,
                                  std::string fallback) {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  used_.insert(key);
  return it->second;
}

double KeyValues::get_double(const std::string& key, double fallback) {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  used_.insert(key);
  const std::string& f = it->second;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc() || ptr != f.data() + f.size()) {
    throw DataError(origin_ + ": key '" + key + "' has non-numeric value '" +
                    f + "'");
  }
  return v;
}

std::int64_t KeyValues::get_int(const std::string& key, std::int64_t fallback) {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  used_.insert(key);
  const std::string& f = it->second;
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc() || ptr != f.data() + f.size()) {
    throw DataError(origin_ + ": key '" + key + "' has non-integer value '" +
                    f + "'");
  }
  return v;
}

bool KeyValues::get_bool(const std::string& key, bool fallback) {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  used_.insert(key);
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw DataError(origin_ + ": key '" + key + "' must be true or false");
}

std::vector<double> KeyValues::get_double_list(const std::string& key,
                                               std::vector<double> fallback) {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  used_.insert(key);
  std::vector<double> out;
  const std::string& text = it->second;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = trim(text.substr(start, comma - start));
    if (item.empty()) {
      throw DataError(origin_ + ": key '" + key + "' has an empty list item");
    }
    double v = 0.0;
    const auto [ptr, ec] =
        std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw DataError(origin_ + ": key '" + key + "' has non-numeric item '" +
                      item + "'");
    }
    out.push_back(v);
    start = comma + 1;
  }
  return out;
}

void KeyValues::reject_unused() const {
  for (const auto& [key, value] : values_) {
    if (!used_.count(key)) {
      throw DataError(origin_ + ": unknown key '" + key + "'");
    }
  }
}

}  // namespace kpivae
