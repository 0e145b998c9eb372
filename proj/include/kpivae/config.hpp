#ifndef KPIVAE_CONFIG_HPP
#define KPIVAE_CONFIG_HPP

#include "kpivae/types.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace kpivae {

/// Flat "key = value" configuration file: one pair per line, '#' comments,
/// blank lines ignored. Keys must be unique.
class KeyValues {
public:
  KeyValues() = default;
  static KeyValues from_file(const std::string& path);
  static KeyValues from_string(const std::string& text,
                               const std::string& origin);

  bool has(const std::string& key) const;
  void set(const std::string& key, std::string value);

  /// Typed getters consume the key; get_* with a fallback returns it when
  /// the key is absent. Malformed values raise DataError naming the key.
  std::string get_string(const std::string& key, std::string fallback);
  double get_double(const std::string& key, double fallback);
  std::int64_t get_int(const std::string& key, std::int64_t fallback);
  bool get_bool(const std::string& key, bool fallback);
  /// Comma-separated list of reals.
  std::vector<double> get_double_list(const std::string& key,
                                      std::vector<double> fallback);

  /// Error out when any key was never consumed (catches typos).
  void reject_unused() const;

private:
  std::string origin_ = "<config>";
  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

}  // namespace kpivae

#endif  // KPIVAE_CONFIG_HPP
