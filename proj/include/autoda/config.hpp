#ifndef AUTODA_CONFIG_HPP
#define AUTODA_CONFIG_HPP

#include "autoda/search.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace autoda {

/// `key = value` lines; `#` starts a comment. Every key must be consumed,
/// so a misspelt key is an error instead of a silent default.
class KeyValues {
 public:
  static KeyValues parse(std::string_view text);
  static KeyValues load(const std::string &path);

  void set(const std::string &key, const std::string &value) { values_[key] = value; }
  bool has(const std::string &key) const { return values_.count(key) != 0; }

  std::string get(const std::string &key, const std::string &fallback);
  double get(const std::string &key, double fallback);
  std::uint64_t get(const std::string &key, std::uint64_t fallback);
  bool get(const std::string &key, bool fallback);
  std::vector<std::uint64_t> get(const std::string &key, const std::vector<std::uint64_t> &fallback);

  /// Throws ConfigError naming every key never read.
  void reject_unused() const;

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, std::size_t> lines_;
  std::set<std::string> read_;
};

/// Reads search settings; unset keys keep `base`'s values.
SearchConfig search_config(KeyValues &kv, SearchConfig base = {});

/// Commented config file listing every search key with its current value.
std::string format_search_config(const SearchConfig &cfg);

}

#endif //AUTODA_CONFIG_HPP
