#pragma once

#include <map>
#include <string>
#include <vector>

namespace zest {

// Flat sectioned key-value file: `[section]` headers, `key = value` lines,
// `#` comments. Keys are validated against a fixed schema; anything unknown
// is an error, not a warning.
class ConfigFile {
 public:
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_string(const std::string& text);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& dflt) const;
  double get_double(const std::string& key, double dflt) const;
  int get_int(const std::string& key, int dflt) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) const;
  bool get_bool(const std::string& key, bool dflt) const;
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& dflt) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;  // "section.key" -> value
};

}  // namespace zest
