#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace auraseg {

// Flat `key = value` document. Lines starting with '#' are comments; list
// values are comma separated. Typed accessors throw ConfigError naming the key
// and the expected type.
class KeyValueDocument {
 public:
  static KeyValueDocument parse(std::string_view text);
  static KeyValueDocument load(const std::filesystem::path& path);

  std::string to_string() const;
  void save(const std::filesystem::path& path) const;

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value);
  /// Applies a `key=value` override as given on the command line.
  void apply_override(std::string_view assignment);
  const std::map<std::string, std::string>& entries() const noexcept { return values_; }

  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<int> get_int(const std::string& key) const;
  std::optional<double> get_real(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  std::optional<std::vector<int>> get_int_list(const std::string& key) const;
  std::optional<std::vector<double>> get_real_list(const std::string& key) const;

 private:
  std::map<std::string, std::string> values_;
};

std::string format_real(double value);
std::string join_ints(const std::vector<int>& values);
std::string join_reals(const std::vector<double>& values);

}  // namespace auraseg
