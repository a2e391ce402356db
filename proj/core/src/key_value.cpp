#include "auraseg/key_value.hpp"

#include "auraseg/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace auraseg {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, std::string_view expected, const std::string& value) {
  throw ConfigError("key '" + key + "' expects " + std::string(expected) + ", got '" + value + "'");
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> items;
  while (true) {
    const auto comma = text.find(',');
    items.push_back(trim(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return items;
}

}  // namespace

KeyValueDocument KeyValueDocument::parse(std::string_view text) {
  KeyValueDocument doc;
  int line_number = 0;
  while (!text.empty()) {
    const auto newline = text.find('\n');
    std::string_view line = text.substr(0, newline);
    text.remove_prefix(newline == std::string_view::npos ? text.size() : newline + 1);
    ++line_number;

    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw FormatError("expected 'key = value'", line_number);
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw FormatError("empty key", line_number);
    doc.values_[key] = std::string(trim(line.substr(eq + 1)));
  }
  return doc;
}

KeyValueDocument KeyValueDocument::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::string KeyValueDocument::to_string() const {
  std::string out;
  for (const auto& [key, value] : values_) out += key + " = " + value + "\n";
  return out;
}

void KeyValueDocument::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config file " + path.string());
  out << to_string();
}

void KeyValueDocument::set(const std::string& key, std::string value) { values_[key] = std::move(value); }

void KeyValueDocument::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || trim(assignment.substr(0, eq)).empty()) {
    throw ConfigError("override '" + std::string(assignment) + "' must look like key=value");
  }
  set(std::string(trim(assignment.substr(0, eq))), std::string(trim(assignment.substr(eq + 1))));
}

std::optional<std::string> KeyValueDocument::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> KeyValueDocument::get_int(const std::string& key) const {
  const auto raw = get_string(key);
  if (!raw) return std::nullopt;
  int value = 0;
  if (!parse_number(*raw, value)) bad_value(key, "integer", *raw);
  return value;
}

std::optional<double> KeyValueDocument::get_real(const std::string& key) const {
  const auto raw = get_string(key);
  if (!raw) return std::nullopt;
  double value = 0.0;
  if (!parse_number(*raw, value)) bad_value(key, "real", *raw);
  return value;
}

std::optional<bool> KeyValueDocument::get_bool(const std::string& key) const {
  const auto raw = get_string(key);
  if (!raw) return std::nullopt;
  if (*raw == "true" || *raw == "1" || *raw == "on") return true;
  if (*raw == "false" || *raw == "0" || *raw == "off") return false;
  bad_value(key, "bool (true/false)", *raw);
}

std::optional<std::vector<int>> KeyValueDocument::get_int_list(const std::string& key) const {
  const auto raw = get_string(key);
  if (!raw) return std::nullopt;
  std::vector<int> out;
  for (auto item : split_list(*raw)) {
    int value = 0;
    if (!parse_number(item, value)) bad_value(key, "comma-separated integer list", *raw);
    out.push_back(value);
  }
  return out;
}

std::optional<std::vector<double>> KeyValueDocument::get_real_list(const std::string& key) const {
  const auto raw = get_string(key);
  if (!raw) return std::nullopt;
  std::vector<double> out;
  for (auto item : split_list(*raw)) {
    double value = 0.0;
    if (!parse_number(item, value)) bad_value(key, "comma-separated real list", *raw);
    out.push_back(value);
  }
  return out;
}

std::string format_real(double value) {
  // Shortest representation that parses back to the same double.
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

std::string join_ints(const std::vector<int>& values) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(values[i]);
  }
  return out;
}

std::string join_reals(const std::vector<double>& values) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += format_real(values[i]);
  }
  return out;
}

}  // namespace auraseg
