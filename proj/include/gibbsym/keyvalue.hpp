#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace gibbsym {

// Flat `key = value` text. `#` starts a comment; blank lines are ignored.
class KeyValueFile {
 public:
  KeyValueFile() = default;
  static KeyValueFile parse(const std::string& text, std::filesystem::path base_dir = {});
  static KeyValueFile load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  // Resolves a path value relative to the directory of the source file.
  std::optional<std::filesystem::path> get_path(const std::string& key) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }
  const std::filesystem::path& base_dir() const { return base_dir_; }

 private:
  std::map<std::string, std::string> values_;
  std::filesystem::path base_dir_;
};

}  // namespace gibbsym
