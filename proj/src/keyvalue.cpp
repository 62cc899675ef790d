#include "gibbsym/keyvalue.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gibbsym {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text, std::filesystem::path base_dir) {
  KeyValueFile out;
  out.base_dir_ = std::move(base_dir);
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw std::runtime_error("line " + std::to_string(line_no) + ": empty key");
    out.values_[key] = trim(line.substr(eq + 1));
  }
  return out;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse(buf.str(), path.parent_path());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

std::optional<std::string> KeyValueFile::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueFile::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(*v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v->size()) throw std::runtime_error("key " + key + ": not a number: " + *v);
  return out;
}

long long KeyValueFile::get_int(const std::string& key, long long fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(*v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v->size()) throw std::runtime_error("key " + key + ": not an integer: " + *v);
  return out;
}

std::optional<std::filesystem::path> KeyValueFile::get_path(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  std::filesystem::path p(*v);
  if (p.is_relative() && !base_dir_.empty()) p = base_dir_ / p;
  return p;
}

}  // namespace gibbsym
