#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace gibbsym {

inline constexpr const char* kReportSchema = "v1";

struct CheckResult {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  std::string comparison;  // how statistic is compared with threshold, e.g. "<=" or ">"
  bool pass = false;
  // Advisory checks are reported but do not affect the overall verdict.
  bool advisory = false;
  double runtime_s = 0.0;
  nlohmann::ordered_json details = nlohmann::ordered_json::object();
};

struct Report {
  std::string suite;
  std::uint64_t seed = 0;
  nlohmann::ordered_json plan = nlohmann::ordered_json::object();
  std::vector<CheckResult> checks;
  std::string timestamp;

  bool all_pass() const;
  void add(CheckResult check);
  // Appends the checks of another report.
  void merge(const Report& other);
  nlohmann::ordered_json to_json() const;
  static Report from_json(const nlohmann::ordered_json& j);
  void write(const std::filesystem::path& path) const;
};

// Drops the fields that vary between identical runs (timestamp, runtimes).
nlohmann::ordered_json strip_timing(nlohmann::ordered_json report);

std::string utc_timestamp();

}  // namespace gibbsym
