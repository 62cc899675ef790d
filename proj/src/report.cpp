#include "gibbsym/report.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace gibbsym {

bool Report::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass && !c.advisory) return false;
  return true;
}

void Report::add(CheckResult check) {
  for (const auto& c : checks)
    if (c.name == check.name) throw std::logic_error("duplicate check name " + check.name);
  checks.push_back(std::move(check));
}

void Report::merge(const Report& other) {
  for (const auto& c : other.checks) add(c);
}

nlohmann::ordered_json Report::to_json() const {
  nlohmann::ordered_json j;
  j["schema"] = kReportSchema;
  j["suite"] = suite;
  j["seed"] = seed;
  j["timestamp"] = timestamp;
  j["plan"] = plan;
  auto& arr = j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    nlohmann::ordered_json e;
    e["name"] = c.name;
    e["statistic"] = c.statistic;
    e["threshold"] = c.threshold;
    e["comparison"] = c.comparison;
    e["pass"] = c.pass;
    e["advisory"] = c.advisory;
    e["runtime_s"] = c.runtime_s;
    e["details"] = c.details;
    arr.push_back(std::move(e));
  }
  j["all_pass"] = all_pass();
  return j;
}

Report Report::from_json(const nlohmann::ordered_json& j) {
  if (j.value("schema", "") != kReportSchema) throw std::runtime_error("unsupported report schema");
  Report r;
  r.suite = j.value("suite", "");
  r.seed = j.value("seed", std::uint64_t{0});
  r.timestamp = j.value("timestamp", "");
  r.plan = j.value("plan", nlohmann::ordered_json::object());
  for (const auto& e : j.at("checks")) {
    CheckResult c;
    c.name = e.at("name").get<std::string>();
    // Infinite statistics are serialized as null.
    c.statistic = e.at("statistic").is_null() ? std::numeric_limits<double>::infinity() : e.at("statistic").get<double>();
    c.threshold = e.at("threshold").is_null() ? std::numeric_limits<double>::infinity() : e.at("threshold").get<double>();
    c.comparison = e.value("comparison", "");
    c.pass = e.at("pass").get<bool>();
    c.advisory = e.value("advisory", false);
    c.runtime_s = e.value("runtime_s", 0.0);
    c.details = e.value("details", nlohmann::ordered_json::object());
    r.checks.push_back(std::move(c));
  }
  return r;
}

void Report::write(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json().dump(2) << "\n";
}

nlohmann::ordered_json strip_timing(nlohmann::ordered_json report) {
  report.erase("timestamp");
  if (report.contains("checks"))
    for (auto& c : report["checks"]) c.erase("runtime_s");
  return report;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace gibbsym
