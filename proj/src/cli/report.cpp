#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "imk/cli.hpp"
#include "imk/error.hpp"

namespace imk::cli {

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw InvalidInput("cannot write " + tmp.string());
    f << content;
    if (!f.flush()) throw InvalidInput("cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw InvalidInput("cannot rename report into place: " + ec.message());
  }
}

json grade_json(Grade g) { return std::string(to_string(g)); }

json complex_list(const std::vector<Complex>& v) {
  json out = json::array();
  for (const Complex& c : v) out.push_back(json::array({c.real(), c.imag()}));
  return out;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

namespace {

void collect(const json& j, Grade& g) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (k == "grade" && v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "Sampled") g = weakest(g, Grade::Sampled);
        else if (s == "Unknown") g = weakest(g, Grade::Unknown);
        else if (s == "Failed") g = weakest(g, Grade::Failed);
      } else {
        collect(v, g);
      }
    }
  } else if (j.is_array()) {
    for (const auto& v : j) collect(v, g);
  }
}

}  // namespace

Grade overall_grade(const json& report) {
  Grade g = Grade::Proven;
  if (report.contains("sections")) collect(report.at("sections"), g);
  return g;
}

int exit_code_for(const json& report) {
  if (report.contains("error")) {
    const std::string kind = report.at("error").value("kind", "");
    if (kind == "invalid_input") return kInvalidInput;
    if (kind == "numerical_failure") return kNumericalFailure;
    if (kind == "property_failed") return kPropertyFailed;
  }
  if (report.contains("overall_grade") && report.at("overall_grade") == "Failed")
    return kPropertyFailed;
  return kPass;
}

}  // namespace imk::cli
