#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "imk/exo.hpp"
#include "imk/linpoly.hpp"
#include "imk/vfield.hpp"

namespace imk::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

enum ExitCode { kPass = 0, kPropertyFailed = 1, kInvalidInput = 2, kNumericalFailure = 3 };

/// Entry point shared by the executable and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// ---------------------------------------------------------------------------
// File schemas

struct SystemSpec {
  std::string kind;  // "nonlinear" | "linear"
  AffineSystem sys;
  std::optional<LinSys> lin;
  std::vector<std::vector<double>> x0s;  // optional initial states
};

struct ExoSpec {
  Exosystem exo;
  std::vector<std::vector<double>> w0s;
};

/// Throws InvalidInput (with the offending key) on schema violations.
SystemSpec parse_system_spec(const json& j);
ExoSpec parse_exo_spec(const json& j);
json read_json_file(const std::string& path, std::string* raw = nullptr);

/// Rational from a JSON number (shortest round-trip decimal) or string.
Rational json_rational(const json& v, const std::string& what);

// ---------------------------------------------------------------------------
// Report helpers

std::string fnv1a64_hex(const std::string& bytes);
std::string utc_timestamp();
/// Writes via a temporary file in the same directory, then renames.
void write_atomic(const std::string& path, const std::string& content);
json grade_json(Grade g);
json complex_list(const std::vector<Complex>& v);
json matrix_json(const Eigen::MatrixXd& m);
/// Weakest grade over every "grade" key found in the report sections.
Grade overall_grade(const json& report);
/// Exit code as a function of the report content alone.
int exit_code_for(const json& report);

// ---------------------------------------------------------------------------
// Presets

struct Preset {
  std::string name;
  json system;
  json exo;
  std::string readme;
};

std::vector<std::string> preset_names();
/// Throws InvalidInput for an unknown name.
Preset preset(const std::string& name);

// ---------------------------------------------------------------------------
// Commands (each returns the report; exit code via exit_code_for)

struct AnalyzeSettings {
  double horizon = 50.0;
  double tol = 1e-6;
  int trials = 5;
  std::uint64_t seed = 0;
  double eps_stab = kEpsStab;
  std::string trace_dir;
};

json cmd_check(const std::string& sys_path, std::uint64_t seed);
json cmd_analyze(const std::string& sys_path, const std::string& exo_path,
                 const AnalyzeSettings& s);
json cmd_simulate(const std::string& sys_path, const std::string& exo_path,
                  const std::vector<double>& x0, const std::vector<double>& w0, double horizon,
                  int samples, const std::string& trace_path);
json cmd_extract_im(const std::string& sys_path, const std::string& exo_path, double eps_stab);
json cmd_embed(const std::string& path, double tol);
/// Writes the preset files into dir and returns a small report.
json cmd_example(const std::string& name, const std::string& dir);

}  // namespace imk::cli
