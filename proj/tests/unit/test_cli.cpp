#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "imk/cli.hpp"

using namespace imk;
using cli::json;
namespace fs = std::filesystem;

namespace {

fs::path workdir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "imk_cli_tests";
    fs::create_directories(d);
    for (const auto& n : cli::preset_names()) cli::cmd_example(n, d.string());
    std::ofstream(d / "noniform.json")
        << R"({"schema_version": 1, "kind": "nonlinear", "state_dim": 1,
               "f": ["0"], "g": ["x1"], "h": "x1"})";
    std::ofstream(d / "bad.json") << R"({"schema_version": 1, "kind": )";
    std::ofstream(d / "nonadapting.json")
        << R"({"schema_version": 1, "kind": "nonlinear", "state_dim": 1,
               "f": ["-x1"], "g": ["1"], "h": "x1", "x0": [[0]]})";
    std::ofstream(d / "constants.json") << R"({"schema_version": 1, "kind": "constant", "w0": [[1]]})";
    std::ofstream(d / "embed_ok.json")
        << R"({"schema_version": 1, "Q": [[0, 1], [-4, 0]], "theta": [1, 0],
               "F": [[0, 1, 0], [-4, 0, 0], [0, 0, -1]], "phi": [1, 0, 1]})";
    std::ofstream(d / "embed_bad.json")
        << R"({"schema_version": 1, "Q": [[0]], "theta": [1], "F": [[-1]], "phi": [1]})";
    return d;
  }();
  return dir;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

struct Outcome {
  int code;
  json report;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  json r;
  if (!out.str().empty() && out.str()[0] == '{') r = json::parse(out.str());
  return {code, r, err.str()};
}

int spawn(const std::string& args) {
  const std::string cmd = std::string(IMK_BINARY) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Numbers within 1e-9 (relative for large magnitudes), everything else
// exact; the timestamp is ignored.
void compare(const json& got, const json& want, const std::string& where) {
  if (want.is_number() && got.is_number()) {
    const double a = got.get<double>(), b = want.get<double>();
    EXPECT_LE(std::abs(a - b), 1e-9 * std::max(1.0, std::abs(b))) << where;
    return;
  }
  ASSERT_EQ(got.type(), want.type()) << where;
  if (want.is_object()) {
    ASSERT_EQ(got.size(), want.size()) << where;
    for (const auto& [k, v] : want.items()) {
      if (k == "timestamp") continue;
      ASSERT_TRUE(got.contains(k)) << where << "." << k;
      compare(got.at(k), v, where + "." + k);
    }
  } else if (want.is_array()) {
    ASSERT_EQ(got.size(), want.size()) << where;
    for (std::size_t i = 0; i < want.size(); ++i)
      compare(got[i], want[i], where + "[" + std::to_string(i) + "]");
  } else {
    EXPECT_EQ(got, want) << where;
  }
}

}  // namespace

TEST(Cli, Version) {
  std::ostringstream out, err;
  EXPECT_EQ(cli::run({"--version"}, out, err), 0);
  EXPECT_EQ(out.str(), std::string("imk ") + cli::kVersion + "\n");
  EXPECT_EQ(spawn("--version"), 0);
}

TEST(Cli, CheckEcoli) {
  const Outcome r = run({"check", path("ecoli.system.json")});
  EXPECT_EQ(r.code, 0);
  const json& s = r.report["sections"];
  EXPECT_EQ(s["relative_degree"]["r"], 1);
  EXPECT_EQ(s["assumptions"]["completeness"]["grade"], "Proven");
  EXPECT_EQ(s["assumptions"]["commutativity"]["grade"], "Proven");
  EXPECT_FALSE(r.report["warnings"].empty());
}

TEST(Cli, CheckExitCodes) {
  EXPECT_EQ(run({"check", path("noniform.json")}).code, 1);
  EXPECT_EQ(run({"check", path("noniform.json")}).report["sections"]["relative_degree"]["status"],
            "no-uniform");
  const Outcome bad = run({"check", path("bad.json")});
  EXPECT_EQ(bad.code, 2);
  EXPECT_EQ(bad.report["error"]["kind"], "invalid_input");
  EXPECT_EQ(run({"check", path("missing.json")}).code, 2);
  EXPECT_EQ(run({"check"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(spawn("check " + path("ecoli.system.json")), 0);
  EXPECT_EQ(spawn("check " + path("noniform.json")), 1);
  EXPECT_EQ(spawn("check " + path("bad.json")), 2);
}

TEST(Cli, SchemaViolationsNameTheKey) {
  std::ofstream(workdir() / "nover.json") << R"({"kind": "linear", "state_dim": 1})";
  const Outcome r = run({"check", path("nover.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.report["error"]["message"].get<std::string>().find("schema_version"), std::string::npos);
  std::ofstream(workdir() / "badexpr.json")
      << R"({"schema_version": 1, "kind": "nonlinear", "state_dim": 1, "f": ["x1 +"], "g": ["1"], "h": "x1"})";
  EXPECT_EQ(run({"check", path("badexpr.json")}).code, 2);
}

TEST(Cli, AnalyzeEcoli) {
  const Outcome r = run({"analyze", path("ecoli.system.json"), path("ecoli.exo.json")});
  EXPECT_EQ(r.code, 0);
  const json& im = r.report["sections"]["internal_model"];
  EXPECT_EQ(im["normal_form"]["z2"][0], "x1 + x2");
  EXPECT_EQ(im["normal_form"]["f2"][0], "zeta1");
  EXPECT_EQ(im["output"]["phi"], "1/2*z2_1 - 3/2");
  EXPECT_TRUE(im["reproduction"]["pass"].get<bool>());
  EXPECT_EQ(r.report["settings"]["horizon"], 50.0);
  EXPECT_EQ(r.report["settings"]["seed"], 0);
}

TEST(Cli, AnalyzeLinearHarmonic) {
  const Outcome r = run({"analyze", path("linear-harmonic.system.json"), path("linear-harmonic.exo.json")});
  EXPECT_EQ(r.code, 0);
  const json& im = r.report["sections"]["internal_model"];
  EXPECT_EQ(im["linear"]["pi"]["text"], "s^2 + 4");
  EXPECT_EQ(im["linear"]["internal_model"]["grade"], "Proven");
  EXPECT_LT(im["embedding"]["residual_FT"].get<double>(), 1e-8);
  EXPECT_LT(im["embedding"]["residual_phi"].get<double>(), 1e-8);
}

TEST(Cli, AnalyzeNonadaptingSkipsInternalModel) {
  const Outcome r = run({"analyze", path("nonadapting.json"), path("constants.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.report["sections"]["adaptation"]["grade"], "Failed");
  EXPECT_EQ(r.report["sections"]["internal_model"]["skipped"], "adaptation failed");
  EXPECT_EQ(r.report["failed_stage"], "adaptation");
}

TEST(Cli, ReportAndTracesWritten) {
  const fs::path traces = workdir() / "traces";
  fs::remove_all(traces);
  const std::string report = path("ecoli.report.json");
  const Outcome r = run({"analyze", path("ecoli.system.json"), path("ecoli.exo.json"), "--trace-dir",
                     traces.string(), "--report", report, "--horizon", "40"});
  EXPECT_EQ(r.code, 0);
  const json rep = cli::read_json_file(report);
  EXPECT_EQ(rep["settings"]["horizon"], 40.0);
  EXPECT_TRUE(fs::exists(traces / "trial_0.csv"));
  std::ifstream f(traces / "trial_0.csv");
  std::string header;
  std::getline(f, header);
  EXPECT_EQ(header, "t,x1,x2,w1,u,y");
  EXPECT_FALSE(fs::exists(report + ".tmp"));
}

TEST(Cli, SimulateWritesTrace) {
  const std::string trace = path("sim.csv");
  const Outcome r = run({"simulate", path("ecoli.system.json"), path("ecoli.exo.json"), "--x0", "1,1",
                     "--w0", "1", "--horizon", "60", "--samples", "300", "--trace", trace});
  EXPECT_EQ(r.code, 0);
  const json& s = r.report["sections"]["simulation"];
  EXPECT_EQ(s["points"], 301);
  EXPECT_NEAR(s["final_x"][0].get<double>(), 2.0, 1e-6);
  EXPECT_NEAR(s["final_x"][1].get<double>(), 3.0, 1e-6);
  EXPECT_TRUE(fs::exists(trace));
  EXPECT_EQ(run({"simulate", path("ecoli.system.json"), path("ecoli.exo.json"), "--x0", "1,1,1"}).code, 2);
}

TEST(Cli, ExtractIm) {
  const Outcome r = run({"extract-im", path("linear-integrator.system.json"), path("linear-integrator.exo.json")});
  EXPECT_EQ(r.code, 0);
  const json& lin = r.report["sections"]["internal_model"]["linear"];
  EXPECT_EQ(lin["internal_model"]["p0"]["text"], "s + 3");
  EXPECT_EQ(lin["feedback"]["a"]["text"], "s + 4");
  EXPECT_EQ(lin["feedback"]["b"]["text"], "2*s + 8");
  EXPECT_TRUE(lin["feedback"]["round_trip"].get<bool>());
}

TEST(Cli, Embed) {
  const Outcome ok = run({"embed", path("embed_ok.json")});
  EXPECT_EQ(ok.code, 0);
  EXPECT_LT(ok.report["sections"]["embedding"]["residual_FT"].get<double>(), 1e-10);
  const Outcome bad = run({"embed", path("embed_bad.json")});
  EXPECT_EQ(bad.code, 1);
  EXPECT_EQ(bad.report["sections"]["embedding"]["grade"], "Failed");
}

TEST(Cli, Example) {
  const fs::path d = workdir() / "ex";
  EXPECT_EQ(run({"example", "ecoli", "--dir", d.string()}).code, 0);
  const json sys = cli::read_json_file((d / "ecoli.system.json").string());
  EXPECT_EQ(sys["f"][0], "a1 - a2*x1 + a3*x2");
  EXPECT_EQ(sys["params"]["a4"], 1.0);
  EXPECT_TRUE(fs::exists(d / "ecoli.README.md"));
  EXPECT_EQ(run({"example", "nope"}).code, 2);
}

TEST(Cli, ExitCodeIsFunctionOfReport) {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"check", path("ecoli.system.json")},
           {"check", path("noniform.json")},
           {"check", path("bad.json")},
           {"analyze", path("nonadapting.json"), path("constants.json")},
           {"embed", path("embed_bad.json")}}) {
    const Outcome r = run(args);
    EXPECT_EQ(r.code, cli::exit_code_for(r.report)) << args[0];
  }
  json numeric = {{"sections", json::object()}, {"error", {{"kind", "numerical_failure"}}}};
  EXPECT_EQ(cli::exit_code_for(numeric), 3);
}

TEST(Cli, GradesAggregateToWeakest) {
  json r = {{"sections",
             {{"a", {{"grade", "Proven"}}}, {"b", {{"inner", {{"grade", "Sampled"}}}}}}}};
  EXPECT_EQ(cli::overall_grade(r), Grade::Sampled);
  r["sections"]["c"] = {{"list", {{{"grade", "Unknown"}}}}};
  EXPECT_EQ(cli::overall_grade(r), Grade::Unknown);
}

TEST(Cli, Digest) {
  // FNV-1a 64 reference values.
  EXPECT_EQ(cli::fnv1a64_hex(""), "cbf29ce484222325");
  EXPECT_EQ(cli::fnv1a64_hex("a"), "af63dc4c8601ec8c");
}

class Golden : public ::testing::TestWithParam<std::string> {};

TEST_P(Golden, AnalyzeReportMatches) {
  const std::string name = GetParam();
  const json got =
      cli::cmd_analyze(path(name + ".system.json"), path(name + ".exo.json"), cli::AnalyzeSettings{});
  const fs::path golden = fs::path(IMK_GOLDEN_DIR) / (name + ".json");
  if (std::getenv("IMK_UPDATE_GOLDEN")) {
    std::ofstream(golden) << got.dump(2) << "\n";
    GTEST_SKIP() << "golden file rewritten";
  }
  ASSERT_TRUE(fs::exists(golden)) << golden;
  compare(got, cli::read_json_file(golden.string()), name);
}

INSTANTIATE_TEST_SUITE_P(Presets, Golden,
                         ::testing::Values("ecoli", "linear-integrator", "linear-harmonic"),
                         [](const auto& info) {
                           std::string s = info.param;
                           for (char& c : s)
                             if (c == '-') c = '_';
                           return s;
                         });
