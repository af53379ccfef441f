#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "sspec/cli.hpp"

using namespace sspec;
using cli::validate;
using cli::Validation;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({
  "command": "spectrum",
  "base": {"type": "finite_periodic"},
  "generator": {"type": "constant", "matrix": [[2.0, 0.0], [0.0, 0.5]]}
})";

std::string with_scan(const std::string& scan) {
  return std::string(R"({
  "command": "spectrum",
  "base": {"type": "finite_periodic"},
  "generator": {"type": "constant", "matrix": [[2.0, 0.0], [0.0, 0.5]]},
  "scan": )") + scan + "\n}";
}

bool any_error_contains(const Validation& v, const std::string& needle) {
  return std::any_of(v.errors.begin(), v.errors.end(),
                     [&](const cli::ConfigError& e) { return e.format().find(needle) != std::string::npos; });
}

// Plain recursive Levenshtein distance, memo-free; fine for short keys.
std::size_t lev(const std::string& a, const std::string& b) {
  if (a.empty()) return b.size();
  if (b.empty()) return a.size();
  const std::string ra = a.substr(1), rb = b.substr(1);
  if (a[0] == b[0]) return lev(ra, rb);
  return 1 + std::min({lev(ra, b), lev(a, rb), lev(ra, rb)});
}

int run_tool(const std::string& args) {
  const std::string cmd = std::string(SSPEC_TOOL_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config(const std::string& name) { return std::string(SSPEC_CONFIG_DIR) + "/" + name + ".json"; }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sspec_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("minimal spectrum config validates") {
  const auto v = validate(kMinimal);
  CHECK(v.errors.empty());
  REQUIRE(v.config.has_value());
  CHECK(v.config->command == "spectrum");
  CHECK(v.config->seed == 1);
}

TEST_CASE("grid step 0 is rejected") {
  const auto v = validate(with_scan(R"({"grid_step": 0})"));
  CHECK_FALSE(v.config.has_value());
  CHECK(any_error_contains(v, "grid step must be > 0"));
}

TEST_CASE("unknown key names the nearest valid key") {
  const auto v = validate(with_scan(R"({"gridd": 0.02})"));
  CHECK_FALSE(v.config.has_value());
  const std::vector<std::string> keys = {"grid_step", "tolerance", "n_max", "margin", "lambda_min",
                                         "floor", "interval_budget", "norm_budget", "p_max", "recheck"};
  std::string nearest = keys[0];
  for (const auto& k : keys)
    if (lev("gridd", k) < lev("gridd", nearest)) nearest = k;
  CHECK(nearest == "grid_step");
  CHECK(any_error_contains(v, "unknown key 'gridd'"));
  CHECK(any_error_contains(v, "'" + nearest + "'"));
  for (const auto& [a, b] : std::vector<std::pair<std::string, std::string>>{
           {"gridd", "grid_step"}, {"kitten", "sitting"}, {"", "abc"}, {"seed", "seed"}})
    CHECK(cli::edit_distance(a, b) == lev(a, b));
}

TEST_CASE("errors are aggregated and line anchored") {
  const std::string text = R"({
  "command": "spectrum",
  "base": {"type": "finite_periodic", "period": 0},
  "generator": {"type": "constant", "matrix": [[2.0, 0.0], [0.0, 0.5]]},
  "scan": {"grid_step": -1, "tolerance": 0},
  "colour": 1
})";
  const auto v = validate(text);
  CHECK_FALSE(v.config.has_value());
  CHECK(v.errors.size() >= 4);
  bool period_line = false, grid_line = false;
  for (const auto& e : v.errors) {
    if (e.pointer == "/base/period") period_line = e.line == 3;
    if (e.pointer == "/scan/grid_step") grid_line = e.line == 5;
  }
  CHECK(period_line);
  CHECK(grid_line);
  CHECK(v.errors.front().format().rfind("line ", 0) == 0);
}

TEST_CASE("malformed JSON and missing sections") {
  auto v = validate("{\"command\": ");
  CHECK_FALSE(v.config.has_value());
  CHECK_FALSE(v.errors.empty());
  v = validate(R"({"command": "spectrum"})");
  CHECK(any_error_contains(v, "base"));
  CHECK(any_error_contains(v, "generator"));
  v = validate(R"({"command": "selftest"})");
  CHECK(v.errors.empty());
}

TEST_CASE("overrides replace command and seed") {
  const auto v = validate(kMinimal, std::string("lyapunov"), 42);
  REQUIRE(v.config.has_value());
  CHECK(v.config->command == "lyapunov");
  CHECK(v.config->seed == 42);
  CHECK_FALSE(validate(kMinimal, std::string("plot")).config.has_value());
}

TEST_CASE("line index") {
  const auto idx = cli::line_index(kMinimal);
  CHECK(idx.at("/command") == 2);
  CHECK(idx.at("/generator/matrix/1/1") == 4);
}

TEST_CASE("exit status contract") {
  CHECK(run_tool("--config " + config("selftest") + " --out " + scratch("selftest").string()) == cli::kExitOk);
  CHECK(run_tool("--config " + config("diag_constant") + " --out " + scratch("diag").string()) == cli::kExitOk);
  CHECK(run_tool("--config " + config("scalar_shift_corrupted") + " --out " + scratch("bad").string()) ==
        cli::kExitVerificationFailed);

  const fs::path broken = scratch("broken_cfg");
  fs::create_directories(broken);
  std::ofstream(broken / "c.json") << with_scan(R"({"grid_step": 0})");
  CHECK(run_tool("--config " + (broken / "c.json").string() + " --out " + (broken / "out").string()) ==
        cli::kExitConfigError);
  CHECK(run_tool("--config " + config("diag_constant") + " --command nope") == cli::kExitConfigError);
}

TEST_CASE("report contents and traces") {
  const fs::path out = scratch("report");
  REQUIRE(run_tool("--config " + config("diag_constant") + " --out " + out.string()) == 0);
  const auto rep = read_json(out / "report.json");
  for (const char* k : {"tool", "version", "command", "seed", "config_hash", "result", "warnings", "exit_code",
                        "timings"})
    CHECK(rep.contains(k));
  CHECK(rep.at("version") == cli::kVersion);
  CHECK(rep.at("config_hash").get<std::string>().rfind("fnv1a64:", 0) == 0);
  CHECK(fs::exists(out / "trace_scan.csv"));
  CHECK_FALSE(cli::hashable(rep).contains("timings"));
}

TEST_CASE("identical configs give identical result documents") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  REQUIRE(run_tool("--config " + config("scalar_shift") + " --out " + a.string()) == 0);
  REQUIRE(run_tool("--config " + config("scalar_shift") + " --out " + b.string()) == 0);
  CHECK(cli::hashable(read_json(a / "report.json")).dump() == cli::hashable(read_json(b / "report.json")).dump());

  // In-process run matches the tool.
  std::ifstream in(config("scalar_shift"));
  std::stringstream text;
  text << in.rdbuf();
  const auto v = validate(text.str());
  REQUIRE(v.config.has_value());
  const auto rep = cli::run(*v.config);
  CHECK(cli::hashable(rep.document).at("result") == read_json(a / "report.json").at("result"));
}

TEST_CASE("fnv1a") {
  // Published FNV-1a 64-bit test vectors.
  CHECK(cli::fnv1a_hex("") == "cbf29ce484222325");
  CHECK(cli::fnv1a_hex("a") == "af63dc4c8601ec8c");
}

}  // TEST_SUITE
