#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sspec/base_dynamics.hpp"
#include "sspec/cocycle.hpp"
#include "sspec/jps.hpp"
#include "sspec/quasicompactness.hpp"
#include "sspec/spectrum.hpp"

namespace sspec::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitVerificationFailed = 1, kExitConfigError = 2 };

struct ConfigError {
  std::string pointer;  // JSON pointer of the offending value ("" for the root)
  int line = 0;         // 1-based, 0 when unknown
  std::string message;

  std::string format() const;
};

struct LasotaYorkeSettings {
  double alpha = 0.5;
  double beta = 1.0;
  double gamma = 1.0;
  VectorNorm strong;
  VectorNorm weak;
  int test_vectors = 20;
};

/// A validated experiment: every object the commands need, built once.
struct ExperimentConfig {
  nlohmann::json document;  // the parsed input
  std::string command;
  std::uint64_t seed = 1;
  std::optional<BaseSystem> base;
  std::optional<Cocycle> cocycle;
  std::optional<NoncompactnessModel> model;
  MeasureFamily family;
  ScanConfig scan;
  int lyapunov_n_max = 512;
  double lyapunov_resolution = 0.05;
  JpsConfig jps;
  int quasicompact_n_max = 32;
  double quasicompact_tolerance = 1e-6;
  std::optional<LasotaYorkeSettings> lasota_yorke;
  std::string out_dir = "out";
  bool traces = true;
};

struct Validation {
  std::optional<ExperimentConfig> config;
  std::vector<ConfigError> errors;  // every problem found, in document order
};

/// Full validation of a config text. Overrides replace the document's
/// "command" and "seed" before checking.
Validation validate(const std::string& text, const std::optional<std::string>& command = std::nullopt,
                    const std::optional<std::uint64_t>& seed = std::nullopt);

/// JSON pointer -> 1-based line of the value, for every value in the text.
std::map<std::string, int> line_index(const std::string& text);

std::size_t edit_distance(const std::string& a, const std::string& b);

struct RunReport {
  nlohmann::json document;   // {tool, version, config_hash, command, result, warnings, timings}
  int exit_code = kExitOk;
  std::map<std::string, std::string> files;  // file name -> contents
};

/// Dispatches the configured command. Never throws for verification
/// failures; those set exit_code = 1.
RunReport run(const ExperimentConfig& cfg);

/// The deterministic part of a report (everything except timings).
nlohmann::json hashable(const nlohmann::json& report);

std::string fnv1a_hex(const std::string& text);

/// Command-line entry: flags --config --out --seed --threads --command.
int main(int argc, char** argv);

}  // namespace sspec::cli
