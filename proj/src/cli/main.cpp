#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "sspec/cli.hpp"
#include "sspec/error.hpp"

namespace sspec::cli {

int main(int argc, char** argv) {
  CLI::App app{"Lyapunov and Sacker-Sell spectra of linear cocycles"};
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> command;
  app.add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (default: config output.dir)");
  app.add_option("--seed", seed, "overrides the config seed");
  app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 256));
  app.add_option("--command", command, "overrides the config command")
      ->check(CLI::IsMember({"lyapunov", "spectrum", "quasicompact", "verify-jps", "selftest"}));
  app.set_version_flag("--version", std::string(kVersion));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfigError;
  }

  std::ifstream in(config_path);
  std::stringstream text;
  text << in.rdbuf();
  Validation v = validate(text.str(), command, seed);
  if (!v.config) {
    for (const auto& e : v.errors) std::cerr << config_path << ": " << e.format() << "\n";
    std::cerr << "config_error: " << v.errors.size() << " problem(s)\n";
    return kExitConfigError;
  }
  ExperimentConfig& cfg = *v.config;
  if (threads) {
    cfg.scan.threads = *threads;
    cfg.jps.threads = *threads;
  }
  if (!out_dir.empty()) cfg.out_dir = out_dir;

  RunReport report;
  try {
    report = run(cfg);
  } catch (const Error& e) {
    std::cerr << to_string(e.code()) << ": " << e.what() << "\n";
    return kExitConfigError;
  }

  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  for (const auto& [name, contents] : report.files) {
    const auto path = std::filesystem::path(cfg.out_dir) / name;
    std::ofstream f(path, std::ios::binary);
    f << contents;
    if (!f) {
      std::cerr << "io_error: cannot write " << path.string() << "\n";
      return kExitConfigError;
    }
  }
  for (const auto& w : report.document["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
  std::cout << report.document["command"].get<std::string>() << ": "
            << (report.exit_code == kExitOk ? "ok" : "verification failed") << " ("
            << (std::filesystem::path(cfg.out_dir) / "report.json").string() << ")\n";
  return report.exit_code;
}

}  // namespace sspec::cli
