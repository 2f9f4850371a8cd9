#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <iostream>

#include "robin/config.hpp"
#include "robin/runner.hpp"

using namespace robin;

namespace {

int cmd_run(const std::string& path) {
  const RunConfig cfg = load_config(path);
  const int threads = thread_budget();
  const auto out = run_experiment(cfg, std::cout, threads);
  for (const auto& a : out.assertions)
    std::cout << fmt::format("{} {}: {}\n", a.pass ? "PASS" : "FAIL", a.name, a.detail);
  std::cout << "results in " << out.dir.string() << '\n';
  return out.exit_code;
}

int cmd_check(std::uint64_t seed) {
  const auto results = check_suite(seed, thread_budget());
  for (const auto& r : results) std::cerr << fmt::format("{:<28} {:.2f} s\n", r.name, r.seconds);
  std::cout << check_summary(seed, results);
  const bool ok = std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.pass; });
  return ok ? kExitOk : kExitFailed;
}

int cmd_report(const std::string& dir) {
  const auto v = verify_report(dir);
  for (const auto& l : v.lines) std::cout << l << '\n';
  std::cout << (v.ok ? "report verified\n" : "report has problems\n");
  return v.ok ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robin p-Laplacian laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("config", config_path, "config file")->required();

  std::uint64_t seed = 0;
  auto* check = app.add_subcommand("check", "run the seeded property checks");
  check->add_option("--seed", seed, "random seed");

  std::string results_dir;
  auto* report = app.add_subcommand("report", "verify the artifacts listed in a results directory");
  report->add_option("results-dir", results_dir, "results/<name> directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run) return cmd_run(config_path);
    if (*check) return cmd_check(seed);
    return cmd_report(results_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailed;
  }
}
