// Command-line front end: `proxsplit run <config>` and `proxsplit selftest`.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "proxsplit/run_spec.hpp"
#include "proxsplit/selftest.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kSolverFailure = 1;
constexpr int kUsage = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proximal splitting solvers and a prior-image CT reconstruction harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "Run every configured solver and write results");
  run->add_option("config", config_path, "Run configuration (key = value lines)")->required();
  run->add_option("--out", out_dir, "Output directory (overrides run.out)");
  run->add_option("--seed", seed, "Scene seed (overrides scene.seed)");

  bool mutate_prox = false;
  auto* selftest = app.add_subcommand("selftest", "Check the core invariants");
  selftest->add_flag("--mutate-prox", mutate_prox, "Use a deliberately broken l1 prox");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (selftest->parsed()) {
    return proxsplit::run_selftest(std::cout, proxsplit::SelftestOptions{mutate_prox}) == 0
               ? kOk
               : kSolverFailure;
  }

  proxsplit::cli::RunSpec spec;
  try {
    spec = proxsplit::cli::load_run_spec(config_path);
  } catch (const proxsplit::cli::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  if (out_dir) spec.out_dir = *out_dir;
  if (seed) spec.scene.seed = *seed;

  try {
    return proxsplit::cli::execute_run(spec, std::cout) == 0 ? kOk : kSolverFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverFailure;
  }
}
