// gmhd2d: kernel validation, symbol tables, simulation runs and offline diagnostics.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "gmhd/gmhd.hpp"

int main(int argc, char** argv) {
  CLI::App app{"2D MHD with nonlocal velocity dissipation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  double kappa_max = 0.0;
  std::vector<std::string> snapshots;

  auto* validate = app.add_subcommand("validate-kernel", "check the kernel profile's admissibility");
  validate->add_option("--config", config_path, "run configuration (TOML)")->required();

  auto* symbol = app.add_subcommand("symbol", "print kappa,sigma for the grid's wavenumber magnitudes");
  symbol->add_option("--config", config_path, "run configuration (TOML)")->required();
  auto* kmax = symbol->add_option("--kappa-max", kappa_max, "largest magnitude to print");

  auto* run = app.add_subcommand("run", "run a simulation");
  run->add_option("--config", config_path, "run configuration (TOML)")->required();
  run->add_option("--out", out_dir, "output directory (overrides output.dir)");

  auto* diag = app.add_subcommand("diag", "recompute diagnostics from snapshots");
  diag->add_option("--config", config_path, "run configuration (TOML)")->required();
  diag->add_option("snapshots", snapshots, "snapshot files, in time order")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gmhd::kExitError;
  }

  try {
    const gmhd::RunConfig cfg = gmhd::parse_config(config_path);
    if (*validate) return gmhd::cmd_validate_kernel(cfg, std::cout);
    if (*symbol) {
      const auto limit = *kmax ? std::optional<double>(kappa_max) : std::nullopt;
      return gmhd::cmd_symbol(cfg, limit, std::cout);
    }
    if (*run) return gmhd::cmd_run(cfg, out_dir.empty() ? cfg.output_dir : out_dir, std::cout, std::cerr);
    if (*diag) return gmhd::cmd_diag(cfg, snapshots, std::cout);
  } catch (const gmhd::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return gmhd::kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return gmhd::kExitError;
  }
  return gmhd::kExitError;
}
