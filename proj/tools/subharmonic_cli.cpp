// subharmonic: simulate, compare and sweep sub/superharmonic generation
// between two coupled bosonic modes. See README.md for the config schema.

#include "subharmonic/commands.hpp"
#include "subharmonic/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace subharmonic;

  CLI::App app{"Sub/superharmonic generation between two coupled bosonic modes"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kToolVersion));

  std::optional<std::string> config_path;
  std::optional<std::string> preset;
  std::optional<std::string> out_dir;
  std::optional<double> density;
  bool certify = false;
  int jobs = 1;

  app.add_option("--config", config_path, "Scenario file (section.key = value lines)");
  app.add_option("--preset", preset, "Built-in scenario: fig1a, fig1b, positronium");
  app.add_option("--out", out_dir, "Directory for CSV output (default: stdout)");
  app.add_flag("--certify", certify, "Certify automatic truncations by enlargement");
  app.add_option("--jobs", jobs, "Concurrent sweep points")->check(CLI::PositiveNumber);

  auto* simulate = app.add_subcommand("simulate", "Numerical trace of all observables");
  auto* analytic = app.add_subcommand("analytic", "Closed-form n_b(t) on the same grid");
  auto* compare = app.add_subcommand("compare", "Numeric vs closed form, with divergence time");
  auto* sweep = app.add_subcommand("sweep", "Growth-rate fits over sweep.n_a and sweep.k");
  auto* constants = app.add_subcommand("constants", "Physical constants and the Dirac gain");
  constants->add_option("--density", density, "Pair density in cm^-3")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kValidation);
  }

  try {
    if (constants->parsed()) {
      cmd_constants(density, std::cout);
      return 0;
    }
    const auto cfg = load_scenario(config_path, preset);
    CommandContext ctx;
    ctx.out = &std::cout;
    ctx.out_dir = out_dir;
    ctx.certify = certify;
    ctx.jobs = jobs;
    if (simulate->parsed()) {
      cmd_simulate(cfg, ctx);
    } else if (analytic->parsed()) {
      cmd_analytic(cfg, ctx);
    } else if (compare->parsed()) {
      cmd_compare(cfg, ctx);
    } else if (sweep->parsed()) {
      const auto summary = cmd_sweep(cfg, ctx);
      for (const auto& [k, result] : summary.exponents) {
        std::cerr << "k=" << k << " exponent=" << format_number(result.exponent) << '\n';
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
