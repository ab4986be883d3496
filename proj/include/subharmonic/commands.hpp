#pragma once

// Command implementations behind the `subharmonic` executable. Each command
// validates its whole configuration before computing anything and throws a
// subharmonic::Error subclass on failure; the executable maps those to exit
// codes.

#include "subharmonic/analysis.hpp"
#include "subharmonic/config.hpp"
#include "subharmonic/csv.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace subharmonic {

struct CommandContext {
  std::ostream* out = nullptr;  ///< CSV when no file is configured, plus summaries
  std::optional<std::string> out_dir;  ///< --out; overrides outputs.dir
  bool certify = false;
  int jobs = 1;
};

/// Truncation a run will use: explicit, or the sizing rule followed by
/// certification when requested.
ModeTruncation resolve_truncation(const ScenarioConfig& cfg, bool certify, double horizon);

/// Metadata comment lines: command, tool version, every config key, truncation.
std::vector<std::string> run_metadata(const std::string& command, const ScenarioConfig& cfg,
                                      const std::optional<ModeTruncation>& truncation);

ObservableTrace simulate_trace(const ScenarioConfig& cfg, const ModeTruncation& truncation);

/// Closed-form N_b(t): l = 1 up-conversion, l = 2 pair generation, otherwise
/// the small-time series (which needs beta = 0).
double analytic_n_b(const ScenarioConfig& cfg, double t);

void cmd_simulate(const ScenarioConfig& cfg, const CommandContext& ctx);
void cmd_analytic(const ScenarioConfig& cfg, const CommandContext& ctx);

struct CompareSummary {
  int k = 0;
  double n_a = 0.0;
  /// First time the relative difference exceeds 5%, if it does.
  std::optional<double> divergence_t;
  /// The same time times sqrt(C1), sqrt(C2) or sqrt(Cbar) for l = 1, 2, >= 3.
  std::optional<double> divergence_scaled_t;
  double max_rel_diff = 0.0;
};

/// Numeric vs closed form. The fig1a/fig1b presets run k = 1, 2, 3.
std::vector<CompareSummary> cmd_compare(const ScenarioConfig& cfg, const CommandContext& ctx);

struct SweepPoint {
  int k = 0;
  double n_a = 0.0;
  std::optional<GrowthFit> fit;
  ModeTruncation truncation;
  std::string error;
};

struct SweepSummary {
  std::vector<SweepPoint> points;
  std::vector<std::pair<int, ScalingResult>> exponents;  ///< per k with >= 3 fitted points
  std::size_t failures = 0;
};

/// Growth-rate fits over sweep.k x sweep.n_a (l = 2), run on up to ctx.jobs
/// threads. Individual failures are recorded; more than 20% failing throws FitError.
SweepSummary cmd_sweep(const ScenarioConfig& cfg, const CommandContext& ctx);

void cmd_constants(std::optional<double> density, std::ostream& out);

}  // namespace subharmonic
