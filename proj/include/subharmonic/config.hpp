#pragma once

// Scenario configuration: flat `section.key = value` files, presets, and
// strict validation ahead of any computation.

#include "subharmonic/evolve.hpp"
#include "subharmonic/fock.hpp"

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace subharmonic {

inline constexpr const char* kToolVersion = "0.1.0";

using KeyValues = std::map<std::string, std::string>;

struct ScenarioConfig {
  ModelParams params;
  InitialStateSpec initial;
  std::optional<ModeTruncation> explicit_truncation;  ///< unset means the automatic sizing rule
  std::optional<double> t_end;                        ///< unset means default_duration()
  std::size_t samples = 301;
  IntegratorOptions integrator;
  std::optional<std::string> csv_path;
  std::optional<std::string> out_dir;
  std::vector<double> sweep_n_a;
  std::vector<int> sweep_k;
  double sweep_horizon = 8.0;  ///< in units of 1/sqrt(C2)
  double certify_growth = 1.25;
  double certify_tol = 1e-3;
  std::optional<std::string> preset;
  /// Every effective key after merging preset and file, for CSV metadata.
  KeyValues entries;

  /// N_a: |alpha|^2 or the pump Fock level.
  double pump_occupation() const { return initial.mean_occupation_a(); }
  double beta() const { return static_cast<double>(initial.mode_b.n); }
  /// 30/sqrt(C2) for l = 2, two periods 2 pi/sqrt(C1) for l = 1, 1/sqrt(Cbar)
  /// for l >= 3; 1 when the relevant rate vanishes.
  double default_duration() const;
  double duration() const { return t_end ? *t_end : default_duration(); }
};

/// Key/value pairs a preset contributes: fig1a (N_a = 10), fig1b (N_a = 69),
/// positronium (g = g_Ps). Throws ValidationError for unknown names.
KeyValues preset_entries(const std::string& name);

/// Parses `key = value` lines; '#' starts a comment. Duplicate keys and
/// malformed lines are rejected.
KeyValues parse_key_values(std::istream& in, const std::string& origin = "config");

/// Builds a validated scenario from merged entries. Unknown keys, missing
/// required keys and out-of-range values throw ValidationError.
ScenarioConfig build_scenario(const KeyValues& entries);

/// Preset entries (if any) overridden by the file (if any).
ScenarioConfig load_scenario(const std::optional<std::string>& config_path,
                             const std::optional<std::string>& preset);

}  // namespace subharmonic
