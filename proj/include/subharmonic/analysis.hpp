#pragma once

// Post-processing of observable traces: exponential gain, power-law scaling,
// saturation, truncation certification and dynamical consistency checks.

#include "subharmonic/evolve.hpp"
#include "subharmonic/fock.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace subharmonic {

struct GrowthFit {
  double rate = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double r_squared = 0.0;
  /// A in N_b - beta = A (e^{rt} + e^{-rt} - 2).
  double amplitude = 0.0;
  std::size_t points = 0;
};

/// Fits ln(N_b - beta) = ln A + r t + 2 ln(1 - e^{-r t}) by linear least squares
/// in (ln A, r), iterating r inside the log correction to self-consistency.
///
/// Window: from the first sample where N_b - beta reaches ten times its first
/// value above 1e-6, up to the last sample before N_b - beta passes
/// 0.1 * saturation_estimate. Throws FitError if fewer than 3 samples qualify
/// or the data do not grow.
GrowthFit fit_growth_rate(std::span<const double> times, std::span<const double> n_b, double beta,
                          double saturation_estimate);
GrowthFit fit_growth_rate(const ObservableTrace& trace, double beta, double saturation_estimate);

struct ScalingSample {
  double n_a = 0.0;
  double rate = 0.0;
};

struct ScalingResult {
  double exponent = 0.0;  ///< p in rate = c N_a^p
  double prefactor = 0.0;
  std::vector<ScalingSample> samples;
  double residual = 0.0;  ///< max |rate / (c N_a^p) - 1|
};

/// Least-squares slope of ln(rate) against ln(N_a). Needs >= 3 samples with
/// positive rates and N_a (ValidationError otherwise).
ScalingResult scaling_exponent(std::span<const ScalingSample> samples);

struct SaturationResult {
  double value = 0.0;
  double stddev = 0.0;
  bool stable = false;  ///< stddev / |value| < 0.1
};

/// Mean and spread of N_b over the final `tail_fraction` of the trace duration.
SaturationResult saturation_level(const ObservableTrace& trace, double tail_fraction = 0.25);

struct CertificationOptions {
  std::size_t samples = 200;
  std::size_t max_dimension = 4'000'000;
  int max_rounds = 8;
  IntegratorOptions integrator;
};

struct CertifiedTruncation {
  ModeTruncation truncation;
  int enlargements = 0;
  /// max_t |N_b' - N_b| / max_t |N_b'| between the certified truncation and its enlargement.
  double last_change = 0.0;
};

/// Grows both cutoffs by `growth_factor` until N_b(t) over [0, horizon] moves by
/// less than `tol` (relative to its peak) between successive truncations, and
/// returns the smaller of the last pair. Throws FitError when the dimension
/// budget or round limit is exhausted first.
CertifiedTruncation truncation_convergence(const ModelParams& params, const InitialStateSpec& spec,
                                           ModeTruncation base, double growth_factor, double tol,
                                           double horizon, const CertificationOptions& options = {});

struct HeisenbergCheck {
  /// max |dN_b/dt + 2 g l <y>| / |2 g l <y>| over checked samples.
  double max_relative_residual = 0.0;
  /// max |d<x>/dt + delta <y>|.
  double max_x_residual = 0.0;
  std::size_t points_checked = 0;
};

/// Compares five-point finite differences of the trace with the equations of
/// motion dN_b/dt = -2 g l <y> and d<x>/dt = -delta <y>. Only samples where
/// |2 g l <y>| is at least `floor_fraction` of its maximum enter the relative
/// residual. Requires a uniform grid with at least 5 samples.
HeisenbergCheck heisenberg_residual(const ObservableTrace& trace, const ModelParams& params,
                                    double floor_fraction = 1e-2);

struct ConservationReport {
  double max_norm_drift = 0.0;
  double max_charge_drift = 0.0;  ///< relative to max(|Q(0)|, 1)
  double max_energy_drift = 0.0;  ///< relative to max(|E(0)|, energy_scale)
};

/// `energy_scale` guards the relative energy drift when <H>(0) vanishes;
/// ||H psi0|| is a natural choice.
ConservationReport conservation_report(const ObservableTrace& trace, double energy_scale = 0.0);

}  // namespace subharmonic
