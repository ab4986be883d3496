#pragma once

// Closed-form occupation curves for the semiclassical (c-number pump) limit
// and the positronium reference constants.

#include "subharmonic/fock.hpp"

namespace subharmonic::analytic {

/// Positronium reference values. sigma = 2 pi (hbar / m_e c)^2.
struct PhysicalConstants {
  static constexpr double sigma_cm2 = 0.936e-20;
  static constexpr double c_light_cm_per_s = 2.99792458e10;
  /// alpha^5 m_e c^2 / (2 hbar), the singlet annihilation rate.
  static constexpr double g_ps_per_s = 8e9;
};

struct GainCoefficients {
  double delta_eps = 0.0;
  double c1 = 0.0;     ///< delta^2 + 2 k g^2 N_a^(k-1)
  double c2 = 0.0;     ///< 16 g^2 N_a^k - delta^2; negative means oscillatory
  double c_bar = 0.0;  ///< 2 l^3 g^2 N_a^k
  double d_l = 0.0;
};

GainCoefficients gain_coefficients(const ModelParams& params, double n_a);

double detuning(const ModelParams& params);

/// Classical stimulated-annihilation gain n_ps sigma c in 1/s, density in cm^-3.
double dirac_gain(double n_ps_per_cm3);

/// l = 1: (2 g^2 N_a^k / C1)(1 - cos(sqrt(C1) t)) + beta.
double nb_upconversion(const ModelParams& params, double n_a, double beta, double t);

/// l = 2: 4 g^2 N_a^k (1 + 2 beta) / C2 (e^{sqrt(C2) t} + e^{-sqrt(C2) t} - 2) + beta,
/// continued to the cosine form for C2 < 0 and to the quadratic limit at C2 = 0.
double nb_pair_generation(const ModelParams& params, double n_a, double beta, double t);

enum class GrowthRegime { kGrowing, kOscillatory };

struct PairGrowthRate {
  double rate = 0.0;  ///< sqrt(|C2|)
  GrowthRegime regime = GrowthRegime::kGrowing;
};

/// l = 2 exponential rate of <y>; |C2| under the square root, regime by sign.
PairGrowthRate pair_growth_rate(const ModelParams& params, double n_a);

/// ((l-1)!/l) [t^2 Cbar / 2! + t^4 / 4! (Cbar^2 D_l - Cbar delta^2)], vacuum b mode.
double nb_small_time(const ModelParams& params, double n_a, double t);

/// ((2l)! - 2 (l!)^2) / (l! l^3), exact integer factorials; throws ValidationError for l > 20.
double d_coefficient(int l);

/// Default coupling for the positronium preset, 1/s.
double ps_coupling();

}  // namespace subharmonic::analytic
