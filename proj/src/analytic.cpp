#include "subharmonic/analytic.hpp"

#include "subharmonic/errors.hpp"

#include <cmath>
#include <cstdint>

namespace subharmonic::analytic {

namespace {

void require_l(const ModelParams& params, int l, const char* what) {
  params.validate();
  if (params.l != l) {
    throw ValidationError(std::string(what) + " requires l = " + std::to_string(l) + " (got " +
                          std::to_string(params.l) + ")");
  }
}

constexpr int kMaxExactL = 20;

std::uint64_t factorial(int n) {
  std::uint64_t f = 1;
  for (int j = 2; j <= n; ++j) f *= static_cast<std::uint64_t>(j);
  return f;
}

}  // namespace

GainCoefficients gain_coefficients(const ModelParams& params, double n_a) {
  params.validate();
  const double delta = params.detuning();
  const double g2 = params.g * params.g;
  const double pump = std::pow(n_a, params.k);
  GainCoefficients c;
  c.delta_eps = delta;
  c.c1 = delta * delta + 2.0 * params.k * g2 * std::pow(n_a, params.k - 1);
  c.c2 = 16.0 * g2 * pump - delta * delta;
  c.c_bar = 2.0 * std::pow(params.l, 3) * g2 * pump;
  c.d_l = params.l <= kMaxExactL ? d_coefficient(params.l) : std::nan("");
  return c;
}

double detuning(const ModelParams& params) { return params.detuning(); }

double dirac_gain(double n_ps_per_cm3) {
  if (!(n_ps_per_cm3 >= 0.0)) throw ValidationError("density must be non-negative");
  return n_ps_per_cm3 * PhysicalConstants::sigma_cm2 * PhysicalConstants::c_light_cm_per_s;
}

double nb_upconversion(const ModelParams& params, double n_a, double beta, double t) {
  require_l(params, 1, "nb_upconversion");
  const auto c = gain_coefficients(params, n_a);
  if (c.c1 == 0.0) return beta;
  const double amplitude = 2.0 * params.g * params.g * std::pow(n_a, params.k) / c.c1;
  return amplitude * (1.0 - std::cos(std::sqrt(c.c1) * t)) + beta;
}

double nb_pair_generation(const ModelParams& params, double n_a, double beta, double t) {
  require_l(params, 2, "nb_pair_generation");
  const auto c = gain_coefficients(params, n_a);
  const double drive = 4.0 * params.g * params.g * std::pow(n_a, params.k) * (1.0 + 2.0 * beta);
  if (c.c2 == 0.0) return drive * t * t + beta;
  const double root = std::sqrt(std::abs(c.c2));
  // e^x + e^-x - 2 = 2 (cosh x - 1) = 4 sinh^2(x/2); cosh(ix) = cos(x) below threshold.
  if (c.c2 > 0.0) {
    const double s = std::sinh(0.5 * root * t);
    return drive / c.c2 * 4.0 * s * s + beta;
  }
  const double s = std::sin(0.5 * root * t);
  return drive / c.c2 * (-4.0 * s * s) + beta;
}

PairGrowthRate pair_growth_rate(const ModelParams& params, double n_a) {
  require_l(params, 2, "pair_growth_rate");
  const auto c = gain_coefficients(params, n_a);
  return {std::sqrt(std::abs(c.c2)), c.c2 >= 0.0 ? GrowthRegime::kGrowing : GrowthRegime::kOscillatory};
}

double nb_small_time(const ModelParams& params, double n_a, double t) {
  params.validate();
  if (params.l > kMaxExactL) throw ValidationError("nb_small_time supports l <= 20");
  const auto c = gain_coefficients(params, n_a);
  const double prefactor = static_cast<double>(factorial(params.l - 1)) / params.l;
  const double t2 = t * t;
  return prefactor * (t2 * c.c_bar / 2.0 +
                      t2 * t2 / 24.0 * (c.c_bar * c.c_bar * c.d_l - c.c_bar * c.delta_eps * c.delta_eps));
}

double d_coefficient(int l) {
  if (l < 1) throw ValidationError("d_coefficient requires l >= 1");
  if (l > kMaxExactL) throw ValidationError("d_coefficient: (2l)! overflows exact arithmetic beyond l = 20");
  // (2l)!/l! = (l+1)...(2l) reaches ~3.4e29 at l = 20, so 128-bit integers keep it exact.
  using Wide = unsigned __int128;
  Wide rising = 1;
  for (int j = l + 1; j <= 2 * l; ++j) rising *= static_cast<Wide>(j);
  const Wide numerator = rising - 2 * static_cast<Wide>(factorial(l));  // ((2l)! - 2 (l!)^2) / l!
  const Wide l3 = static_cast<Wide>(l) * l * l;
  const Wide whole = numerator / l3;
  const Wide rest = numerator % l3;
  return static_cast<double>(whole) + static_cast<double>(rest) / static_cast<double>(l3);
}

double ps_coupling() { return PhysicalConstants::g_ps_per_s; }

}  // namespace subharmonic::analytic
