// Acceptance suite: one [PASS]/[FAIL] line per criterion, exit status 1 if any fail.

#include "subharmonic/analysis.hpp"
#include "subharmonic/analytic.hpp"
#include "subharmonic/errors.hpp"
#include "subharmonic/evolve.hpp"
#include "subharmonic/fock.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace subharmonic;

namespace {

struct Run {
  std::string label;
  ModelParams params;
  ModeTruncation truncation;
  ObservableTrace trace;
  double energy_scale = 0.0;
};

std::deque<Run> g_runs;  // every simulation, for the conservation suite
int g_failures = 0;

void report(int id, bool pass, const std::string& title, const std::string& detail) {
  std::printf("[%s] %2d %s: %s\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

InitialStateSpec coherent(double n_a, std::size_t beta = 0) {
  return {Coherent{Complex(std::sqrt(n_a), 0.0)}, Fock{beta}};
}

const Run& simulate(const std::string& label, const ModelParams& p, const InitialStateSpec& spec,
                    std::span<const double> times, bool certify) {
  auto trunc = sizing_rule(p, spec);
  if (certify) trunc = truncation_convergence(p, spec, trunc, 1.25, 1e-3, times.back()).truncation;
  const ProductBasis basis(trunc);
  const auto h = build_hamiltonian(p, basis);
  const auto psi0 = product_initial_state(spec, basis);
  Run run{label, p, trunc, observable_trace(h, psi0, build_observables(p, basis), times), 0.0};
  run.energy_scale = (h.matrix() * psi0.amplitudes()).norm();
  g_runs.push_back(std::move(run));
  return g_runs.back();
}

double pair_rate(const ModelParams& p, double n_a) { return analytic::pair_growth_rate(p, n_a).rate; }

// Growth-rate fit of a certified run over [0, 8/sqrt(C2)].
double fitted_rate(const std::string& label, const ModelParams& p, const InitialStateSpec& spec) {
  const double n_a = spec.mean_occupation_a();
  const auto times = uniform_grid(8.0 / pair_rate(p, n_a), 801);
  const auto& run = simulate(label, p, spec, times, true);
  return fit_growth_rate(run.trace, double(spec.mode_b.n), 2.0 * n_a / p.k).rate;
}

void guarded(int id, const std::string& title, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, false, title, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main() {
  const ModelParams k1l2{1, 2, 1.0, 0.0, 0.0};
  const ModelParams k2l2{2, 2, 1.0, 0.0, 0.0};

  double rate69 = 0.0;
  guarded(1, "analytic vs numeric, N_a=69", [&] {
    const auto start = std::chrono::steady_clock::now();
    const double n_a = 69.0;
    const double r = pair_rate(k1l2, n_a);
    const auto times = uniform_grid(8.0 / r, 801);
    const auto& run = simulate("k1 N69", k1l2, coherent(n_a), times, true);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    double worst = 0.0;
    for (std::size_t i = 1; i < run.trace.size(); ++i) {
      const double t = run.trace.times[i];
      if (r * t > 3.0 + 1e-12) break;
      const double exact = analytic::nb_pair_generation(k1l2, n_a, 0.0, t);
      worst = std::max(worst, std::abs(run.trace.records[i].n_b - exact) / exact);
    }
    rate69 = fit_growth_rate(run.trace, 0.0, 2.0 * n_a).rate;
    report(1, worst <= 0.05 && secs <= 120.0, "analytic vs numeric, N_a=69",
           fmt("max rel diff %.4f for sqrt(C2) t <= 3 (limit 0.05); truncation %zux%zu; %.1f s", worst,
               run.truncation.n_a_max, run.truncation.n_b_max, secs));
  });

  guarded(2, "saturation at 2N_a/k", [&] {
    bool pass = true;
    std::string detail;
    for (const auto& [p, n_a] : {std::pair{k1l2, 10.0}, std::pair{k2l2, 10.0}}) {
      const auto times = uniform_grid(30.0 / pair_rate(p, n_a), 1201);
      const auto& run = simulate(fmt("k%d N10 saturation", p.k), p, coherent(n_a), times, true);
      const auto sat = saturation_level(run.trace);
      const double target = 2.0 * n_a / p.k;
      const double err = std::abs(sat.value - target) / target;
      pass = pass && err <= 0.10;
      detail += fmt("k=%d tail mean %.3f (target %.1f, off %.1f%%) ", p.k, sat.value, target, 100 * err);
    }
    report(2, pass, "saturation at 2N_a/k", detail + "(limit 10%)");
  });

  guarded(3, "gain scaling exponent", [&] {
    bool pass = true;
    std::string detail;
    const std::pair<ModelParams, std::vector<double>> sets[] = {{k1l2, {20.0, 40.0, 69.0}}, {k2l2, {10.0, 20.0, 30.0}}};
    for (const auto& [p, grid] : sets) {
      std::vector<ScalingSample> samples;
      for (const double n_a : grid) {
        const double rate = (p.k == 1 && n_a == 69.0 && rate69 > 0.0)
                                ? rate69
                                : fitted_rate(fmt("k%d N%g", p.k, n_a), p, coherent(n_a));
        samples.push_back({n_a, rate});
      }
      const auto s = scaling_exponent(samples);
      const bool ok = std::abs(s.exponent - p.k / 2.0) <= 0.05;
      pass = pass && ok;
      detail += fmt("k=%d p=%.4f (expected %.1f) ", p.k, s.exponent, p.k / 2.0);
    }
    report(3, pass, "gain scaling exponent", detail + "(limit 0.05)");
  });

  guarded(4, "rate magnitude, N_a=69", [&] {
    const double expected = 4.0 * std::sqrt(69.0);
    const double err = std::abs(rate69 / expected - 1.0);
    report(4, rate69 > 0.0 && err <= 0.05, "rate magnitude, N_a=69",
           fmt("fitted %.4f vs 4g sqrt(N_a) = %.4f (off %.2f%%, limit 5%%)", rate69, expected, 100 * err));
  });

  guarded(5, "seeding proportional to 1+2beta", [&] {
    const double n_a = 69.0;
    const auto times = uniform_grid(2.0 / pair_rate(k1l2, n_a), 101);
    std::vector<double> scaled;
    for (std::size_t beta : {0u, 1u, 2u}) {
      const auto& run = simulate(fmt("k1 N69 beta%zu", beta), k1l2, coherent(n_a, beta), times, true);
      scaled.push_back((run.trace.records.back().n_b - double(beta)) / (1.0 + 2.0 * beta));
    }
    double worst = 0.0;
    for (const double s : scaled) worst = std::max(worst, std::abs(s / scaled[0] - 1.0));
    report(5, worst <= 0.05, "seeding proportional to 1+2beta",
           fmt("(N_b-beta)/(1+2beta) = %.4f, %.4f, %.4f (spread %.2f%%, limit 5%%)", scaled[0], scaled[1], scaled[2],
               100 * worst));
  });

  guarded(6, "l=1 oscillation period and amplitude", [&] {
    bool pass = true;
    std::string detail;
    const double n_a = 25.0;
    for (const int k : {1, 2}) {
      const ModelParams p{k, 1, 1.0, 0.0, 0.0};
      const auto c = analytic::gain_coefficients(p, n_a);
      const double period = 2.0 * M_PI / std::sqrt(c.c1);
      const double amplitude = 4.0 * std::pow(n_a, k) / c.c1;
      const auto times = uniform_grid(2.0 * period, 2001);
      const auto& run = simulate(fmt("k%d l1 N25", k), p, coherent(n_a), times, false);
      const auto nb = run.trace.column(&ObservableRecord::n_b);
      // First local minimum after the first local maximum marks one full cycle.
      std::size_t peak = 1;
      while (peak + 1 < nb.size() && nb[peak + 1] >= nb[peak]) ++peak;
      std::size_t trough = peak;
      while (trough + 1 < nb.size() && nb[trough + 1] <= nb[trough]) ++trough;
      const double measured_period = run.trace.times[trough];
      const double measured_amp = *std::max_element(nb.begin(), nb.begin() + long(trough) + 1);
      const double perr = std::abs(measured_period / period - 1.0);
      const double aerr = std::abs(measured_amp / amplitude - 1.0);
      pass = pass && perr <= 0.02 && aerr <= 0.10;
      detail += fmt("k=%d period %.4f vs %.4f (%.1f%%), peak %.3f vs %.3f (%.1f%%); ", k, measured_period, period,
                    100 * perr, measured_amp, amplitude, 100 * aerr);
    }
    report(6, pass, "l=1 oscillation period and amplitude", detail + "limits 2%/10%");
  });

  guarded(7, "l=3 small-time series", [&] {
    const ModelParams p{1, 3, 1.0, 0.0, 0.0};
    const double n_a = 100.0;
    const double t_max = 0.05 / p.g;
    // 257 points: t_max and t_max/2 both lie on the grid.
    const auto times = uniform_grid(t_max, 257);
    const auto& run = simulate("k1 l3 N100", p, coherent(n_a), times, false);
    double worst = 0.0;
    for (std::size_t i = 1; i < run.trace.size(); ++i) {
      const double num = run.trace.records[i].n_b;
      worst = std::max(worst, std::abs(num - analytic::nb_small_time(p, n_a, run.trace.times[i])) / num);
    }
    const auto err_at = [&](std::size_t i) {
      return std::abs(run.trace.records[i].n_b - analytic::nb_small_time(p, n_a, run.trace.times[i]));
    };
    const double ratio = err_at(256) / err_at(128);
    report(7, worst <= 0.02 && ratio >= 50.0 && ratio <= 80.0, "l=3 small-time series",
           fmt("max rel diff %.4f for g t <= 0.05 (limit 0.02); error ratio t/(t/2) at g t = 0.05: %.2f (want 50-80)",
               worst, ratio));
  });

  guarded(10, "Fock vs coherent pump, N_a=40", [&] {
    const double coh = fitted_rate("k1 N40 coherent", k1l2, coherent(40.0));
    const double fock = fitted_rate("k1 N40 fock", k1l2, {Fock{40}, Fock{0}});
    const double err = std::abs(fock / coh - 1.0);
    report(10, err <= 0.05, "Fock vs coherent pump, N_a=40",
           fmt("rates %.4f (Fock) vs %.4f (coherent), off %.2f%% (limit 5%%)", fock, coh, 100 * err));
  });

  guarded(8, "conservation and Heisenberg consistency", [&] {
    double norm = 0.0, charge = 0.0, energy = 0.0, heis = 0.0;
    std::string worst_heis;
    for (const auto& run : g_runs) {
      const auto c = conservation_report(run.trace, run.energy_scale);
      norm = std::max(norm, c.max_norm_drift);
      charge = std::max(charge, c.max_charge_drift);
      energy = std::max(energy, c.max_energy_drift);
      const auto h = heisenberg_residual(run.trace, run.params);
      if (h.max_relative_residual > heis) {
        heis = h.max_relative_residual;
        worst_heis = run.label;
      }
    }
    report(8, norm < 1e-9 && charge < 1e-8 && energy < 1e-8 && heis < 0.02, "conservation and Heisenberg consistency",
           fmt("%zu runs: norm %.2e, charge %.2e, energy %.2e, Heisenberg %.2e (%s)", g_runs.size(), norm, charge,
               energy, heis, worst_heis.c_str()));
  });

  guarded(9, "propagator vs dense oracle", [&] {
    std::mt19937_64 rng(20240601);
    std::uniform_int_distribution<int> power(1, 3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal;
    double worst = 0.0;
    std::size_t max_dim = 0;
    for (int trial = 0; trial < 50; ++trial) {
      const ModelParams p{power(rng), power(rng), 0.05 + 1.5 * unit(rng), 2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0};
      const std::size_t n_a_max = 1 + std::size_t(unit(rng) * 30);
      const std::size_t n_b_cap = std::min<std::size_t>(40, kDenseReferenceMaxDim / (n_a_max + 1) - 1);
      const std::size_t n_b_max = 1 + std::size_t(unit(rng) * double(n_b_cap));
      const ProductBasis basis({n_a_max, n_b_max});
      max_dim = std::max(max_dim, basis.dimension());
      const auto h = build_hamiltonian(p, basis);
      Eigen::VectorXcd v(basis.dimension());
      for (auto& c : v) c = Complex(normal(rng), normal(rng));
      v.normalize();
      const StateVector psi0(basis, v);
      const std::vector<double> times = {0.3 * unit(rng), 0.5 + 2.0 * unit(rng)};
      const auto snaps = propagate(h, psi0, times);
      for (std::size_t i = 0; i < times.size(); ++i) {
        const auto ref = dense_reference_evolve(h, psi0, times[i]);
        worst = std::max(worst, (snaps[i].amplitudes() - ref.amplitudes()).cwiseAbs().maxCoeff());
      }
    }
    report(9, worst <= 1e-8, "propagator vs dense oracle",
           fmt("50 instances up to dim %zu: max amplitude error %.2e (limit 1e-8)", max_dim, worst));
  });

  guarded(11, "D_l table", [&] {
    const double d1 = analytic::d_coefficient(1), d2 = analytic::d_coefficient(2), d3 = analytic::d_coefficient(3);
    report(11, d1 == 0.0 && d2 == 1.0 && d3 == 4.0, "D_l table", fmt("D_1=%g D_2=%g D_3=%g", d1, d2, d3));
  });

  guarded(12, "Dirac gain constants", [&] {
    const double g = analytic::dirac_gain(1e20);
    const double err = std::abs(g / 2.81e10 - 1.0);
    report(12, err <= 0.005 && analytic::PhysicalConstants::sigma_cm2 == 0.936e-20, "Dirac gain constants",
           fmt("dirac_gain(1e20) = %.6e /s (off %.3f%% from 2.81e10, limit 0.5%%), sigma = %.3fe-20 cm^2", g, 100 * err,
               analytic::PhysicalConstants::sigma_cm2 * 1e20));
  });

  std::printf("%d of 12 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
