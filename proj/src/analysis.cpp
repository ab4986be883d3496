#include "subharmonic/analysis.hpp"

#include "subharmonic/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace subharmonic {

namespace {

constexpr double kResolvedFloor = 1e-6;

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

Line least_squares(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  Line line;
  line.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  line.intercept = my - line.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (line.intercept + line.slope * x[i]);
    ss_res += r * r;
  }
  line.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return line;
}

std::vector<double> run_n_b(const ModelParams& params, const InitialStateSpec& spec, ModeTruncation trunc,
                            std::span<const double> times, const IntegratorOptions& opts) {
  const ProductBasis basis(trunc);
  const auto h = build_hamiltonian(params, basis);
  const auto ops = build_observables(params, basis);
  const auto psi0 = product_initial_state(spec, basis);
  return observable_trace(h, psi0, ops, times, opts).column(&ObservableRecord::n_b);
}

}  // namespace

GrowthFit fit_growth_rate(std::span<const double> times, std::span<const double> n_b, double beta,
                          double saturation_estimate) {
  if (times.size() != n_b.size()) throw ValidationError("times and N_b differ in length");
  const std::size_t n = times.size();
  std::size_t first = 0;
  while (first < n && !(n_b[first] - beta > kResolvedFloor)) ++first;
  if (first == n) throw FitError("no growth above 1e-6 resolved; run longer or increase N_a");

  const double lower = 10.0 * (n_b[first] - beta);
  const double upper = 0.1 * saturation_estimate;
  std::size_t start = first;
  while (start < n && n_b[start] - beta < lower) ++start;
  std::size_t stop = start;
  while (stop < n && n_b[stop] - beta <= upper) ++stop;
  if (!(upper > lower) || stop < start + 3) {
    std::ostringstream msg;
    msg << "exponential window [" << lower << ", " << upper << "] holds " << (stop > start ? stop - start : 0)
        << " samples; run longer or increase N_a";
    throw FitError(msg.str());
  }

  const std::span<const double> t(times.data() + start, stop - start);
  std::vector<double> log_excess(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) log_excess[i] = std::log(n_b[start + i] - beta);

  Line line = least_squares(t, log_excess);
  double rate = line.slope;
  if (!(rate > 0.0)) throw FitError("N_b does not grow inside the fit window");

  // ln(e^{rt} + e^{-rt} - 2) = rt + 2 ln(1 - e^{-rt}); the correction matters
  // until rt >> 1 and is refreshed with each new estimate of r.
  std::vector<double> corrected(t.size());
  constexpr int kMaxIterations = 500;
  int iteration = 0;
  for (; iteration < kMaxIterations; ++iteration) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      corrected[i] = log_excess[i] - 2.0 * std::log(-std::expm1(-rate * t[i]));
    }
    line = least_squares(t, corrected);
    if (!(line.slope > 0.0)) throw FitError("growth fit did not converge to a positive rate");
    const double change = std::abs(line.slope - rate);
    rate = line.slope;
    if (change <= 1e-13 * rate) break;
  }
  if (iteration == kMaxIterations) throw FitError("growth fit did not converge");

  GrowthFit fit;
  fit.rate = rate;
  fit.t_lo = t.front();
  fit.t_hi = t.back();
  fit.r_squared = line.r_squared;
  fit.amplitude = std::exp(line.intercept);
  fit.points = t.size();
  return fit;
}

GrowthFit fit_growth_rate(const ObservableTrace& trace, double beta, double saturation_estimate) {
  const auto n_b = trace.column(&ObservableRecord::n_b);
  return fit_growth_rate(trace.times, n_b, beta, saturation_estimate);
}

ScalingResult scaling_exponent(std::span<const ScalingSample> samples) {
  if (samples.size() < 3) throw ValidationError("scaling fit needs at least 3 samples");
  std::vector<double> log_n, log_rate;
  for (const auto& s : samples) {
    if (!(s.rate > 0.0) || !(s.n_a > 0.0)) {
      throw ValidationError("scaling fit needs positive rates and occupations");
    }
    log_n.push_back(std::log(s.n_a));
    log_rate.push_back(std::log(s.rate));
  }
  const Line line = least_squares(log_n, log_rate);
  ScalingResult result;
  result.exponent = line.slope;
  result.prefactor = std::exp(line.intercept);
  result.samples.assign(samples.begin(), samples.end());
  for (const auto& s : samples) {
    const double predicted = result.prefactor * std::pow(s.n_a, result.exponent);
    result.residual = std::max(result.residual, std::abs(s.rate / predicted - 1.0));
  }
  return result;
}

SaturationResult saturation_level(const ObservableTrace& trace, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw ValidationError("tail_fraction must lie in (0, 1]");
  }
  if (trace.size() == 0) throw ValidationError("empty trace");
  const double t0 = trace.times.front();
  const double t1 = trace.times.back();
  const double cut = t1 - tail_fraction * (t1 - t0);
  double sum = 0.0, sum_sq = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace.times[i] < cut) continue;
    const double v = trace.records[i].n_b;
    sum += v;
    ++count;
  }
  const double mean = sum / static_cast<double>(count);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace.times[i] < cut) continue;
    const double d = trace.records[i].n_b - mean;
    sum_sq += d * d;
  }
  SaturationResult result;
  result.value = mean;
  result.stddev = std::sqrt(sum_sq / static_cast<double>(count));
  result.stable = result.stddev == 0.0 || result.stddev < 0.1 * std::abs(mean);
  return result;
}

CertifiedTruncation truncation_convergence(const ModelParams& params, const InitialStateSpec& spec,
                                           ModeTruncation base, double growth_factor, double tol,
                                           double horizon, const CertificationOptions& options) {
  if (!(growth_factor > 1.0)) throw ValidationError("growth_factor must be > 1");
  if (!(tol > 0.0)) throw ValidationError("certification tol must be > 0");
  const auto times = uniform_grid(horizon, options.samples);

  ModeTruncation current = base;
  auto current_n_b = run_n_b(params, spec, current, times, options.integrator);
  for (int round = 0; round < options.max_rounds; ++round) {
    // At least one ladder step per mode, otherwise the new levels can be unreachable.
    const auto grow = [&](std::size_t n, int step) {
      return std::max(n + static_cast<std::size_t>(step),
                      static_cast<std::size_t>(std::ceil(static_cast<double>(n) * growth_factor)));
    };
    const ModeTruncation next{grow(current.n_a_max, params.k), grow(current.n_b_max, params.l)};
    if ((next.n_a_max + 1) * (next.n_b_max + 1) > options.max_dimension) {
      throw FitError("truncation not certified within the dimension budget");
    }
    const auto next_n_b = run_n_b(params, spec, next, times, options.integrator);
    double peak = 0.0, change = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      peak = std::max(peak, std::abs(next_n_b[i]));
      change = std::max(change, std::abs(next_n_b[i] - current_n_b[i]));
    }
    const double relative = peak > 0.0 ? change / peak : 0.0;
    if (relative < tol) return {current, round, relative};
    current = next;
    current_n_b = next_n_b;
  }
  throw FitError("truncation not certified within " + std::to_string(options.max_rounds) + " enlargements");
}

HeisenbergCheck heisenberg_residual(const ObservableTrace& trace, const ModelParams& params,
                                    double floor_fraction) {
  const std::size_t n = trace.size();
  if (n < 5) throw ValidationError("Heisenberg check needs at least 5 samples");
  const double h = trace.times[1] - trace.times[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs((trace.times[i] - trace.times[i - 1]) - h) > 1e-9 * std::abs(h)) {
      throw ValidationError("Heisenberg check needs a uniform time grid");
    }
  }
  const double coupling = 2.0 * params.g * params.l;
  const double delta = params.detuning();
  const auto derivative = [&](double ObservableRecord::*field, std::size_t i) {
    const auto& r = trace.records;
    return (r[i - 2].*field - 8.0 * (r[i - 1].*field) + 8.0 * (r[i + 1].*field) - r[i + 2].*field) / (12.0 * h);
  };
  double peak = 0.0;
  for (const auto& r : trace.records) peak = std::max(peak, std::abs(coupling * r.y));

  HeisenbergCheck check;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    const double y = trace.records[i].y;
    check.max_x_residual = std::max(check.max_x_residual, std::abs(derivative(&ObservableRecord::x, i) + delta * y));
    const double rhs = coupling * y;
    if (peak == 0.0 || std::abs(rhs) < floor_fraction * peak) continue;
    const double residual = std::abs(derivative(&ObservableRecord::n_b, i) + rhs) / std::abs(rhs);
    check.max_relative_residual = std::max(check.max_relative_residual, residual);
    ++check.points_checked;
  }
  return check;
}

ConservationReport conservation_report(const ObservableTrace& trace, double energy_scale) {
  ConservationReport report;
  if (trace.size() == 0) return report;
  const auto& first = trace.records.front();
  const double q_scale = std::max(std::abs(first.q), 1.0);
  const double e_scale = std::max(std::abs(first.energy), energy_scale);
  for (const auto& r : trace.records) {
    report.max_norm_drift = std::max(report.max_norm_drift, std::abs(r.norm - 1.0));
    report.max_charge_drift = std::max(report.max_charge_drift, std::abs(r.q - first.q) / q_scale);
    if (e_scale > 0.0) {
      report.max_energy_drift = std::max(report.max_energy_drift, std::abs(r.energy - first.energy) / e_scale);
    }
  }
  return report;
}

}  // namespace subharmonic
