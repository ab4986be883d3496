#include "subharmonic/commands.hpp"

#include "subharmonic/analytic.hpp"
#include "subharmonic/errors.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>
#include <thread>

namespace subharmonic {

namespace {

namespace fs = std::filesystem;

std::optional<fs::path> output_dir(const ScenarioConfig& cfg, const CommandContext& ctx) {
  if (ctx.out_dir) return fs::path(*ctx.out_dir);
  if (cfg.out_dir) return fs::path(*cfg.out_dir);
  return std::nullopt;
}

// Explicit outputs.csv wins, then <dir>/<default_name>; nullopt means stdout.
std::optional<fs::path> output_file(const ScenarioConfig& cfg, const CommandContext& ctx,
                                    const std::string& default_name) {
  if (cfg.csv_path) {
    const fs::path p(*cfg.csv_path);
    if (p.is_absolute() || !output_dir(cfg, ctx)) return p;
    return *output_dir(cfg, ctx) / p;
  }
  if (const auto dir = output_dir(cfg, ctx)) return *dir / default_name;
  return std::nullopt;
}

void emit(const CsvTable& table, const std::optional<fs::path>& file, const CommandContext& ctx) {
  if (file) {
    write_file_atomic(*file, to_csv_string(table));
  } else if (ctx.out) {
    write_csv(*ctx.out, table);
  }
}

std::string truncation_text(const ModeTruncation& t) {
  return "n_a_max=" + std::to_string(t.n_a_max) + ",n_b_max=" + std::to_string(t.n_b_max);
}

// sqrt(C1), sqrt(|C2|) or sqrt(Cbar) depending on l.
double natural_rate(const ModelParams& params, double n_a) {
  const auto c = analytic::gain_coefficients(params, n_a);
  if (params.l == 1) return std::sqrt(c.c1);
  if (params.l == 2) return std::sqrt(std::abs(c.c2));
  return std::sqrt(c.c_bar);
}

void require_pump_resolvable(const ScenarioConfig& cfg) {
  if (cfg.params.l >= 3 && cfg.initial.mode_b.n != 0) {
    throw ValidationError("the small-time series for l >= 3 assumes initial.beta = 0");
  }
}

}  // namespace

ModeTruncation resolve_truncation(const ScenarioConfig& cfg, bool certify, double horizon) {
  if (cfg.explicit_truncation) return *cfg.explicit_truncation;
  const auto base = sizing_rule(cfg.params, cfg.initial);
  if (!certify) return base;
  CertificationOptions options;
  options.integrator = cfg.integrator;
  return truncation_convergence(cfg.params, cfg.initial, base, cfg.certify_growth, cfg.certify_tol, horizon,
                                options)
      .truncation;
}

std::vector<std::string> run_metadata(const std::string& command, const ScenarioConfig& cfg,
                                      const std::optional<ModeTruncation>& truncation) {
  std::vector<std::string> lines;
  lines.push_back("command = " + command);
  lines.push_back(std::string("tool_version = ") + kToolVersion);
  for (const auto& [key, value] : cfg.entries) lines.push_back(key + " = " + value);
  if (truncation) lines.push_back("truncation = " + truncation_text(*truncation));
  return lines;
}

ObservableTrace simulate_trace(const ScenarioConfig& cfg, const ModeTruncation& truncation) {
  const ProductBasis basis(truncation);
  const auto hamiltonian = build_hamiltonian(cfg.params, basis);
  const auto ops = build_observables(cfg.params, basis);
  const auto psi0 = product_initial_state(cfg.initial, basis);
  const auto times = uniform_grid(cfg.duration(), cfg.samples);
  return observable_trace(hamiltonian, psi0, ops, times, cfg.integrator);
}

double analytic_n_b(const ScenarioConfig& cfg, double t) {
  const double n_a = cfg.pump_occupation();
  const double beta = cfg.beta();
  if (cfg.params.l == 1) return analytic::nb_upconversion(cfg.params, n_a, beta, t);
  if (cfg.params.l == 2) return analytic::nb_pair_generation(cfg.params, n_a, beta, t);
  return analytic::nb_small_time(cfg.params, n_a, t);
}

void cmd_simulate(const ScenarioConfig& cfg, const CommandContext& ctx) {
  const auto file = output_file(cfg, ctx, "simulate.csv");
  const auto truncation = resolve_truncation(cfg, ctx.certify, cfg.duration());
  const auto trace = simulate_trace(cfg, truncation);
  emit(trace_table(trace, run_metadata("simulate", cfg, truncation)), file, ctx);
}

void cmd_analytic(const ScenarioConfig& cfg, const CommandContext& ctx) {
  require_pump_resolvable(cfg);
  const auto file = output_file(cfg, ctx, "analytic.csv");
  auto comments = run_metadata("analytic", cfg, std::nullopt);
  if (cfg.params.l == 1) {
    comments.push_back("closed form: up-conversion (l = 1)");
  } else if (cfg.params.l == 2) {
    comments.push_back("closed form: pair generation (l = 2)");
  } else {
    comments.push_back("closed form: small-time series, valid only for g*t <= 0.1");
  }
  CsvTable table;
  table.comments = std::move(comments);
  table.header = kTraceColumns;
  for (const double t : uniform_grid(cfg.duration(), cfg.samples)) {
    table.rows.push_back({t, std::nullopt, analytic_n_b(cfg, t), std::nullopt, std::nullopt, std::nullopt,
                          std::nullopt});
  }
  emit(table, file, ctx);
}

std::vector<CompareSummary> cmd_compare(const ScenarioConfig& cfg, const CommandContext& ctx) {
  require_pump_resolvable(cfg);
  const bool fig1 = cfg.preset && (*cfg.preset == "fig1a" || *cfg.preset == "fig1b");
  std::vector<int> ks = fig1 ? std::vector<int>{1, 2, 3} : std::vector<int>{cfg.params.k};
  if (fig1 && cfg.entries.contains("params.k") && preset_entries(*cfg.preset).at("params.k") != cfg.entries.at("params.k")) {
    ks = {cfg.params.k};
  }

  // Resolve every destination before any computation.
  std::vector<std::optional<fs::path>> files;
  for (const int k : ks) {
    const std::string name = fig1 ? *cfg.preset + "_k" + std::to_string(k) + ".csv" : "compare.csv";
    files.push_back(ks.size() == 1 ? output_file(cfg, ctx, name)
                                   : (output_dir(cfg, ctx) ? std::optional(*output_dir(cfg, ctx) / name)
                                                           : std::nullopt));
  }

  std::vector<CompareSummary> summaries;
  for (std::size_t idx = 0; idx < ks.size(); ++idx) {
    ScenarioConfig run = cfg;
    run.params.k = ks[idx];
    run.entries["params.k"] = std::to_string(ks[idx]);
    const double n_a = run.pump_occupation();
    const double duration = run.duration();
    const auto truncation = resolve_truncation(run, ctx.certify, duration);
    const auto trace = simulate_trace(run, truncation);
    const double rate = natural_rate(run.params, n_a);

    CompareSummary summary;
    summary.k = ks[idx];
    summary.n_a = n_a;
    CsvTable table;
    table.comments = run_metadata("compare", run, truncation);
    table.comments.push_back("sqrt_c_t = t * sqrt(C) with C = C1 (l=1), C2 (l=2), Cbar (l>=3); g_t = g * t");
    table.header = {"t", "g_t", "sqrt_c_t", "n_b_numeric", "n_b_analytic", "rel_diff", "numeric_over_na",
                    "analytic_over_na"};
    for (std::size_t i = 0; i < trace.size(); ++i) {
      const double t = trace.times[i];
      const double numeric = trace.records[i].n_b;
      const double closed = analytic_n_b(run, t);
      const double scale = std::abs(closed) > 0.0 ? std::abs(closed) : 1.0;
      const double rel = std::abs(numeric - closed) / scale;
      summary.max_rel_diff = std::max(summary.max_rel_diff, rel);
      if (!summary.divergence_t && rel > 0.05) {
        summary.divergence_t = t;
        summary.divergence_scaled_t = t * rate;
      }
      const std::optional<double> over_na = n_a > 0.0 ? std::optional(numeric / n_a) : std::nullopt;
      const std::optional<double> closed_over_na = n_a > 0.0 ? std::optional(closed / n_a) : std::nullopt;
      table.rows.push_back({t, run.params.g * t, t * rate, numeric, closed, rel, over_na, closed_over_na});
    }
    emit(table, files[idx], ctx);
    summaries.push_back(summary);
  }

  if (ctx.out && (files.front() || ks.size() > 1)) {
    for (const auto& s : summaries) {
      *ctx.out << "k=" << s.k << " n_a=" << format_number(s.n_a)
               << " max_rel_diff=" << format_number(s.max_rel_diff);
      if (s.divergence_t) {
        *ctx.out << " divergence_t=" << format_number(*s.divergence_t)
                 << " divergence_scaled_t=" << format_number(*s.divergence_scaled_t);
      } else {
        *ctx.out << " divergence_t=none";
      }
      *ctx.out << '\n';
    }
  }
  return summaries;
}

SweepSummary cmd_sweep(const ScenarioConfig& cfg, const CommandContext& ctx) {
  if (cfg.sweep_n_a.empty()) throw ValidationError("sweep.n_a must list at least one occupation");
  if (cfg.params.l != 2) throw ValidationError("sweep fits exponential gain and requires params.l = 2");
  if (ctx.jobs < 1) throw ValidationError("--jobs must be >= 1");
  const std::vector<int> ks = cfg.sweep_k.empty() ? std::vector<int>{cfg.params.k} : cfg.sweep_k;
  const auto dir = output_dir(cfg, ctx);
  const auto summary_file = output_file(cfg, ctx, "sweep.csv");

  SweepSummary summary;
  for (const int k : ks) {
    for (const double n_a : cfg.sweep_n_a) summary.points.push_back({k, n_a, std::nullopt, {}, {}});
  }

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < summary.points.size(); i = next++) {
      auto& point = summary.points[i];
      try {
        ScenarioConfig run = cfg;
        run.params.k = point.k;
        run.entries["params.k"] = std::to_string(point.k);
        run.initial.mode_a = Coherent{Complex(std::sqrt(point.n_a), 0.0)};
        run.entries.erase("initial.alpha");
        run.entries.erase("initial.alpha_im");
        run.entries.erase("initial.fock_a");
        run.entries.erase("sweep.n_a");
        run.entries.erase("sweep.k");
        run.entries["initial.n_a"] = format_number(point.n_a);
        const double rate = analytic::pair_growth_rate(run.params, point.n_a).rate;
        run.t_end = cfg.sweep_horizon / (rate > 0.0 ? rate : 1.0);
        run.entries["times.t_end"] = format_number(*run.t_end);
        point.truncation = resolve_truncation(run, ctx.certify, *run.t_end);
        const auto trace = simulate_trace(run, point.truncation);
        point.fit = fit_growth_rate(trace, run.beta(), 2.0 * point.n_a / point.k);
        if (dir) {
          const auto name = "sweep_k" + std::to_string(point.k) + "_na" + format_number(point.n_a) + ".csv";
          write_file_atomic(*dir / name, to_csv_string(trace_table(trace, run_metadata("sweep", run, point.truncation))));
        }
      } catch (const std::exception& e) {
        point.error = e.what();
      }
    }
  };
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(ctx.jobs), summary.points.size());
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();

  std::map<int, std::vector<ScalingSample>> by_k;
  for (const auto& p : summary.points) {
    if (p.fit) {
      by_k[p.k].push_back({p.n_a, p.fit->rate});
    } else {
      ++summary.failures;
    }
  }
  for (const auto& [k, samples] : by_k) {
    if (samples.size() >= 3) summary.exponents.emplace_back(k, scaling_exponent(samples));
  }

  CsvTable table;
  table.comments = run_metadata("sweep", cfg, std::nullopt);
  for (const auto& [k, result] : summary.exponents) {
    table.comments.push_back("k = " + std::to_string(k) + " exponent = " + format_number(result.exponent) +
                             " expected = " + format_number(k / 2.0) +
                             " residual = " + format_number(result.residual));
  }
  for (const auto& p : summary.points) {
    if (!p.error.empty()) table.comments.push_back("failed k = " + std::to_string(p.k) + " n_a = " + format_number(p.n_a) + ": " + p.error);
  }
  table.header = {"k", "n_a", "rate", "expected_rate", "r_squared", "t_lo", "t_hi", "n_a_max", "n_b_max"};
  for (const auto& p : summary.points) {
    ModelParams params = cfg.params;
    params.k = p.k;
    const double expected = analytic::pair_growth_rate(params, p.n_a).rate;
    std::vector<std::optional<double>> row = {double(p.k), p.n_a, std::nullopt, expected, std::nullopt,
                                              std::nullopt, std::nullopt, std::nullopt, std::nullopt};
    if (p.fit) {
      row[2] = p.fit->rate;
      row[4] = p.fit->r_squared;
      row[5] = p.fit->t_lo;
      row[6] = p.fit->t_hi;
      row[7] = double(p.truncation.n_a_max);
      row[8] = double(p.truncation.n_b_max);
    }
    table.rows.push_back(std::move(row));
  }
  emit(table, summary_file, ctx);

  if (summary.failures * 5 > summary.points.size()) {
    throw FitError(std::to_string(summary.failures) + " of " + std::to_string(summary.points.size()) +
                   " sweep points failed");
  }
  return summary;
}

void cmd_constants(std::optional<double> density, std::ostream& out) {
  using C = analytic::PhysicalConstants;
  out << "sigma_cm2 = 0.936e-20\n";
  out << "c_light_cm_per_s = " << format_number(C::c_light_cm_per_s) << '\n';
  out << "g_ps_per_s = " << format_number(analytic::ps_coupling()) << '\n';
  if (density) {
    out << "density_per_cm3 = " << format_number(*density) << '\n';
    out << "dirac_gain_per_s = " << format_number(analytic::dirac_gain(*density)) << '\n';
  }
}

}  // namespace subharmonic
