#include <doctest.h>

#include "subharmonic/commands.hpp"
#include "subharmonic/errors.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace subharmonic;
namespace fs = std::filesystem;

namespace {

ScenarioConfig parse(const std::string& text) {
  std::istringstream in(text);
  return build_scenario(parse_key_values(in));
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("subharmonic_test_" + name);
  fs::remove_all(dir);
  return dir;
}

const char* kMinimal = "params.k = 1\nparams.l = 2\nparams.g = 1\ninitial.n_a = 10\n";

}  // namespace

TEST_CASE("key/value parsing") {
  std::istringstream in("# comment\n  params.k = 2  # trailing\n\nparams.l=1\n");
  const auto kv = parse_key_values(in);
  CHECK(kv.at("params.k") == "2");
  CHECK(kv.at("params.l") == "1");

  std::istringstream dup("params.k = 1\nparams.k = 2\n");
  CHECK_THROWS_AS(parse_key_values(dup), ValidationError);
  std::istringstream junk("params.k\n");
  CHECK_THROWS_AS(parse_key_values(junk), ValidationError);
}

TEST_CASE("scenario validation") {
  const auto cfg = parse(kMinimal);
  CHECK(cfg.params.k == 1);
  CHECK(cfg.pump_occupation() == doctest::Approx(10.0));
  CHECK(cfg.duration() == doctest::Approx(30.0 / std::sqrt(160.0)));

  CHECK_THROWS_AS(parse("params.k = 0\nparams.l = 2\nparams.g = 1\ninitial.n_a = 10\n"), ValidationError);
  CHECK_THROWS_AS(parse(std::string(kMinimal) + "params.colour = red\n"), ValidationError);
  CHECK_THROWS_AS(parse(std::string(kMinimal) + "initial.alpha = 2\n"), ValidationError);
  CHECK_THROWS_AS(parse(std::string(kMinimal) + "times.samples = many\n"), ValidationError);
  CHECK_THROWS_AS(parse(std::string(kMinimal) + "truncation.mode = explicit\n"), ValidationError);
  CHECK_THROWS_AS(parse(std::string(kMinimal) + "integrator.tol = -1\n"), ValidationError);
  CHECK_THROWS_AS(parse("params.k = 1\nparams.l = 2\nparams.g = 1\ninitial.n_a = 10\ninitial.beta = 1.5\n"),
                  ValidationError);

  const auto exp = parse(std::string(kMinimal) + "truncation.mode = explicit\ntruncation.n_a_max = 40\ntruncation.n_b_max = 60\n");
  REQUIRE(exp.explicit_truncation);
  CHECK(exp.explicit_truncation->n_b_max == 60);
}

TEST_CASE("presets") {
  CHECK(build_scenario(preset_entries("fig1a")).pump_occupation() == doctest::Approx(10.0));
  CHECK(build_scenario(preset_entries("fig1b")).pump_occupation() == doctest::Approx(69.0));
  CHECK(build_scenario(preset_entries("positronium")).params.g == 8e9);
  CHECK_THROWS_AS(preset_entries("fig2"), ValidationError);
}

TEST_CASE("csv numbers round-trip bit-exactly") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-300, 300);
  CsvTable table;
  table.comments = {"a = 1", "b = two"};
  table.header = kTraceColumns;
  for (int r = 0; r < 300; ++r) {
    std::vector<std::optional<double>> row;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (r % 17 == 3 && c == 4) {
        row.push_back(std::nullopt);
      } else {
        row.push_back(std::ldexp(mant(rng), expo(rng)));
      }
    }
    table.rows.push_back(row);
  }
  table.rows.push_back({0.0, -0.0, 5e-324, 1.7976931348623157e308, 0.1, 1.0 / 3.0, 1e22});
  std::istringstream in(to_csv_string(table));
  const auto back = read_csv(in);
  CHECK(back.comments == table.comments);
  CHECK(back.header == table.header);
  REQUIRE(back.rows.size() == table.rows.size());
  bool exact = true;
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      const auto& a = table.rows[r][c];
      const auto& b = back.rows[r][c];
      if (a.has_value() != b.has_value() || (a && std::memcmp(&*a, &*b, sizeof(double)) != 0)) exact = false;
    }
  CHECK(exact);
}

TEST_CASE("csv reader rejects malformed input") {
  std::istringstream ragged("t,n_b\n1,2,3\n");
  CHECK_THROWS_AS(read_csv(ragged), ValidationError);
  std::istringstream text("t,n_b\n1,abc\n");
  CHECK_THROWS_AS(read_csv(text), ValidationError);
}

TEST_CASE("simulate writes the trace schema with metadata") {
  const auto dir = scratch_dir("simulate");
  auto cfg = parse(std::string(kMinimal) + "times.samples = 40\n");
  std::ostringstream sink;
  CommandContext ctx{&sink, dir.string(), false, 1};
  cmd_simulate(cfg, ctx);
  std::ifstream in(dir / "simulate.csv");
  const auto table = read_csv(in);
  CHECK(table.header == kTraceColumns);
  CHECK(table.rows.size() == 40);
  bool has_version = false, has_trunc = false, has_k = false;
  for (const auto& c : table.comments) {
    has_version |= c.rfind("tool_version", 0) == 0;
    has_trunc |= c.rfind("truncation = ", 0) == 0;
    has_k |= c == "params.k = 1";
  }
  CHECK(has_version);
  CHECK(has_trunc);
  CHECK(has_k);
  const double q0 = *table.rows.front()[6];
  double peak = 0.0;
  for (const auto& row : table.rows) {
    CHECK(std::abs(*row[6] - q0) < 1e-8 * q0);
    peak = std::max(peak, *row[2]);
  }
  // Rises from zero, then turns over.
  CHECK(*table.rows[1][2] > 0.0);
  CHECK(*table.rows.back()[2] < peak);
  fs::remove_all(dir);
}

TEST_CASE("simulate at t_end = 0 gives one row") {
  std::ostringstream out;
  cmd_simulate(parse(std::string(kMinimal) + "times.t_end = 0\n"), {&out, std::nullopt, false, 1});
  std::istringstream in(out.str());
  const auto table = read_csv(in);
  REQUIRE(table.rows.size() == 1);
  CHECK(*table.rows[0][1] == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(*table.rows[0][2] == 0.0);
}

TEST_CASE("validation failure leaves no output") {
  const auto dir = scratch_dir("invalid");
  const auto cfg = parse("params.k = 1\nparams.l = 3\nparams.g = 1\ninitial.n_a = 10\ninitial.beta = 1\n");
  std::ostringstream sink;
  CHECK_THROWS_AS(cmd_analytic(cfg, {&sink, dir.string(), false, 1}), ValidationError);
  CHECK_FALSE(fs::exists(dir));
  CHECK(sink.str().empty());
}

TEST_CASE("analytic output") {
  SUBCASE("l = 2 follows (cosh - 1)/2 with empty non-analytic columns") {
    std::ostringstream out;
    cmd_analytic(parse(std::string(kMinimal) + "times.samples = 11\n"), {&out, std::nullopt, false, 1});
    std::istringstream in(out.str());
    const auto table = read_csv(in);
    CHECK(table.header == kTraceColumns);
    for (const auto& row : table.rows) {
      CHECK(*row[2] == doctest::Approx(0.5 * (std::cosh(std::sqrt(160.0) * *row[0]) - 1.0)).epsilon(1e-12));
      CHECK_FALSE(row[1].has_value());
      CHECK_FALSE(row[6].has_value());
    }
  }
  SUBCASE("l >= 3 is flagged as small-time only") {
    std::ostringstream out;
    cmd_analytic(parse("params.k = 1\nparams.l = 3\nparams.g = 0.01\ninitial.n_a = 100\n"), {&out, std::nullopt, false, 1});
    CHECK(out.str().find("valid only for g*t <= 0.1") != std::string::npos);
  }
}

TEST_CASE("compare with decoupled modes has zero difference") {
  std::ostringstream out;
  const auto summaries = cmd_compare(parse("params.k = 1\nparams.l = 2\nparams.g = 0\ninitial.n_a = 10\ntimes.t_end = 3\n"),
                                     {&out, std::nullopt, false, 1});
  REQUIRE(summaries.size() == 1);
  CHECK(summaries[0].max_rel_diff == 0.0);
  CHECK_FALSE(summaries[0].divergence_t);
}

TEST_CASE("compare presets run k = 1, 2, 3 into separate files") {
  const auto dir = scratch_dir("compare");
  std::ostringstream out;
  auto cfg = load_scenario(std::nullopt, std::string("fig1a"));
  const auto summaries = cmd_compare(cfg, {&out, dir.string(), false, 1});
  REQUIRE(summaries.size() == 3);
  for (int k = 1; k <= 3; ++k) {
    std::ifstream in(dir / ("fig1a_k" + std::to_string(k) + ".csv"));
    const auto table = read_csv(in);
    CHECK(table.header.size() == 8);
    CHECK(table.header[1] == "g_t");
    CHECK(table.header[2] == "sqrt_c_t");
    CHECK(table.header[6] == "numeric_over_na");
  }
  CHECK(summaries[0].divergence_scaled_t.has_value());
  fs::remove_all(dir);
}

TEST_CASE("sweep input validation") {
  std::ostringstream out;
  CHECK_THROWS_AS(cmd_sweep(parse(kMinimal), {&out, std::nullopt, false, 1}), ValidationError);
  CHECK_THROWS_AS(cmd_sweep(parse("params.k = 1\nparams.l = 1\nparams.g = 1\ninitial.n_a = 10\nsweep.n_a = 4,8\n"),
                            {&out, std::nullopt, false, 1}),
                  ValidationError);
}

TEST_CASE("sweep fits every point and writes per-point files") {
  const auto dir = scratch_dir("sweep");
  std::ostringstream out;
  const auto cfg = parse("params.k = 1\nparams.l = 2\nparams.g = 1\ninitial.n_a = 10\nsweep.n_a = 10, 20, 30\n");
  const auto summary = cmd_sweep(cfg, {&out, dir.string(), false, 3});
  CHECK(summary.failures == 0);
  REQUIRE(summary.exponents.size() == 1);
  CHECK(summary.exponents[0].second.exponent == doctest::Approx(0.5).epsilon(0.15));
  CHECK(fs::exists(dir / "sweep.csv"));
  CHECK(fs::exists(dir / "sweep_k1_na20.csv"));
  fs::remove_all(dir);
}

TEST_CASE("constants table") {
  std::ostringstream out;
  cmd_constants(1e20, out);
  const auto text = out.str();
  CHECK(text.find("0.936e-20") != std::string::npos);
  const auto pos = text.find("dirac_gain_per_s = ");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(text.substr(pos + 19)) == doctest::Approx(2.806e10).epsilon(1e-3));
  std::ostringstream zero;
  cmd_constants(0.0, zero);
  CHECK(zero.str().find("dirac_gain_per_s = 0\n") != std::string::npos);
}

TEST_CASE("closed form separates earlier in g t for the larger pump") {
  const auto run = [](double n_a) {
    std::ostringstream out;
    const auto cfg = parse("params.k = 1\nparams.l = 2\nparams.g = 1\ninitial.n_a = " + std::to_string(n_a) +
                           "\ntimes.t_end = 0.4\ntimes.samples = 401\n");
    return cmd_compare(cfg, {&out, std::nullopt, false, 1}).at(0);
  };
  const auto small = run(10.0);
  const auto large = run(69.0);
  REQUIRE(small.divergence_t);
  REQUIRE(large.divergence_t);
  CHECK(*large.divergence_t < *small.divergence_t);
}
