#include "subharmonic/config.hpp"

#include "subharmonic/analytic.hpp"
#include "subharmonic/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace subharmonic {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "params.k",        "params.l",          "params.g",
      "params.eps_a",    "params.eps_b",      "initial.alpha",
      "initial.alpha_im", "initial.n_a",      "initial.fock_a",
      "initial.beta",    "truncation.mode",   "truncation.n_a_max",
      "truncation.n_b_max", "times.t_end",    "times.samples",
      "integrator.tol",  "integrator.max_norm_drift", "integrator.step",
      "outputs.csv",     "outputs.dir",       "sweep.n_a",
      "sweep.k",         "sweep.horizon",     "certify.growth_factor",
      "certify.tol",     "preset",
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ValidationError(key + ": expected a finite number, got '" + text + "'");
  }
  return value;
}

long long parse_integer(const std::string& key, const std::string& text) {
  long long value = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ValidationError(key + ": expected an integer, got '" + text + "'");
  return value;
}

std::size_t parse_count(const std::string& key, const std::string& text) {
  const long long v = parse_integer(key, text);
  if (v < 0) throw ValidationError(key + " must be >= 0");
  return static_cast<std::size_t>(v);
}

std::vector<std::string> split_list(const std::string& key, const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ValidationError(key + ": empty list element");
    items.push_back(item);
  }
  return items;
}

class Reader {
 public:
  explicit Reader(const KeyValues& entries) : entries_(entries) {}

  const std::string* find(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }
  std::optional<double> number(const std::string& key) const {
    const auto* v = find(key);
    return v ? std::optional(parse_double(key, *v)) : std::nullopt;
  }
  std::optional<long long> integer(const std::string& key) const {
    const auto* v = find(key);
    return v ? std::optional(parse_integer(key, *v)) : std::nullopt;
  }

 private:
  const KeyValues& entries_;
};

}  // namespace

double ScenarioConfig::default_duration() const {
  const double n_a = pump_occupation();
  const auto c = analytic::gain_coefficients(params, n_a);
  double scale = 0.0;
  if (params.l == 1) {
    scale = c.c1 > 0.0 ? 2.0 * (2.0 * std::numbers::pi / std::sqrt(c.c1)) : 0.0;
  } else if (params.l == 2) {
    scale = c.c2 != 0.0 ? 30.0 / std::sqrt(std::abs(c.c2)) : 0.0;
  } else {
    scale = c.c_bar > 0.0 ? 1.0 / std::sqrt(c.c_bar) : 0.0;
  }
  return scale > 0.0 ? scale : 1.0;
}

KeyValues preset_entries(const std::string& name) {
  KeyValues base = {{"params.k", "1"},     {"params.l", "2"},     {"params.eps_a", "0"},
                    {"params.eps_b", "0"}, {"initial.beta", "0"}, {"preset", name}};
  if (name == "fig1a" || name == "fig1b") {
    base["params.g"] = "1";
    base["initial.n_a"] = name == "fig1a" ? "10" : "69";
    return base;
  }
  if (name == "positronium") {
    std::ostringstream g;
    g << analytic::ps_coupling();
    base["params.g"] = g.str();
    base["initial.n_a"] = "10";
    return base;
  }
  throw ValidationError("unknown preset '" + name + "' (expected fig1a, fig1b or positronium)");
}

KeyValues parse_key_values(std::istream& in, const std::string& origin) {
  KeyValues out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(number);
    if (eq == std::string::npos) throw ValidationError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ValidationError(where + ": empty key or value");
    if (!out.emplace(key, value).second) throw ValidationError(where + ": duplicate key '" + key + "'");
  }
  return out;
}

ScenarioConfig build_scenario(const KeyValues& entries) {
  for (const auto& [key, value] : entries) {
    if (!known_keys().contains(key)) throw ValidationError("unknown config key '" + key + "'");
  }
  const Reader r(entries);
  ScenarioConfig cfg;
  cfg.entries = entries;
  if (const auto* p = r.find("preset")) cfg.preset = *p;

  const auto k = r.integer("params.k");
  const auto l = r.integer("params.l");
  const auto g = r.number("params.g");
  if (!k || !l || !g) throw ValidationError("params.k, params.l and params.g are required");
  if (*k < 1 || *k > 64) throw ValidationError("params.k must be in [1, 64]");
  if (*l < 1 || *l > 64) throw ValidationError("params.l must be in [1, 64]");
  cfg.params.k = static_cast<int>(*k);
  cfg.params.l = static_cast<int>(*l);
  cfg.params.g = *g;
  cfg.params.eps_a = r.number("params.eps_a").value_or(0.0);
  cfg.params.eps_b = r.number("params.eps_b").value_or(0.0);
  cfg.params.validate();

  const auto alpha = r.number("initial.alpha");
  const auto alpha_im = r.number("initial.alpha_im");
  const auto n_a = r.number("initial.n_a");
  const auto fock_a = r.integer("initial.fock_a");
  const int pump_forms = int(alpha.has_value() || alpha_im.has_value()) + int(n_a.has_value()) + int(fock_a.has_value());
  if (pump_forms != 1) {
    throw ValidationError("exactly one of initial.alpha[/alpha_im], initial.n_a or initial.fock_a is required");
  }
  if (n_a) {
    if (*n_a < 0.0) throw ValidationError("initial.n_a must be >= 0");
    cfg.initial.mode_a = Coherent{Complex(std::sqrt(*n_a), 0.0)};
  } else if (fock_a) {
    if (*fock_a < 0) throw ValidationError("initial.fock_a must be >= 0");
    cfg.initial.mode_a = Fock{static_cast<std::size_t>(*fock_a)};
  } else {
    cfg.initial.mode_a = Coherent{Complex(alpha.value_or(0.0), alpha_im.value_or(0.0))};
  }
  const auto beta = r.integer("initial.beta").value_or(0);
  if (beta < 0) throw ValidationError("initial.beta must be >= 0");
  cfg.initial.mode_b = Fock{static_cast<std::size_t>(beta)};

  const std::string mode = r.find("truncation.mode") ? *r.find("truncation.mode") : "auto";
  const auto* na_max = r.find("truncation.n_a_max");
  const auto* nb_max = r.find("truncation.n_b_max");
  if (mode == "explicit") {
    if (!na_max || !nb_max) throw ValidationError("explicit truncation needs truncation.n_a_max and n_b_max");
    cfg.explicit_truncation = ModeTruncation{parse_count("truncation.n_a_max", *na_max),
                                             parse_count("truncation.n_b_max", *nb_max)};
    ProductBasis check(*cfg.explicit_truncation);
    (void)product_initial_state(cfg.initial, check);
  } else if (mode == "auto") {
    if (na_max || nb_max) throw ValidationError("truncation.n_a_max/n_b_max require truncation.mode = explicit");
  } else {
    throw ValidationError("truncation.mode must be 'auto' or 'explicit'");
  }

  if (const auto t = r.number("times.t_end")) {
    if (*t < 0.0) throw ValidationError("times.t_end must be >= 0");
    cfg.t_end = *t;
  }
  if (const auto* s = r.find("times.samples")) cfg.samples = parse_count("times.samples", *s);
  if (cfg.duration() > 0.0 && cfg.samples < 2) throw ValidationError("times.samples must be >= 2");

  cfg.integrator.tol = r.number("integrator.tol").value_or(cfg.integrator.tol);
  cfg.integrator.max_norm_drift = r.number("integrator.max_norm_drift").value_or(cfg.integrator.max_norm_drift);
  cfg.integrator.step = r.number("integrator.step").value_or(cfg.integrator.step);
  cfg.integrator.validate();

  if (const auto* p = r.find("outputs.csv")) cfg.csv_path = *p;
  if (const auto* p = r.find("outputs.dir")) cfg.out_dir = *p;

  if (const auto* list = r.find("sweep.n_a")) {
    for (const auto& item : split_list("sweep.n_a", *list)) {
      const double v = parse_double("sweep.n_a", item);
      if (!(v > 0.0)) throw ValidationError("sweep.n_a entries must be > 0");
      cfg.sweep_n_a.push_back(v);
    }
  }
  if (const auto* list = r.find("sweep.k")) {
    for (const auto& item : split_list("sweep.k", *list)) {
      const long long v = parse_integer("sweep.k", item);
      if (v < 1 || v > 64) throw ValidationError("sweep.k entries must be in [1, 64]");
      cfg.sweep_k.push_back(static_cast<int>(v));
    }
  }
  cfg.sweep_horizon = r.number("sweep.horizon").value_or(cfg.sweep_horizon);
  if (!(cfg.sweep_horizon > 0.0)) throw ValidationError("sweep.horizon must be > 0");

  cfg.certify_growth = r.number("certify.growth_factor").value_or(cfg.certify_growth);
  cfg.certify_tol = r.number("certify.tol").value_or(cfg.certify_tol);
  if (!(cfg.certify_growth > 1.0)) throw ValidationError("certify.growth_factor must be > 1");
  if (!(cfg.certify_tol > 0.0)) throw ValidationError("certify.tol must be > 0");
  return cfg;
}

ScenarioConfig load_scenario(const std::optional<std::string>& config_path,
                             const std::optional<std::string>& preset) {
  KeyValues merged;
  if (preset) merged = preset_entries(*preset);
  if (config_path) {
    std::ifstream in(*config_path);
    if (!in) throw ValidationError("cannot open config file '" + *config_path + "'");
    for (auto& [key, value] : parse_key_values(in, *config_path)) merged[key] = value;
  }
  if (merged.empty()) throw ValidationError("either --config or --preset is required");
  return build_scenario(merged);
}

}  // namespace subharmonic
