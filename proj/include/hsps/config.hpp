#pragma once

// Experiment configuration: a line-oriented "key=value" document mirroring
// SourceModel + RunConfig plus analysis options. Unknown keys are errors, not
// warnings, so a stored config always reproduces the same simulation. The
// config digest covers the simulation-defining keys (analysis options and
// thread counts never change generated events).

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hsps/digest.hpp"
#include "hsps/errors.hpp"
#include "hsps/simulate.hpp"
#include "hsps/source_model.hpp"

namespace hsps {

struct ExperimentConfig {
  int schema = 1;
  double rep_rate_hz = 2.5e9;
  PairLaw pair_law = PairLaw::poissonian;
  double mu = 0.0;
  std::vector<double> pair_table;  // explicit_table only
  double eta_signal = 1.0;
  double eta_idler = 1.0;
  double noise_signal = 0.0;
  double noise_idler = 0.0;
  double dark_signal_hz = 0.0;
  double dark_idler_hz = 0.0;
  double twin_survival = 1.0;
  double pulse_width_s = 0.0;
  bool pump_law_enabled = false;
  double pump_gamma = 0.0;
  double pump_peak_power_w = 0.0;
  double pump_eff_length_m = 0.0;
  double pump_calib_k = 1.0;
  uint64_t n_pulses = 1000000;
  uint64_t seed = 1;
  Topology topology = Topology::two_detector;
  uint64_t block_size = 1u << 20;
  uint64_t dead_time_slots = 0;
  // analysis options
  int window = 10;
  double fit_max_power_w = 0.0;  // 0 = automatic saturation cutoff

  SourceModel to_model() const {
    SourceModel m;
    m.rep_rate_hz = rep_rate_hz;
    switch (pair_law) {
      case PairLaw::poissonian: m.pair_dist = PairDistribution::poissonian(mu); break;
      case PairLaw::thermal_like: m.pair_dist = PairDistribution::thermal_like(mu); break;
      case PairLaw::explicit_table:
        m.pair_dist = PairDistribution::explicit_table(pair_table);
        break;
    }
    m.eta_signal = eta_signal;
    m.eta_idler = eta_idler;
    m.noise_signal = noise_signal;
    m.noise_idler = noise_idler;
    m.dark_signal_hz = dark_signal_hz;
    m.dark_idler_hz = dark_idler_hz;
    m.twin_survival = twin_survival;
    m.pulse_width_s = pulse_width_s;
    if (pump_law_enabled) {
      PumpLaw law;
      law.gamma = pump_gamma;
      law.peak_power_w = pump_peak_power_w;
      law.eff_length_m = pump_eff_length_m;
      law.calib_k = pump_calib_k;
      m.pump_law = law;
    }
    m.validate();
    return m;
  }

  RunConfig to_run_config() const {
    RunConfig cfg;
    cfg.model = to_model();
    cfg.n_pulses = n_pulses;
    cfg.seed = seed;
    cfg.topology = topology;
    cfg.block_size = block_size;
    cfg.dead_time_slots = dead_time_slots;
    cfg.validate();
    return cfg;
  }

  std::string digest() const { return run_config_digest(to_run_config()); }
};

namespace detail {

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    double x = std::stod(v, &used);
    if (used != v.size()) throw format_error("");
    return x;
  } catch (const std::exception&) {
    throw format_error("config: bad numeric value for '" + key + "': '" + v + "'");
  }
}

inline uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    uint64_t x = std::stoull(v, &used);
    if (used != v.size()) throw format_error("");
    return x;
  } catch (const std::exception&) {
    throw format_error("config: bad integer value for '" + key + "': '" + v + "'");
  }
}

inline std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t");
  size_t e = s.find_last_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::map<std::string, bool> seen;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string s = detail::trim(line);
    if (s.empty() || s[0] == '#') continue;
    auto eq = s.find('=');
    if (eq == std::string::npos)
      throw format_error("config line " + std::to_string(line_no) + ": expected key=value");
    std::string key = detail::trim(s.substr(0, eq));
    std::string value = detail::trim(s.substr(eq + 1));
    if (seen[key])
      throw format_error("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    seen[key] = true;

    if (key == "schema") {
      if (value != "1")
        throw format_error("config: unsupported schema '" + value + "' (expected 1)");
    } else if (key == "rep_rate_hz") c.rep_rate_hz = detail::parse_double(key, value);
    else if (key == "pair_law") {
      if (value == "poissonian") c.pair_law = PairLaw::poissonian;
      else if (value == "thermal_like") c.pair_law = PairLaw::thermal_like;
      else if (value == "explicit_table") c.pair_law = PairLaw::explicit_table;
      else throw format_error("config: pair_law must be poissonian|thermal_like|explicit_table");
    } else if (key == "mu") c.mu = detail::parse_double(key, value);
    else if (key == "pair_table") {
      c.pair_table.clear();
      std::stringstream ss(value);
      std::string tok;
      while (std::getline(ss, tok, ',')) c.pair_table.push_back(detail::parse_double(key, tok));
    } else if (key == "eta_signal") c.eta_signal = detail::parse_double(key, value);
    else if (key == "eta_idler") c.eta_idler = detail::parse_double(key, value);
    else if (key == "noise_signal") c.noise_signal = detail::parse_double(key, value);
    else if (key == "noise_idler") c.noise_idler = detail::parse_double(key, value);
    else if (key == "dark_signal_hz") c.dark_signal_hz = detail::parse_double(key, value);
    else if (key == "dark_idler_hz") c.dark_idler_hz = detail::parse_double(key, value);
    else if (key == "twin_survival") c.twin_survival = detail::parse_double(key, value);
    else if (key == "pulse_width_s") c.pulse_width_s = detail::parse_double(key, value);
    else if (key == "pump_law") {
      if (value == "on") c.pump_law_enabled = true;
      else if (value == "off") c.pump_law_enabled = false;
      else throw format_error("config: pump_law must be on|off");
    } else if (key == "pump_gamma") c.pump_gamma = detail::parse_double(key, value);
    else if (key == "pump_peak_power_w") c.pump_peak_power_w = detail::parse_double(key, value);
    else if (key == "pump_eff_length_m") c.pump_eff_length_m = detail::parse_double(key, value);
    else if (key == "pump_calib_k") c.pump_calib_k = detail::parse_double(key, value);
    else if (key == "n_pulses") c.n_pulses = detail::parse_u64(key, value);
    else if (key == "seed") c.seed = detail::parse_u64(key, value);
    else if (key == "topology") {
      if (value == "two_detector") c.topology = Topology::two_detector;
      else if (value == "three_detector") c.topology = Topology::three_detector;
      else throw format_error("config: topology must be two_detector|three_detector");
    } else if (key == "block_size") c.block_size = detail::parse_u64(key, value);
    else if (key == "dead_time_slots") c.dead_time_slots = detail::parse_u64(key, value);
    else if (key == "window") c.window = int(detail::parse_u64(key, value));
    else if (key == "fit_max_power_w") c.fit_max_power_w = detail::parse_double(key, value);
    else throw format_error("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  // when the pump law drives the source, mu derives from it
  if (c.pump_law_enabled) {
    PumpLaw law;
    law.gamma = c.pump_gamma;
    law.peak_power_w = c.pump_peak_power_w;
    law.eff_length_m = c.pump_eff_length_m;
    law.calib_k = c.pump_calib_k;
    c.mu = law.mu();
  }
  return c;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  std::stringstream ss(text);
  return parse_config(ss);
}

inline std::string serialize_config(const ExperimentConfig& c) {
  std::string s;
  char buf[256];
  auto add = [&](const char* k, const std::string& v) {
    s += k;
    s += "=";
    s += v;
    s += "\n";
  };
  auto fd = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  add("schema", "1");
  add("rep_rate_hz", fd(c.rep_rate_hz));
  add("pair_law", to_string(c.pair_law));
  add("mu", fd(c.mu));
  if (c.pair_law == PairLaw::explicit_table) {
    std::string t;
    for (double p : c.pair_table) {
      if (!t.empty()) t += ",";
      t += fd(p);
    }
    add("pair_table", t);
  }
  add("eta_signal", fd(c.eta_signal));
  add("eta_idler", fd(c.eta_idler));
  add("noise_signal", fd(c.noise_signal));
  add("noise_idler", fd(c.noise_idler));
  add("dark_signal_hz", fd(c.dark_signal_hz));
  add("dark_idler_hz", fd(c.dark_idler_hz));
  add("twin_survival", fd(c.twin_survival));
  add("pulse_width_s", fd(c.pulse_width_s));
  add("pump_law", c.pump_law_enabled ? "on" : "off");
  if (c.pump_law_enabled) {
    add("pump_gamma", fd(c.pump_gamma));
    add("pump_peak_power_w", fd(c.pump_peak_power_w));
    add("pump_eff_length_m", fd(c.pump_eff_length_m));
    add("pump_calib_k", fd(c.pump_calib_k));
  }
  add("n_pulses", std::to_string(c.n_pulses));
  add("seed", std::to_string(c.seed));
  add("topology", to_string(c.topology));
  add("block_size", std::to_string(c.block_size));
  add("dead_time_slots", std::to_string(c.dead_time_slots));
  add("window", std::to_string(c.window));
  add("fit_max_power_w", fd(c.fit_max_power_w));
  return s;
}

}  // namespace hsps
