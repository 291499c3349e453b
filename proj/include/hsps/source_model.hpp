#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "hsps/errors.hpp"
#include "hsps/pair_distribution.hpp"

namespace hsps {

enum class ChannelSide { signal, idler };

// mu = calib_k * (gamma * peak_power * eff_length)^2. The proportionality
// constant calib_k is a free calibration parameter, default 1.
struct PumpLaw {
  double gamma = 0.0;         // nonlinearity coefficient, 1/(W*m)
  double peak_power_w = 0.0;  // reference peak power
  double eff_length_m = 0.0;
  double calib_k = 1.0;

  double mu() const {
    double x = gamma * peak_power_w * eff_length_m;
    return calib_k * x * x;
  }

  double mu_at(double peak_power) const {
    double x = gamma * peak_power * eff_length_m;
    return calib_k * x * x;
  }
};

// Full physical parameter record of the source: pulsed pump at rep_rate_hz,
// per-pulse pair-number law, total collection efficiencies, per-pulse noise
// photon means (pre-collection), detector dark rates and the twin-survival
// probability of narrowband filtering (reduces coincidences only).
struct SourceModel {
  double rep_rate_hz = 2.5e9;
  PairDistribution pair_dist = PairDistribution::poissonian(0.0);
  double eta_signal = 1.0;
  double eta_idler = 1.0;
  double noise_signal = 0.0;  // mean noise photons per pulse, signal channel
  double noise_idler = 0.0;
  double dark_signal_hz = 0.0;
  double dark_idler_hz = 0.0;
  double twin_survival = 1.0;
  std::optional<PumpLaw> pump_law;
  double pulse_width_s = 0.0;

  void validate() const {
    check_prob(eta_signal, "eta_signal");
    check_prob(eta_idler, "eta_idler");
    check_prob(twin_survival, "twin_survival");
    check_nonneg(noise_signal, "noise_signal");
    check_nonneg(noise_idler, "noise_idler");
    check_nonneg(dark_signal_hz, "dark_signal_hz");
    check_nonneg(dark_idler_hz, "dark_idler_hz");
    check_nonneg(pulse_width_s, "pulse_width_s");
    if (!(rep_rate_hz > 0.0) || !std::isfinite(rep_rate_hz))
      throw parameter_domain_error("rep_rate_hz: must be finite and > 0");
    if (dark_signal_hz > rep_rate_hz || dark_idler_hz > rep_rate_hz)
      throw parameter_domain_error("dark rate exceeds rep_rate_hz: per-pulse dark probability > 1");
    if (pump_law) {
      double expect = pump_law->mu();
      double mu = pair_dist.mu();
      double scale = std::max(std::abs(expect), std::abs(mu));
      if (scale > 0.0 && std::abs(expect - mu) > 1e-12 * scale)
        throw parameter_domain_error("pump_law: mu inconsistent with calib_k*(gamma*P*L)^2");
    }
  }

  double eta(ChannelSide s) const { return s == ChannelSide::signal ? eta_signal : eta_idler; }
  double noise(ChannelSide s) const { return s == ChannelSide::signal ? noise_signal : noise_idler; }
  double dark_hz(ChannelSide s) const {
    return s == ChannelSide::signal ? dark_signal_hz : dark_idler_hz;
  }

 private:
  static void check_prob(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0))
      throw parameter_domain_error(std::string(name) + ": must be in [0,1]");
  }
  static void check_nonneg(double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw parameter_domain_error(std::string(name) + ": must be finite and >= 0");
  }
};

}  // namespace hsps
