#pragma once

// Pump-power sweep scaling: mu follows the pump law mu = k (gamma P L)^2 and
// the per-pulse noise means scale linearly in P relative to the pump law's
// reference peak power.

#include "hsps/errors.hpp"
#include "hsps/source_model.hpp"

namespace hsps {

inline SourceModel model_at_power(const SourceModel& base, double peak_power_w) {
  if (!base.pump_law) throw parameter_domain_error("model_at_power: pump_law required");
  if (!(peak_power_w > 0.0)) throw parameter_domain_error("model_at_power: power must be > 0");
  const PumpLaw& law = *base.pump_law;
  if (!(law.peak_power_w > 0.0))
    throw parameter_domain_error("model_at_power: pump_law reference power must be > 0");
  SourceModel m = base;
  const double mu = law.mu_at(peak_power_w);
  switch (base.pair_dist.kind()) {
    case PairLaw::poissonian: m.pair_dist = PairDistribution::poissonian(mu); break;
    case PairLaw::thermal_like: m.pair_dist = PairDistribution::thermal_like(mu); break;
    default:
      throw parameter_domain_error("model_at_power: explicit tables cannot be power-scaled");
  }
  const double scale = peak_power_w / law.peak_power_w;
  m.noise_signal = base.noise_signal * scale;
  m.noise_idler = base.noise_idler * scale;
  PumpLaw at = law;
  at.peak_power_w = peak_power_w;
  m.pump_law = at;
  return m;
}

}  // namespace hsps
