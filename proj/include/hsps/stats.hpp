#pragma once

// Closed-form counting statistics of a pulsed heralded single-photon source:
// singles/coincidence/accidental rates, CAR, heralding efficiency and the
// heralded g2(0) family, plus the truncated-sum evaluator of the heralded g2
// under an arbitrary pair-number distribution (the brute-force reference for
// the Poissonian/thermal closed forms).
//
// All operations are pure, deterministic, double precision.

#include <cmath>
#include <cstdint>

#include "hsps/errors.hpp"
#include "hsps/pair_distribution.hpp"
#include "hsps/source_model.hpp"

namespace hsps {

// Sc = mu*eta*R + nu*eta*R + d   (pairs + noise photons + dark counts)
inline double singles_rate(const SourceModel& m, ChannelSide side) {
  m.validate();
  double eta = m.eta(side);
  return m.pair_dist.mean() * eta * m.rep_rate_hz + m.noise(side) * eta * m.rep_rate_hz +
         m.dark_hz(side);
}

// Cc = mu*eta_s*eta_i*R, scaled by the twin-survival probability: filtered-out
// twins remove coincidences without removing singles.
inline double coincidence_rate(const SourceModel& m) {
  m.validate();
  return m.pair_dist.mean() * m.eta_signal * m.eta_idler * m.rep_rate_hz * m.twin_survival;
}

// Ac = Sc_s * Sc_i / R  (uncorrelated same-window coincidences)
inline double accidental_rate(double sc_signal_hz, double sc_idler_hz, double rep_rate_hz) {
  if (!(sc_signal_hz >= 0.0) || !(sc_idler_hz >= 0.0))
    throw parameter_domain_error("accidental_rate: singles rates must be >= 0");
  if (!(rep_rate_hz > 0.0)) throw parameter_domain_error("accidental_rate: rep_rate must be > 0");
  return sc_signal_hz * sc_idler_hz / rep_rate_hz;
}

// Noise-free, loss-free CAR of a Poissonian-pumped pair source.
inline double car_ideal(double mu) {
  if (!(mu > 0.0)) throw parameter_domain_error("car_ideal: mu must be > 0");
  return 1.0 / mu + 1.0;
}

// CAR = Cc*R/(Sc_s*Sc_i) + 1 with Cc the true (excess) coincidence rate;
// equivalently total peak over accidental level, Cc/Ac + 1.
inline double car_practical(double cc_hz, double sc_signal_hz, double sc_idler_hz,
                            double rep_rate_hz) {
  if (!(sc_signal_hz > 0.0) || !(sc_idler_hz > 0.0))
    throw parameter_domain_error("car_practical: singles rates must be > 0");
  if (!(rep_rate_hz > 0.0)) throw parameter_domain_error("car_practical: rep_rate must be > 0");
  if (!(cc_hz >= 0.0)) throw parameter_domain_error("car_practical: cc must be >= 0");
  return cc_hz * rep_rate_hz / (sc_signal_hz * sc_idler_hz) + 1.0;
}

// eta_h = Cc / Sc of the heralding channel.
inline double heralding_efficiency(double cc_hz, double sc_heralding_hz) {
  if (!(sc_heralding_hz > 0.0))
    throw parameter_domain_error("heralding_efficiency: heralding singles rate must be > 0");
  if (!(cc_hz >= 0.0)) throw parameter_domain_error("heralding_efficiency: cc must be >= 0");
  return cc_hz / sc_heralding_hz;
}

// Triple-coincidence estimator g2_h(0) = C1*C123/(C12*C13). Counts may be
// fractional when the inputs are rates rather than raw tallies.
inline double g2_from_triples(double c1, double c12, double c13, double c123) {
  if (!(c12 > 0.0) || !(c13 > 0.0))
    throw estimator_undefined_error("g2_from_triples: two-fold counts must be > 0");
  if (!(c1 >= 0.0) || !(c123 >= 0.0))
    throw parameter_domain_error("g2_from_triples: counts must be >= 0");
  return c1 * c123 / (c12 * c13);
}

// g2_h(0) = 1 - 1/(mu+1)^2 for a Poissonian pair-number distribution,
// evaluated as mu(mu+2)/(mu+1)^2 to stay exact at small mu.
inline double g2_heralded_poissonian(double mu) {
  if (!(mu >= 0.0)) throw parameter_domain_error("g2_heralded_poissonian: mu must be >= 0");
  double s = mu + 1.0;
  return mu * (mu + 2.0) / (s * s);
}

// g2_h(0) = (6 mu^2 + 4 mu)/(2 mu + 1)^2 for a thermal-like distribution.
inline double g2_heralded_thermal(double mu) {
  if (!(mu >= 0.0)) throw parameter_domain_error("g2_heralded_thermal: mu must be >= 0");
  double s = 2.0 * mu + 1.0;
  return (6.0 * mu * mu + 4.0 * mu) / (s * s);
}

// General-distribution heralded g2(0) evaluated by truncated sums:
//
//   g2 = [sum n^2(n-1) P(n)] * [sum n P(n)] / [sum n^2 P(n)]^2
//
// The truncation point starts at max(50, 20*(mu+1), requested) and doubles
// until the appended tail mass is below 1e-15 (thermal tails decay
// geometrically with ratio mu/(mu+1) and need larger N at large mu).
inline double g2_heralded_general(const PairDistribution& dist, size_t truncation = 0) {
  size_t n_max;
  if (dist.kind() == PairLaw::explicit_table) {
    n_max = dist.table().size() - 1;  // tail is exactly zero beyond the table
  } else {
    n_max = std::max<size_t>(50, size_t(std::ceil(20.0 * (dist.mu() + 1.0))));
    n_max = std::max(n_max, truncation);
  }

  double mass = 0.0, m1 = 0.0, m2 = 0.0, m21 = 0.0;
  size_t n = 0;
  for (;;) {
    double appended = 0.0;
    for (; n <= n_max; ++n) {
      double p = dist.probability_of(n);
      double x = double(n);
      appended += p;
      m1 += x * p;
      m2 += x * x * p;
      m21 += x * x * (x - 1.0) * p;
    }
    mass += appended;
    if (dist.kind() == PairLaw::explicit_table) break;
    if (1.0 - mass < 1e-15 && n > dist.mu()) break;
    n_max *= 2;
  }

  if (!(m2 > 0.0))
    throw estimator_undefined_error("g2_heralded_general: distribution has no n>0 mass");
  return m21 * m1 / (m2 * m2);
}

// Inverse of the ideal CAR relation: mu = 1/(CAR - 1).
inline double mu_from_car(double car) {
  if (!(car > 1.0)) throw parameter_domain_error("mu_from_car: CAR must be > 1");
  return 1.0 / (car - 1.0);
}

// Heralded g2(0) limit at a given CAR, using mu = 1/(CAR-1):
// Poissonian: (2 CAR - 1)/CAR^2;  thermal-like: (4 CAR + 2)/(CAR + 1)^2.
inline double g2_from_car(double car, PairLaw kind) {
  if (!(car > 1.0)) throw parameter_domain_error("g2_from_car: CAR must be > 1");
  switch (kind) {
    case PairLaw::poissonian: return (2.0 * car - 1.0) / (car * car);
    case PairLaw::thermal_like: return (4.0 * car + 2.0) / ((car + 1.0) * (car + 1.0));
    default:
      throw parameter_domain_error("g2_from_car: distribution kind must be poissonian or thermal_like");
  }
}

// P_ave = P_peak * pulse_width * rep_rate
inline double average_power(double peak_power_w, double pulse_width_s, double rep_rate_hz) {
  if (!(peak_power_w >= 0.0) || !(pulse_width_s >= 0.0) || !(rep_rate_hz >= 0.0))
    throw parameter_domain_error("average_power: inputs must be >= 0");
  return peak_power_w * pulse_width_s * rep_rate_hz;
}

}  // namespace hsps
