#pragma once

// Measured quantities with independent-Poisson error propagation on raw
// counts. The accidental level is the mean of all off-zero pulse-offset bins
// within the tally window; CAR is total zero-delay peak over that level.

#include <cmath>
#include <limits>

#include "hsps/errors.hpp"
#include "hsps/source_model.hpp"
#include "hsps/tally.hpp"

namespace hsps {

struct EstimateWithError {
  enum class Bound { none, lower, upper };

  double value = 0.0;
  double std_error = 0.0;
  Bound bound = Bound::none;  // set when the data only constrains one side
  double bound_value = std::numeric_limits<double>::quiet_NaN();
};

// CAR = histogram[0] / mean(histogram[delta != 0]).
// All accidental bins empty: the data gives only a lower bound (flagged).
inline EstimateWithError estimate_car(const CoincidenceTally& t) {
  if (t.window < 1) throw parameter_domain_error("estimate_car: tally window must be >= 1");
  const double h0 = double(t.zero_delay());
  const double off = double(t.off_zero_total());
  EstimateWithError e;
  if (off == 0.0) {
    e.value = h0;
    e.std_error = std::sqrt(h0);
    e.bound = EstimateWithError::Bound::lower;
    e.bound_value = h0;
    return e;
  }
  const double mean_off = off / double(2 * t.window);
  e.value = h0 / mean_off;
  // independent Poisson errors on the peak and on the pooled accidental bins
  e.std_error = std::sqrt(h0 + h0 * h0 / off) / mean_off;
  return e;
}

// g2_h(0) = C1*C123/(C12*C13) with Poisson propagation. When no three-folds
// were seen the estimate degenerates to an upper bound at C123 = 1.
inline EstimateWithError estimate_g2h(const CoincidenceTally& t) {
  if (t.c12 == 0 || t.c13 == 0)
    throw estimator_undefined_error("estimate_g2h: zero two-fold counts");
  const double c1 = double(t.c1), c12 = double(t.c12), c13 = double(t.c13),
               c123 = double(t.c123);
  EstimateWithError e;
  if (t.c123 == 0) {
    e.value = 0.0;
    e.std_error = 0.0;
    e.bound = EstimateWithError::Bound::upper;
    e.bound_value = c1 * 1.0 / (c12 * c13);
    return e;
  }
  e.value = c1 * c123 / (c12 * c13);
  e.std_error = e.value * std::sqrt(1.0 / c123 + 1.0 / c12 + 1.0 / c13 + 1.0 / c1);
  return e;
}

// eta_h = true (excess) coincidences / heralding-channel singles. The heralded
// channel names the photon being announced; its partner channel heralds, so
// heralded=idler divides by the D1 (signal) singles and heralded=signal by the
// D2 (idler) singles. Uses the D1-D2 coincidence peak in either case.
inline EstimateWithError estimate_heralding(const CoincidenceTally& t, ChannelSide heralded) {
  const double den = heralded == ChannelSide::idler ? double(t.c1) : double(t.c2);
  if (!(den > 0.0))
    throw estimator_undefined_error("estimate_heralding: zero heralding singles");
  const double h0 = double(t.zero_delay());
  const double off = double(t.off_zero_total());
  const double mean_off = off / double(2 * t.window);
  const double excess = h0 - mean_off;
  EstimateWithError e;
  e.value = excess / den;
  const double var_excess = h0 + off / double(4 * t.window * t.window);
  e.std_error = std::sqrt(var_excess / (den * den) + excess * excess / (den * den * den));
  return e;
}

}  // namespace hsps
