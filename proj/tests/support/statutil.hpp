#pragma once

// Small statistical helpers for tests: regularized incomplete gamma,
// chi-square survival function, and chi-square goodness-of-fit machinery.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace statutil {

inline double gamma_p_series(double a, double x) {
  double ap = a, sum = 1.0 / a, del = sum;
  for (int i = 0; i < 10000; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x) {
  const double fpmin = std::numeric_limits<double>::min() / 1e-30;
  double b = x + 1.0 - a, c = 1.0 / fpmin, d = 1.0 / b, h = d;
  for (int i = 1; i < 10000; ++i) {
    double an = -double(i) * (double(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

// Q(a, x) = 1 - P(a, x), the upper regularized incomplete gamma.
inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q domain");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_contfrac(a, x);
}

// survival function of the chi-square distribution with df degrees of freedom
inline double chi2_sf(double stat, double df) { return gamma_q(df / 2.0, stat / 2.0); }

// Goodness-of-fit of observed counts against expected counts. Bins with small
// expectation are pooled into their neighbor. Returns (statistic, dof).
inline std::pair<double, double> chi2_gof(const std::vector<double>& observed,
                                          const std::vector<double>& expected,
                                          double min_expected = 5.0) {
  double stat = 0.0;
  int bins = 0;
  double obs_acc = 0.0, exp_acc = 0.0;
  for (size_t i = 0; i < observed.size(); ++i) {
    obs_acc += observed[i];
    exp_acc += expected[i];
    if (exp_acc >= min_expected) {
      double d = obs_acc - exp_acc;
      stat += d * d / exp_acc;
      ++bins;
      obs_acc = exp_acc = 0.0;
    }
  }
  if (exp_acc > 0.0) {  // trailing pool
    double d = obs_acc - exp_acc;
    stat += d * d / exp_acc;
    ++bins;
  }
  return {stat, double(bins - 1)};
}

inline double chi2_gof_pvalue(const std::vector<double>& observed,
                              const std::vector<double>& expected) {
  auto [stat, df] = chi2_gof(observed, expected);
  if (df < 1.0) return 1.0;
  return chi2_sf(stat, df);
}

// Two-sample homogeneity chi-square over matched count vectors.
inline double chi2_two_sample_pvalue(const std::vector<double>& a, const std::vector<double>& b) {
  double na = 0.0, nb = 0.0;
  for (double v : a) na += v;
  for (double v : b) nb += v;
  double stat = 0.0;
  int bins = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    double tot = a[i] + b[i];
    if (tot <= 0.0) continue;
    double ea = tot * na / (na + nb);
    double eb = tot * nb / (na + nb);
    stat += (a[i] - ea) * (a[i] - ea) / ea + (b[i] - eb) * (b[i] - eb) / eb;
    ++bins;
  }
  if (bins < 2) return 1.0;
  return chi2_sf(stat, double(bins - 1));
}

}  // namespace statutil
