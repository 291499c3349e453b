#pragma once

// Power-sweep data reduction: weighted quadratic fits Sc = a P^2 + b P + c
// separating pair generation (quadratic in pump power) from noise photons
// (linear), the CAR-versus-coincidence theoretical curve built from the fitted
// rate formulas, and g2-versus-CAR overlay curves.
//
// The least-squares solve uses a column-pivoted Householder QR of the
// weighted design matrix; power ranges spanning decades make the Vandermonde
// design ill-conditioned, so the normal equations are never formed directly.

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hsps/errors.hpp"
#include "hsps/pair_distribution.hpp"
#include "hsps/stats.hpp"

namespace hsps {

struct PowerSweepPoint {
  double peak_power_w = 0.0;
  double sc_signal_hz = 0.0;
  double sc_idler_hz = 0.0;
  double cc_hz = 0.0;  // true (excess) coincidence rate
  // optional per-point variances; default weighting is Poisson, 1/max(rate,1)
  std::optional<double> var_signal;
  std::optional<double> var_idler;
  std::optional<double> var_cc;
};

enum class FitChannel { signal, idler, coincidence };
enum class FitForm {
  full_quadratic,           // a P^2 + b P + c
  quadratic_plus_constant,  // a P^2 + c (true coincidences have no linear term)
};

struct FitResult {
  double a = 0.0;  // Hz/W^2
  double b = 0.0;  // Hz/W
  double c = 0.0;  // Hz
  double covariance[3][3] = {};
  double residual_norm = 0.0;
  double domain_min = 0.0;
  double domain_max = 0.0;
  FitForm form = FitForm::full_quadratic;

  double eval(double power_w) const { return a * power_w * power_w + b * power_w + c; }
  bool in_domain(double power_w) const { return power_w >= domain_min && power_w <= domain_max; }
};

inline FitResult fit_quadratic(std::span<const PowerSweepPoint> points, FitChannel channel,
                               double max_power_w = std::numeric_limits<double>::infinity(),
                               std::optional<FitForm> form_opt = std::nullopt,
                               bool unweighted = false) {
  const FitForm form = form_opt.value_or(channel == FitChannel::coincidence
                                             ? FitForm::quadratic_plus_constant
                                             : FitForm::full_quadratic);
  struct Row {
    double p, y, w;
  };
  std::vector<Row> rows;
  std::vector<double> distinct;
  for (const auto& pt : points) {
    if (!(pt.peak_power_w > 0.0))
      throw parameter_domain_error("fit_quadratic: peak_power must be > 0");
    if (pt.peak_power_w > max_power_w) continue;
    double y, w;
    std::optional<double> var;
    switch (channel) {
      case FitChannel::signal: y = pt.sc_signal_hz; var = pt.var_signal; break;
      case FitChannel::idler: y = pt.sc_idler_hz; var = pt.var_idler; break;
      default: y = pt.cc_hz; var = pt.var_cc; break;
    }
    if (!(y >= 0.0)) throw parameter_domain_error("fit_quadratic: rates must be >= 0");
    if (unweighted) w = 1.0;
    else if (var) w = 1.0 / *var;
    else w = 1.0 / std::max(y, 1.0);  // Poisson
    rows.push_back({pt.peak_power_w, y, w});
    bool seen = false;
    for (double d : distinct) seen = seen || d == pt.peak_power_w;
    if (!seen) distinct.push_back(pt.peak_power_w);
  }
  if (rows.size() < 4)
    throw fit_degeneracy_error("fit_quadratic: need >= 4 points within the fit domain, have " +
                               std::to_string(rows.size()));
  if (distinct.size() < 3)
    throw fit_degeneracy_error("fit_quadratic: need >= 3 distinct powers, have " +
                               std::to_string(distinct.size()));

  const int k = form == FitForm::full_quadratic ? 3 : 2;
  Eigen::MatrixXd design(rows.size(), k);
  Eigen::VectorXd target(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    const double sw = std::sqrt(rows[i].w);
    const double p = rows[i].p;
    design(long(i), 0) = sw * p * p;
    if (k == 3) {
      design(long(i), 1) = sw * p;
      design(long(i), 2) = sw;
    } else {
      design(long(i), 1) = sw;
    }
    target(long(i)) = sw * rows[i].y;
  }

  // column equilibration keeps decade-spanning power grids well conditioned
  Eigen::VectorXd col_scale(k);
  for (int j = 0; j < k; ++j) {
    double norm = design.col(j).norm();
    col_scale(j) = norm > 0.0 ? 1.0 / norm : 1.0;
    design.col(j) *= col_scale(j);
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < k) throw fit_degeneracy_error("fit_quadratic: rank-deficient design");
  Eigen::VectorXd coef = qr.solve(target);

  // cov = (A^T W A)^-1 from the R factor: P R^-1 R^-T P^T
  Eigen::MatrixXd r_upper =
      qr.matrixR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
  Eigen::MatrixXd r_inv = r_upper.inverse();
  Eigen::MatrixXd cov_k = r_inv * r_inv.transpose();
  Eigen::MatrixXd perm = qr.colsPermutation();
  cov_k = perm * cov_k * perm.transpose();
  const double scaled_residual = (design * coef - target).norm();
  for (int i = 0; i < k; ++i) {
    coef(i) *= col_scale(i);
    for (int j = 0; j < k; ++j) cov_k(i, j) *= col_scale(i) * col_scale(j);
  }

  FitResult fit;
  fit.form = form;
  if (k == 3) {
    fit.a = coef(0);
    fit.b = coef(1);
    fit.c = coef(2);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) fit.covariance[i][j] = cov_k(i, j);
  } else {
    fit.a = coef(0);
    fit.b = 0.0;
    fit.c = coef(1);
    fit.covariance[0][0] = cov_k(0, 0);
    fit.covariance[0][2] = fit.covariance[2][0] = cov_k(0, 1);
    fit.covariance[2][2] = cov_k(1, 1);
  }
  fit.residual_norm = scaled_residual;
  fit.domain_min = rows[0].p;
  fit.domain_max = rows[0].p;
  for (const auto& r : rows) {
    fit.domain_min = std::min(fit.domain_min, r.p);
    fit.domain_max = std::max(fit.domain_max, r.p);
  }
  return fit;
}

// Fraction of the fitted singles rate contributed by non-pair terms:
// (b P + c) / (a P^2 + b P + c).
inline double noise_fraction(const FitResult& fit, double power_w) {
  if (!fit.in_domain(power_w))
    throw parameter_domain_error("noise_fraction: power outside the fitted domain");
  const double total = fit.eval(power_w);
  if (!(total > 0.0)) throw estimator_undefined_error("noise_fraction: fitted rate <= 0");
  return (fit.b * power_w + fit.c) / total;
}

struct CarCurvePoint {
  double power_w;
  double cc_hz;
  double car;
};

// Theoretical CAR versus coincidence rate, evaluated from fitted singles and
// coincidence rate formulas via CAR = Cc R/(Sc_s Sc_i) + 1.
inline std::vector<CarCurvePoint> car_curve(const FitResult& fit_signal,
                                            const FitResult& fit_idler,
                                            const FitResult& fit_cc, double rep_rate_hz,
                                            std::span<const double> powers_w) {
  if (!(rep_rate_hz > 0.0)) throw parameter_domain_error("car_curve: rep_rate must be > 0");
  std::vector<CarCurvePoint> out;
  out.reserve(powers_w.size());
  for (double p : powers_w) {
    if (!fit_signal.in_domain(p) || !fit_idler.in_domain(p) || !fit_cc.in_domain(p))
      throw parameter_domain_error("car_curve: power outside the shared fit domain");
    const double cc = fit_cc.eval(p);
    out.push_back({p, cc, car_practical(std::max(cc, 0.0), fit_signal.eval(p),
                                        fit_idler.eval(p), rep_rate_hz)});
  }
  return out;
}

// Maps CAR values through the heralded-g2 limit for the requested law.
inline std::vector<std::pair<double, double>> g2_car_overlay(std::span<const double> car_values,
                                                             PairLaw kind) {
  std::vector<std::pair<double, double>> out;
  out.reserve(car_values.size());
  for (double car : car_values) out.emplace_back(car, g2_from_car(car, kind));
  return out;
}

// --- sweep CSV: "peak_power_w,sc_signal_hz,sc_idler_hz,cc_hz" -------------

inline void write_sweep_csv(std::ostream& os, std::span<const PowerSweepPoint> points,
                            const std::string& config_digest = {}, double rep_rate_hz = 0.0) {
  if (!config_digest.empty()) os << "# config_digest=" << config_digest << "\n";
  if (rep_rate_hz > 0.0) {
    char rbuf[64];
    std::snprintf(rbuf, sizeof(rbuf), "%.17g", rep_rate_hz);
    os << "# rep_rate_hz=" << rbuf << "\n";
  }
  os << "peak_power_w,sc_signal_hz,sc_idler_hz,cc_hz\n";
  char buf[256];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", p.peak_power_w, p.sc_signal_hz,
                  p.sc_idler_hz, p.cc_hz);
    os << buf;
  }
}

inline std::vector<PowerSweepPoint> read_sweep_csv(std::istream& is,
                                                   std::string* config_digest = nullptr,
                                                   double* rep_rate_hz = nullptr) {
  std::vector<PowerSweepPoint> out;
  std::string line;
  size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto pos = line.find("config_digest=");
      if (pos != std::string::npos && config_digest) *config_digest = line.substr(pos + 14);
      pos = line.find("rep_rate_hz=");
      if (pos != std::string::npos && rep_rate_hz) *rep_rate_hz = std::stod(line.substr(pos + 12));
      continue;
    }
    if (!header_seen) {
      if (line.rfind("peak_power_w", 0) != 0)
        throw format_error("sweep csv line " + std::to_string(line_no) +
                           ": expected header 'peak_power_w,sc_signal_hz,sc_idler_hz,cc_hz'");
      header_seen = true;
      continue;
    }
    PowerSweepPoint p;
    double* fields[4] = {&p.peak_power_w, &p.sc_signal_hz, &p.sc_idler_hz, &p.cc_hz};
    size_t pos = 0;
    for (int f = 0; f < 4; ++f) {
      size_t comma = f < 3 ? line.find(',', pos) : line.size();
      if (comma == std::string::npos)
        throw format_error("sweep csv line " + std::to_string(line_no) + ": expected 4 columns");
      try {
        *fields[f] = std::stod(line.substr(pos, comma - pos));
      } catch (const std::exception&) {
        throw format_error("sweep csv line " + std::to_string(line_no) + ": bad number '" +
                           line.substr(pos, comma - pos) + "'");
      }
      pos = comma + 1;
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace hsps
