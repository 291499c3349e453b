#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "hsps/errors.hpp"

namespace hsps {

enum class PairLaw { poissonian, thermal_like, explicit_table };

inline const char* to_string(PairLaw k) {
  switch (k) {
    case PairLaw::poissonian: return "poissonian";
    case PairLaw::thermal_like: return "thermal_like";
    case PairLaw::explicit_table: return "explicit_table";
  }
  return "?";
}

// Per-pulse photon-pair number law. Poissonian: P(n) = e^-mu mu^n / n!.
// Thermal-like: P(n) = mu^n / (mu+1)^(n+1). Explicit tables carry P(0..N)
// directly; their mean is computed from the table.
class PairDistribution {
 public:
  static PairDistribution poissonian(double mu) {
    check_mu(mu);
    return PairDistribution(PairLaw::poissonian, mu, {});
  }

  static PairDistribution thermal_like(double mu) {
    check_mu(mu);
    return PairDistribution(PairLaw::thermal_like, mu, {});
  }

  static PairDistribution explicit_table(std::vector<double> table) {
    if (table.empty()) throw parameter_domain_error("pair table: empty");
    double sum = 0.0;
    for (double p : table) {
      if (!(p >= 0.0)) throw parameter_domain_error("pair table: negative entry");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw parameter_domain_error("pair table: probabilities sum to " + std::to_string(sum) +
                                   ", expected 1 within 1e-9");
    double mean = 0.0;
    for (size_t n = 0; n < table.size(); ++n) mean += double(n) * table[n];
    return PairDistribution(PairLaw::explicit_table, mean, std::move(table));
  }

  PairLaw kind() const { return kind_; }
  double mu() const { return mu_; }
  const std::vector<double>& table() const { return table_; }

  // Mean pairs per pulse (the mu of Eq.-level rate formulas).
  double mean() const { return mu_; }

  double probability_of(size_t n) const {
    switch (kind_) {
      case PairLaw::poissonian:
        if (mu_ == 0.0) return n == 0 ? 1.0 : 0.0;
        return std::exp(-mu_ + double(n) * std::log(mu_) - std::lgamma(double(n) + 1.0));
      case PairLaw::thermal_like:
        if (mu_ == 0.0) return n == 0 ? 1.0 : 0.0;
        return std::exp(double(n) * std::log(mu_) - double(n + 1) * std::log(mu_ + 1.0));
      case PairLaw::explicit_table:
        return n < table_.size() ? table_[n] : 0.0;
    }
    return 0.0;
  }

 private:
  PairDistribution(PairLaw kind, double mu, std::vector<double> table)
      : kind_(kind), mu_(mu), table_(std::move(table)) {}

  static void check_mu(double mu) {
    if (!(mu >= 0.0) || !std::isfinite(mu))
      throw parameter_domain_error("mu: must be finite and >= 0");
  }

  PairLaw kind_;
  double mu_;
  std::vector<double> table_;
};

}  // namespace hsps
