#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace btm {

/// Robbins-Monro step size rho_t = 1 / (t + offset)^kappa, t = 0, 1, ...
///
/// SCVB0 uses offset = tau; the per-word SDM counters use offset = 1.
struct StepSchedule {
  double offset = 1.0;
  double kappa = 0.51;

  double operator()(std::uint64_t t) const { return std::pow(static_cast<double>(t) + offset, -kappa); }

  /// sum_{t<T} rho_t and sum_{t<T} rho_t^2.
  struct PrefixSums {
    double linear = 0.0;
    double square = 0.0;
  };

  PrefixSums prefix_sums(std::uint64_t T) const {
    PrefixSums s;
    for (std::uint64_t t = 0; t < T; ++t) {
      const double r = (*this)(t);
      s.linear += r;
      s.square += r * r;
    }
    return s;
  }

  /// Integral lower bound for sum_{t<T} rho_t (rho decreasing):
  /// int_0^T (x + offset)^-kappa dx. Grows without bound for kappa <= 1.
  double linear_lower_bound(std::uint64_t T) const {
    const double hi = static_cast<double>(T) + offset;
    if (kappa == 1.0) return std::log(hi / offset);
    return (std::pow(hi, 1.0 - kappa) - std::pow(offset, 1.0 - kappa)) / (1.0 - kappa);
  }

  /// Upper bound on sum_{t>=T} rho_t^2 = int_{T-1}^inf (x + offset)^{-2 kappa} dx,
  /// finite for kappa > 1/2. Requires T + offset > 1.
  double square_tail_bound(std::uint64_t T) const {
    if (!(kappa > 0.5)) throw std::domain_error("square_tail_bound: needs kappa > 1/2");
    const double lo = static_cast<double>(T) - 1.0 + offset;
    if (!(lo > 0.0)) throw std::domain_error("square_tail_bound: T + offset must exceed 1");
    return std::pow(lo, 1.0 - 2.0 * kappa) / (2.0 * kappa - 1.0);
  }
};

}  // namespace btm
