#pragma once

// Fraction defective of a normal characteristic with two-sided limits and
// its two point estimators (plug-in ML and minimum-variance unbiased).

#include <algorithm>
#include <cmath>

#include "vsplan/error.hpp"
#include "vsplan/numerics.hpp"

namespace vsplan {

struct SpecLimits {
  double lower = 0.0;
  double upper = 1.0;

  double midpoint() const { return 0.5 * (lower + upper); }
  double width() const { return upper - lower; }
  void validate() const {
    if (!(lower < upper) || !std::isfinite(lower) || !std::isfinite(upper))
      throw DomainError("SpecLimits: need finite L < U");
  }
};

/// Sample size, mean and (n-1)-divisor standard deviation of one sample.
struct SampleStats {
  int n = 0;
  double mean = 0.0;
  double sd = 0.0;

  void validate() const {
    if (n <= 3) throw DomainError("SampleStats: sample size must exceed 3");
    if (!(sd > 0.0) || !std::isfinite(sd)) throw DomainError("SampleStats: sd must be positive");
    if (!std::isfinite(mean)) throw DomainError("SampleStats: mean must be finite");
  }
};

/// p(mu, sigma) = Phi((L - mu)/sigma) + Phi((mu - U)/sigma).
inline double fraction_defective(double mu, double sigma, const SpecLimits& limits) {
  if (!(sigma > 0.0)) throw DomainError("fraction_defective: sigma must be positive");
  return numerics::std_normal_cdf((limits.lower - mu) / sigma) + numerics::std_normal_cdf((mu - limits.upper) / sigma);
}

/// Plug-in estimator p* = p(mean, S).
inline double ml_estimate(const SampleStats& stats, const SpecLimits& limits) {
  stats.validate();
  limits.validate();
  return fraction_defective(stats.mean, stats.sd, limits);
}

namespace detail {

// max{0, 1/2 - 1/2 * dist/S * sqrt(n)/(n-1)}, clamped to 1 so that B stays
// on its domain when the mean lies outside the limits.
inline double mvu_argument(double distance, const SampleStats& stats) {
  const double factor = std::sqrt(static_cast<double>(stats.n)) / (stats.n - 1);
  return std::clamp(0.5 - 0.5 * (distance / stats.sd) * factor, 0.0, 1.0);
}

}  // namespace detail

/// Minimum-variance unbiased estimator p^ = B(V) + B(W).
inline double mvu_estimate(const SampleStats& stats, const SpecLimits& limits) {
  stats.validate();
  limits.validate();
  const numerics::BetaParams beta{stats.n};
  const double v = detail::mvu_argument(stats.mean - limits.lower, stats);
  const double w = detail::mvu_argument(limits.upper - stats.mean, stats);
  return numerics::sym_beta_cdf(v, beta) + numerics::sym_beta_cdf(w, beta);
}

}  // namespace vsplan
