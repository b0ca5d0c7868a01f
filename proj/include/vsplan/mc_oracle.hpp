#pragma once

// Monte Carlo simulation of the one- and two-stage inspection rules. Every
// normal variate is a pure function of (seed, replication, draw index), so
// results are reproducible bit for bit and independent of evaluation order.

#include <cmath>
#include <cstdint>

#include "vsplan/error.hpp"
#include "vsplan/estimators.hpp"
#include "vsplan/numerics.hpp"
#include "vsplan/oc_single.hpp"
#include "vsplan/twosided_double.hpp"

namespace vsplan::mc {

struct SimConfig {
  long replications = 100000;
  std::uint64_t seed = 20240601;
  double mu = 0.0;
  double sigma = 1.0;

  void validate() const {
    if (replications < 1) throw DomainError("SimConfig: replications must be >= 1");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("SimConfig: sigma must be positive");
    if (!std::isfinite(mu)) throw DomainError("SimConfig: mu must be finite");
  }
};

struct SimResult {
  double accept_rate = 0.0;
  double mean_sample_number = 0.0;
  double std_error_accept = 0.0;
  double std_error_asn = 0.0;
  long replications = 0;
};

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based stream: draw i of replication r under a seed.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t replication)
      : key_(mix64(mix64(seed) ^ (replication * 0xd1b54a32d192ed03ULL))) {}

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform(std::uint64_t i) const {
    const std::uint64_t bits = mix64(key_ ^ mix64(i + 0x632be59bd9b4e019ULL)) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  double normal(std::uint64_t i) const { return numerics::std_normal_quantile(uniform(i)); }

 private:
  std::uint64_t key_;
};

/// Mean and (n-1)-divisor standard deviation of draws [offset, offset + n).
inline SampleStats draw_sample(const NormalStream& stream, std::uint64_t offset, int n, double mu, double sigma) {
  double mean = 0.0, m2 = 0.0;
  for (int j = 0; j < n; ++j) {
    const double x = mu + sigma * stream.normal(offset + j);
    const double d = x - mean;
    mean += d / (j + 1);
    m2 += d * (x - mean);
  }
  return {n, mean, std::sqrt(m2 / (n - 1))};
}

/// The procedure's estimate of the fraction defective.
inline double estimate(Procedure procedure, const SampleStats& s, const SpecLimits& limits) {
  if (procedure == Procedure::ML) return fraction_defective(s.mean, s.sd, limits);
  return mvu_estimate(s, limits);
}

namespace detail {

inline SimResult finish(long reps, long accepted, double sum_n, double sum_n2) {
  SimResult r;
  r.replications = reps;
  r.accept_rate = static_cast<double>(accepted) / reps;
  r.mean_sample_number = sum_n / reps;
  r.std_error_accept = std::sqrt(r.accept_rate * (1.0 - r.accept_rate) / reps);
  const double var = std::max(0.0, sum_n2 / reps - r.mean_sample_number * r.mean_sample_number);
  r.std_error_asn = std::sqrt(var / reps);
  return r;
}

}  // namespace detail

inline SimResult simulate_single(const SinglePlan& plan, const SimConfig& cfg, const SpecLimits& limits) {
  plan.validate();
  cfg.validate();
  limits.validate();
  long accepted = 0;
  for (long r = 0; r < cfg.replications; ++r) {
    const NormalStream stream(cfg.seed, static_cast<std::uint64_t>(r));
    const SampleStats s = draw_sample(stream, 0, plan.n, cfg.mu, cfg.sigma);
    if (estimate(plan.procedure, s, limits) <= plan.k) ++accepted;
  }
  const double n = plan.n;
  return detail::finish(cfg.replications, accepted, n * cfg.replications, n * n * cfg.replications);
}

/// Two-stage rule with an independent second sample (draws n1 .. n1+n2-1 of
/// the replication's stream).
inline SimResult simulate_double(const DoublePlan& plan, const SimConfig& cfg, const SpecLimits& limits) {
  plan.validate();
  cfg.validate();
  limits.validate();
  long accepted = 0;
  double sum_n = 0.0, sum_n2 = 0.0;
  for (long r = 0; r < cfg.replications; ++r) {
    const NormalStream stream(cfg.seed, static_cast<std::uint64_t>(r));
    const SampleStats first = draw_sample(stream, 0, plan.n1, cfg.mu, cfg.sigma);
    const double e1 = estimate(plan.procedure, first, limits);
    double used = plan.n1;
    if (e1 <= plan.k1) {
      ++accepted;
    } else if (e1 <= plan.k2) {
      const SampleStats second = draw_sample(stream, static_cast<std::uint64_t>(plan.n1), plan.n2, cfg.mu, cfg.sigma);
      used += plan.n2;
      if (estimate(plan.procedure, second, limits) <= plan.k3) ++accepted;
    }
    sum_n += used;
    sum_n2 += used * used;
  }
  return detail::finish(cfg.replications, accepted, sum_n, sum_n2);
}

struct EstimatorMean {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Empirical mean of the estimator over replications of size n.
inline EstimatorMean simulate_estimator_mean(Procedure procedure, int n, const SimConfig& cfg,
                                             const SpecLimits& limits) {
  cfg.validate();
  limits.validate();
  if (n < 4) throw DomainError("simulate_estimator_mean: n must exceed 3");
  double sum = 0.0, sum2 = 0.0;
  for (long r = 0; r < cfg.replications; ++r) {
    const NormalStream stream(cfg.seed, static_cast<std::uint64_t>(r));
    const double e = estimate(procedure, draw_sample(stream, 0, n, cfg.mu, cfg.sigma), limits);
    sum += e;
    sum2 += e * e;
  }
  const double reps = static_cast<double>(cfg.replications);
  const double mean = sum / reps;
  return {mean, std::sqrt(std::max(0.0, sum2 / reps - mean * mean) / reps)};
}

}  // namespace vsplan::mc
