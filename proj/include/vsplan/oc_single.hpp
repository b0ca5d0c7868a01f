#pragma once

// Exact operating characteristic of two-sided single sampling plans for
// both estimators, and the (sigma, p) band parametrization.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>

#include "vsplan/error.hpp"
#include "vsplan/estimators.hpp"
#include "vsplan/numerics.hpp"

namespace vsplan {

enum class Procedure { ML, MVU };

inline std::string_view to_string(Procedure p) { return p == Procedure::ML ? "ml" : "mvu"; }

inline Procedure procedure_from_string(std::string_view s) {
  if (s == "ml" || s == "ML") return Procedure::ML;
  if (s == "mvu" || s == "MVU") return Procedure::MVU;
  throw DomainError("unknown procedure: " + std::string(s));
}

struct SinglePlan {
  int n = 0;
  double k = 0.0;
  Procedure procedure = Procedure::ML;

  void validate() const {
    if (n < 2) throw DomainError("SinglePlan: n must be >= 2");
    if (procedure == Procedure::MVU && n < 4) throw DomainError("SinglePlan: MVU plans need n >= 4");
    if (!(k > 0.0 && k < 1.0)) throw DomainError("SinglePlan: k must lie in (0, 1)");
  }
};

/// A process state on the band of fraction defective p, with mu >= mu0.
struct BandPoint {
  double p = 0.0;
  double sigma = 0.0;
  double mu = 0.0;
};

/// Tolerances used for every OC integral.
inline constexpr numerics::QuadratureSpec kOcSpec{1e-13, 1e-12, 400};

/// Lower cutoff of s = sigma / sigma0(p); below it the OC is numerically flat.
inline constexpr double kBandEpsilon = 1e-4;

/// Largest sigma for which fraction defective p is reachable:
/// sigma0(p) = (L - U) / (2 Phi^{-1}(p/2)).
inline double sigma0(double p, const SpecLimits& limits) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("sigma0: p must lie in (0, 1)");
  return (limits.lower - limits.upper) / (2.0 * numerics::std_normal_quantile(0.5 * p));
}

/// The unique mu >= mu0 with fraction_defective(mu, sigma) = p.
inline double invert_mu(double sigma, double p, const SpecLimits& limits) {
  using numerics::std_normal_cdf;
  using numerics::std_normal_pdf;
  if (!(sigma > 0.0)) throw DomainError("invert_mu: sigma must be positive");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("invert_mu: p must lie in (0, 1)");
  // Work in w = (mu - mu0) / sigma with half-width h = (U - L) / (2 sigma).
  const double h = 0.5 * limits.width() / sigma;
  const double at_center = 2.0 * std_normal_cdf(-h);
  if (at_center > p * (1.0 + 1e-12)) throw DomainError("invert_mu: sigma exceeds sigma0(p), no solution");
  const double upper = h + numerics::std_normal_quantile(p);
  if (!(upper > 0.0) || at_center >= p) return limits.midpoint();
  double lo = 0.0, hi = upper, w = upper;
  for (int iter = 0; iter < 200; ++iter) {
    const double f = std_normal_cdf(-h - w) + std_normal_cdf(w - h) - p;
    if (f == 0.0) break;
    if (f > 0.0) hi = w; else lo = w;
    const double slope = std_normal_pdf(w - h) - std_normal_pdf(w + h);
    double next = slope > 0.0 ? w - f / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const bool done = std::abs(next - w) <= 2.0 * numerics::kEps * std::max(1.0, std::abs(w));
    w = next;
    if (done || hi - lo <= 2.0 * numerics::kEps * std::max(1.0, hi)) break;
  }
  return limits.midpoint() + sigma * w;
}

inline BandPoint band_point(double p, double s, const SpecLimits& limits) {
  const double sigma = s * sigma0(p, limits);
  return {p, sigma, invert_mu(sigma, p, limits)};
}

namespace detail {

inline double chi2_log_weight(double x, int nu, double log_norm) {
  return 0.5 * nu * x - 0.5 * std::exp(x) - log_norm;
}

inline double chi2_log_norm(int nu) { return std::lgamma(0.5 * nu) + 0.5 * nu * std::numbers::ln2; }

// int_0^{upper} f(t) g_nu(t) dt in the variable log t, with the chi-square
// tails beyond the truncation points added using the endpoint values of f.
template <class F>
double chi2_expectation(F&& f, int nu, double upper, const numerics::QuadratureSpec& spec) {
  const numerics::Chi2Support sup = numerics::chi2_support(nu);
  if (!(upper > sup.t_lo)) return 0.0;
  const double log_norm = chi2_log_norm(nu);
  const double hi = std::min(upper, sup.t_hi);
  auto integrand = [&](double x) { return f(std::exp(x)) * std::exp(chi2_log_weight(x, nu, log_norm)); };
  const auto r = numerics::integrate_with_error(integrand, std::log(sup.t_lo), std::log(hi), spec, 2);
  if (!r.converged) throw ConvergenceError("chi-square mixture quadrature did not converge");
  double value = r.value + numerics::kChi2TailMass * f(sup.t_lo);
  if (upper > sup.t_hi) value += numerics::kChi2TailMass * f(sup.t_hi);
  return value;
}

}  // namespace detail

/// OC of the plug-in (ML) procedure, P(p* <= k), as a single integral over
/// the chi-square distributed (n-1) S^2 / sigma^2.
inline double oc_ml(const SinglePlan& plan, double mu, double sigma, const SpecLimits& limits,
                    const numerics::QuadratureSpec& spec = kOcSpec) {
  plan.validate();
  if (plan.procedure != Procedure::ML) throw DomainError("oc_ml: plan is not an ML plan");
  if (!(sigma > 0.0)) throw DomainError("oc_ml: sigma must be positive");
  const int nu = plan.n - 1;
  const double sigma_k = sigma0(plan.k, limits);
  // Acceptance needs S <= sigma0(k), i.e. t <= C.
  const double c_upper = nu * sigma_k * sigma_k / (sigma * sigma);
  const double root_n_over_sigma = std::sqrt(static_cast<double>(plan.n)) / sigma;
  const double mirror = limits.lower + limits.upper;
  auto accept_given_t = [&](double t) {
    const double s = sigma * std::sqrt(t / nu);
    if (s >= sigma_k) return 0.0;
    const double m = invert_mu(s, plan.k, limits);
    return numerics::std_normal_mass(root_n_over_sigma * (mirror - m - mu), root_n_over_sigma * (m - mu));
  };
  return std::clamp(detail::chi2_expectation(accept_given_t, nu, c_upper, spec), 0.0, 1.0);
}

/// Outer weight of the double integral in the MVU OC. `Jacobian` integrates
/// the density of W over y directly (dy); `BetaDensity` additionally
/// multiplies by b(y). Only `Jacobian` agrees with simulation.
enum class MvuOuterWeight { Jacobian, BetaDensity };

/// OC of the MVU procedure, P(p^ <= k): the region {W = 0, V <= B^{-1}(k)}
/// as a single integral plus the region {0 < W < B^{-1}(k), V <= psi(W)}
/// as a double integral over (y, t).
inline double oc_mvu(const SinglePlan& plan, double mu, double sigma, const SpecLimits& limits,
                     const numerics::QuadratureSpec& spec = kOcSpec,
                     MvuOuterWeight weight = MvuOuterWeight::Jacobian) {
  plan.validate();
  if (plan.procedure != Procedure::MVU) throw DomainError("oc_mvu: plan is not an MVU plan");
  if (!(sigma > 0.0)) throw DomainError("oc_mvu: sigma must be positive");
  const numerics::BetaParams beta{plan.n};
  const int nu = plan.n - 1;
  const double root_n = std::sqrt(static_cast<double>(plan.n));
  const double delta_u = root_n * (mu - limits.upper) / sigma;
  const double delta_l = root_n * (mu - limits.lower) / sigma;
  const double v_star = numerics::sym_beta_inv(plan.k, beta);
  const double a_scale = plan.n * limits.width() * limits.width() / (4.0 * sigma * sigma * nu);
  auto a_limit = [&](double x, double y) {
    const double gap = 1.0 - x - y;
    return gap > 0.0 ? a_scale / (gap * gap) : std::numeric_limits<double>::infinity();
  };

  auto first = [&](double t) {
    const double u = std::sqrt(t * nu);
    return numerics::std_normal_mass(-delta_l + (1.0 - 2.0 * v_star) * u, -delta_u - u);
  };
  const double term1 = detail::chi2_expectation(first, nu, a_limit(v_star, 0.0), spec);

  double term2 = 0.0;
  if (v_star > 0.0) {
    auto outer = [&](double y) {
      const double psi = numerics::sym_beta_inv(plan.k - numerics::sym_beta_cdf(y, beta), beta);
      auto inner = [&](double t) {
        const double u = std::sqrt(t * nu);
        return numerics::std_normal_pdf(-delta_u + (2.0 * y - 1.0) * u) * u;
      };
      const double w = weight == MvuOuterWeight::Jacobian ? 1.0 : numerics::sym_beta_pdf(y, beta);
      return w * detail::chi2_expectation(inner, nu, a_limit(psi, y), spec);
    };
    const auto r = numerics::integrate_with_error(outer, 0.0, v_star, spec);
    if (!r.converged) throw ConvergenceError("oc_mvu: outer quadrature did not converge");
    term2 = 2.0 * r.value;
  }
  return std::clamp(term1 + term2, 0.0, 1.0);
}

inline double oc_single(const SinglePlan& plan, double mu, double sigma, const SpecLimits& limits,
                        const numerics::QuadratureSpec& spec = kOcSpec) {
  return plan.procedure == Procedure::ML ? oc_ml(plan, mu, sigma, limits, spec)
                                         : oc_mvu(plan, mu, sigma, limits, spec);
}

enum class ExtremeKind { Min, Max };

struct BandExtreme {
  double s = 0.0;      ///< sigma / sigma0(p) at the extremum
  double sigma = 0.0;
  double mu = 0.0;
  double value = 0.0;
};

/// Extremizes s -> f(band_point(p, s)) over s in [kBandEpsilon, 1] with a
/// grid scan plus golden-section refinement.
template <class F>
BandExtreme band_extreme(F&& f, double p, const SpecLimits& limits, ExtremeKind kind, int grid = 201) {
  const double sign = kind == ExtremeKind::Max ? 1.0 : -1.0;
  const double s0 = sigma0(p, limits);
  auto objective = [&](double s) {
    const double sigma = s * s0;
    return sign * f(invert_mu(sigma, p, limits), sigma);
  };
  const numerics::Extremum e = numerics::maximize_1d(objective, kBandEpsilon, 1.0, grid, 1e-9);
  const double sigma = e.arg * s0;
  return {e.arg, sigma, invert_mu(sigma, p, limits), sign * e.value};
}

/// Minimum or maximum of the single-plan OC over the band of fraction defective p.
inline BandExtreme oc_band_extreme(const SinglePlan& plan, double p, const SpecLimits& limits, ExtremeKind kind,
                                   int grid = 201) {
  return band_extreme([&](double mu, double sigma) { return oc_single(plan, mu, sigma, limits); }, p, limits, kind,
                      grid);
}

}  // namespace vsplan
