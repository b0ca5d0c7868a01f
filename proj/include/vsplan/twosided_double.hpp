#pragma once

// Two-sided double plans derived from one-sided AM plans: mapping, exact
// OC/ASN, band extremes over sigma, N_max over the (p, sigma) band and the
// alpha**/beta** calibration loop.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "vsplan/error.hpp"
#include "vsplan/estimators.hpp"
#include "vsplan/numerics.hpp"
#include "vsplan/oc_single.hpp"
#include "vsplan/onesided.hpp"

namespace vsplan {

/// Definition of the two-stage rule: accept if p_est(first) <= k1, reject if
/// it exceeds k2, otherwise take a second sample and accept iff
/// p_est(second) <= k3.
struct DoublePlan {
  int n1 = 0;
  double k1 = 0.0;
  double k2 = 0.0;
  int n2 = 0;
  double k3 = 0.0;
  Procedure procedure = Procedure::ML;

  SinglePlan first(double k) const { return {n1, k, procedure}; }
  SinglePlan second() const { return {n2, k3, procedure}; }

  void validate() const {
    first(k1).validate();
    first(k2).validate();
    second().validate();
    if (!(k1 <= k2)) throw DomainError("DoublePlan: need k1 <= k2");
  }
};

struct TwoSidedContext {
  SpecLimits limits{1.0, 9.0};
  RiskPoint risk;

  double mu0() const { return limits.midpoint(); }
  void validate() const {
    limits.validate();
    risk.validate();
  }
};

/// Critical value in fraction-defective units for a one-sided constant l:
/// Phi(l / sqrt(n)) for ML, B(1/2 + l / (2(n-1))) for MVU.
inline double map_constant(double l, int n, Procedure procedure) {
  if (procedure == Procedure::ML) return numerics::std_normal_cdf(l / std::sqrt(static_cast<double>(n)));
  const double x = 0.5 + l / (2.0 * (n - 1));
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("map_constant: beta argument outside [0, 1]");
  return numerics::sym_beta_cdf(x, numerics::BetaParams{n});
}

/// Inverse of map_constant.
inline double unmap_constant(double k, int n, Procedure procedure) {
  if (!(k > 0.0 && k < 1.0)) throw DomainError("unmap_constant: k must lie in (0, 1)");
  if (procedure == Procedure::ML) return std::sqrt(static_cast<double>(n)) * numerics::std_normal_quantile(k);
  return (2.0 * numerics::sym_beta_inv(k, numerics::BetaParams{n}) - 1.0) * (n - 1);
}

inline DoublePlan map_plan(const OneSidedDoublePlan& phi, Procedure procedure) {
  return {phi.n1,
          map_constant(phi.l1, phi.n1, procedure),
          map_constant(phi.l2, phi.n1, procedure),
          phi.n2,
          map_constant(phi.l3, phi.n2, procedure),
          procedure};
}

inline SinglePlan map_single(const OneSidedSinglePlan& plan, Procedure procedure) {
  return {plan.n, map_constant(plan.l, plan.n, procedure), procedure};
}

// The three single-plan OCs a double plan is built from.
struct DoubleComponents {
  double accept_first = 0.0;   // L(n1, k1)
  double below_reject = 0.0;   // L(n1, k2)
  double accept_second = 0.0;  // L(n2, k3)
};

namespace detail {

inline DoubleComponents double_components(const DoublePlan& plan, double mu, double sigma, const SpecLimits& limits,
                                          const numerics::QuadratureSpec& spec, bool need_second) {
  DoubleComponents c;
  c.accept_first = oc_single(plan.first(plan.k1), mu, sigma, limits, spec);
  c.below_reject = plan.k2 == plan.k1 ? c.accept_first : oc_single(plan.first(plan.k2), mu, sigma, limits, spec);
  if (need_second) c.accept_second = oc_single(plan.second(), mu, sigma, limits, spec);
  return c;
}

}  // namespace detail

inline double oc_double(const DoublePlan& plan, double mu, double sigma, const SpecLimits& limits,
                        const numerics::QuadratureSpec& spec = kOcSpec) {
  plan.validate();
  const auto c = detail::double_components(plan, mu, sigma, limits, spec, true);
  const double cont = std::max(0.0, c.below_reject - c.accept_first);
  return std::clamp(c.accept_first + c.accept_second * cont, 0.0, 1.0);
}

inline double asn_double(const DoublePlan& plan, double mu, double sigma, const SpecLimits& limits,
                         const numerics::QuadratureSpec& spec = kOcSpec) {
  plan.validate();
  const auto c = detail::double_components(plan, mu, sigma, limits, spec, false);
  return plan.n1 + plan.n2 * std::clamp(c.below_reject - c.accept_first, 0.0, 1.0);
}

struct BandEval {
  double p = 0.0;
  BandExtreme min_oc;
  BandExtreme max_oc;
  BandExtreme max_asn;
};

inline BandExtreme oc_double_band_extreme(const DoublePlan& plan, double p, const SpecLimits& limits,
                                          ExtremeKind kind, int grid = 201) {
  return band_extreme([&](double mu, double sigma) { return oc_double(plan, mu, sigma, limits); }, p, limits, kind,
                      grid);
}

inline BandExtreme asn_double_band_max(const DoublePlan& plan, double p, const SpecLimits& limits, int grid = 201) {
  return band_extreme([&](double mu, double sigma) { return asn_double(plan, mu, sigma, limits); }, p, limits,
                      ExtremeKind::Max, grid);
}

/// OC minimum, OC maximum and ASN maximum over the band of fraction defective p.
inline BandEval band_eval(const DoublePlan& plan, double p, const SpecLimits& limits, int grid = 201) {
  return {p, oc_double_band_extreme(plan, p, limits, ExtremeKind::Min, grid),
          oc_double_band_extreme(plan, p, limits, ExtremeKind::Max, grid), asn_double_band_max(plan, p, limits, grid)};
}

struct NMaxOptions {
  int p_grid = 201;      ///< log-spaced outer grid
  double p_min = 1e-5;
  double p_max = 0.5;
  int s_grid = 41;       ///< inner sigma grid during the outer scan
  int s_grid_final = 201;
};

struct NMaxResult {
  double p = 0.0;
  double s = 0.0;
  double sigma = 0.0;
  double mu = 0.0;
  double value = 0.0;
};

/// max over (p, sigma) of asn_double. The outer scan runs over a log grid
/// in p with a coarse inner sigma search; the best cell is then refined by
/// golden section in log p with the full inner search.
inline NMaxResult n_max_double(const DoublePlan& plan, const SpecLimits& limits, const NMaxOptions& opt = {}) {
  plan.validate();
  if (plan.k1 == plan.k2) return {0.5, 1.0, 0.0, limits.midpoint(), static_cast<double>(plan.n1)};
  const int g = std::max(opt.p_grid, 3);
  const double lo = std::log(opt.p_min), hi = std::log(opt.p_max);
  std::vector<double> xs(g), vs(g);
  for (int i = 0; i < g; ++i) {
    xs[i] = lo + (hi - lo) * i / (g - 1);
    vs[i] = asn_double_band_max(plan, std::exp(xs[i]), limits, opt.s_grid).value;
  }
  const int best = static_cast<int>(std::max_element(vs.begin(), vs.end()) - vs.begin());
  const double a = xs[std::max(best - 1, 0)], b = xs[std::min(best + 1, g - 1)];
  const auto e = numerics::golden_maximize(
      [&](double x) { return asn_double_band_max(plan, std::exp(x), limits, opt.s_grid_final).value; }, a, b, 1e-7);
  const double p = std::exp(e.arg);
  const BandExtreme inner = asn_double_band_max(plan, p, limits, opt.s_grid_final);
  return {p, inner.s, inner.sigma, inner.mu, inner.value};
}

// ---------------------------------------------------------------------------
// Calibration

/// Nominal-level step; the tightening works in whole multiples of it.
inline constexpr double kLevelStep = 0.001;

/// How a failed band check moves the nominal levels.
enum class StepRule {
  AqlFirst,  ///< tighten alpha** while (i) fails; tighten beta** only once (i) holds
  Both,      ///< tighten every violated side at once
};

struct CalibrationOptions {
  StepRule rule = StepRule::Both;
  int max_steps = 200;
  int band_grid = 201;
  AmOptions am;
  /// Called after every evaluated (alpha**, beta**) step.
  std::function<void(int step, double alpha_ss, double beta_ss)> on_step;
};

/// Slack allowed in the band conditions. The AM solver makes the RQL
/// condition bind exactly, so rounding alone can push it past beta.
inline constexpr double kBandTolerance = 1e-9;

struct BandCheck {
  double min_oc_p1 = 0.0;
  double max_oc_p2 = 0.0;
  bool aql_ok = false;
  bool rql_ok = false;
  bool ok() const { return aql_ok && rql_ok; }
};

template <class Oc>
BandCheck check_band(Oc&& oc, const TwoSidedContext& ctx, int grid) {
  BandCheck c;
  c.min_oc_p1 = band_extreme(oc, ctx.risk.p1, ctx.limits, ExtremeKind::Min, grid).value;
  c.max_oc_p2 = band_extreme(oc, ctx.risk.p2, ctx.limits, ExtremeKind::Max, grid).value;
  c.aql_ok = c.min_oc_p1 >= 1.0 - ctx.risk.alpha - kBandTolerance;
  c.rql_ok = c.max_oc_p2 <= ctx.risk.beta + kBandTolerance;
  return c;
}

namespace detail {

// Level after `steps` decrements, rounded to the step grid.
inline double stepped_level(double start, int steps) {
  return std::round((start - steps * kLevelStep) * 1e9) / 1e9;
}

inline void advance(const BandCheck& band, StepRule rule, int& da, int& db) {
  if (rule == StepRule::AqlFirst) {
    if (!band.aql_ok) ++da; else if (!band.rql_ok) ++db;
    return;
  }
  if (!band.aql_ok) ++da;
  if (!band.rql_ok) ++db;
}

}  // namespace detail

struct SingleCalibration {
  SinglePlan plan;
  OneSidedSinglePlan onesided;
  double alpha_star = 0.0;
  double beta_star = 0.0;
  BandCheck band;
  int steps = 0;
};

/// Tightens the nominal (alpha**, beta**) from (alpha, beta) in steps of
/// 0.001 until the mapped one-sided single plan meets both band conditions.
inline SingleCalibration calibrate_single(const TwoSidedContext& ctx, Procedure procedure,
                                          const CalibrationOptions& opt = {}) {
  ctx.validate();
  const int min_n = procedure == Procedure::MVU ? 4 : 2;
  int da = 0, db = 0;
  for (int step = 0; step < opt.max_steps; ++step) {
    const double a = detail::stepped_level(ctx.risk.alpha, da);
    const double b = detail::stepped_level(ctx.risk.beta, db);
    if (!(a > kLevelStep / 2 && b > kLevelStep / 2)) break;
    if (opt.on_step) opt.on_step(step, a, b);
    const OneSidedSinglePlan one = solve_onesided_single({ctx.risk.p1, ctx.risk.p2, a, b}, min_n);
    const SinglePlan plan = map_single(one, procedure);
    const BandCheck band = check_band(
        [&](double mu, double sigma) { return oc_single(plan, mu, sigma, ctx.limits); }, ctx, opt.band_grid);
    if (band.ok()) return {plan, one, a, b, band, step};
    detail::advance(band, opt.rule, da, db);
  }
  throw ConvergenceError("calibrate_single: nominal levels exhausted before the band conditions held");
}

struct TraceRow {
  double alpha_ss = 0.0;
  double beta_ss = 0.0;
  DoublePlan plan;
  OneSidedDoublePlan onesided;
  double n_max_onesided = 0.0;
  double min_oc_p1 = 0.0;
  double max_oc_p2 = 0.0;
  bool accepted = false;
};

struct CalibrationTrace {
  std::vector<TraceRow> rows;

  /// First row, rows where the first-stage size changes, and the final
  /// row: the layout of a published calibration table.
  std::vector<TraceRow> table() const {
    std::vector<TraceRow> out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const bool last = i + 1 == rows.size();
      if (out.empty() || last || rows[i].plan.n1 != out.back().plan.n1) out.push_back(rows[i]);
    }
    return out;
  }
};

struct DoubleCalibration {
  DoublePlan plan;
  CalibrationTrace trace;
  SingleCalibration single;
};

/// Starting from the single-plan levels (alpha*, beta*), solves the one-sided
/// AM plan, maps it and checks the band conditions, tightening the levels
/// in steps of 0.001 until both hold.
inline DoubleCalibration calibrate_double(const TwoSidedContext& ctx, Procedure procedure,
                                          const CalibrationOptions& opt = {}) {
  DoubleCalibration out;
  out.single = calibrate_single(ctx, procedure, opt);
  AmOptions am = opt.am;
  if (procedure == Procedure::MVU) am.min_sample = std::max(am.min_sample, 4);
  int da = 0, db = 0;
  for (int step = 0; step < opt.max_steps; ++step) {
    const double a = detail::stepped_level(out.single.alpha_star, da);
    const double b = detail::stepped_level(out.single.beta_star, db);
    if (!(a > kLevelStep / 2 && b > kLevelStep / 2)) break;
    if (opt.on_step) opt.on_step(step, a, b);
    const AmResult am_plan = solve_am_onesided({ctx.risk.p1, ctx.risk.p2, a, b}, am);
    TraceRow row;
    row.alpha_ss = a;
    row.beta_ss = b;
    row.onesided = am_plan.plan;
    row.plan = map_plan(am_plan.plan, procedure);
    row.n_max_onesided = am_plan.n_max;
    const BandCheck band = check_band(
        [&](double mu, double sigma) { return oc_double(row.plan, mu, sigma, ctx.limits); }, ctx, opt.band_grid);
    row.min_oc_p1 = band.min_oc_p1;
    row.max_oc_p2 = band.max_oc_p2;
    row.accepted = band.ok();
    out.trace.rows.push_back(row);
    if (band.ok()) {
      out.plan = row.plan;
      return out;
    }
    detail::advance(band, opt.rule, da, db);
  }
  throw ConvergenceError("calibrate_double: nominal levels exhausted before the band conditions held");
}

struct ProcedureComparison {
  DoubleCalibration ml;
  DoubleCalibration mvu;
  NMaxResult n_max_ml;
  NMaxResult n_max_mvu;
  double difference() const { return n_max_ml.value - n_max_mvu.value; }
  bool mvu_better() const { return n_max_mvu.value < n_max_ml.value; }
};

inline ProcedureComparison compare_procedures(const TwoSidedContext& ctx, const CalibrationOptions& opt = {},
                                              const NMaxOptions& nmax = {}) {
  ProcedureComparison c;
  c.ml = calibrate_double(ctx, Procedure::ML, opt);
  c.mvu = calibrate_double(ctx, Procedure::MVU, opt);
  c.n_max_ml = n_max_double(c.ml.plan, ctx.limits, nmax);
  c.n_max_mvu = n_max_double(c.mvu.plan, ctx.limits, nmax);
  return c;
}

}  // namespace vsplan
