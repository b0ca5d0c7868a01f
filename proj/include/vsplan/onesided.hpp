#pragma once

// One-sided (upper limit) plans in noncentral-t space: the single-plan
// solver, OC/ASN of double plans built on independent statistics
// T_i = sqrt(n_i) (mean_i - U) / S_i, and the ASN-minimax (AM) optimizer.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <tuple>
#include <vector>

#include "vsplan/error.hpp"
#include "vsplan/numerics.hpp"

namespace vsplan {

/// Two-point quality requirement: OC >= 1 - alpha at p1, OC <= beta at p2.
struct RiskPoint {
  double p1 = 0.01;
  double p2 = 0.06;
  double alpha = 0.1;
  double beta = 0.1;

  void validate() const {
    if (!(p1 > 0.0 && p1 < p2 && p2 < 1.0)) throw DomainError("RiskPoint: need 0 < p1 < p2 < 1");
    if (!(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0))
      throw DomainError("RiskPoint: alpha and beta must lie in (0, 1)");
  }
};

struct OneSidedSinglePlan {
  int n = 0;
  double l = 0.0;
  double l_alpha = 0.0;  ///< smallest l meeting the AQL condition
  double l_beta = 0.0;   ///< largest l meeting the RQL condition
};

struct OneSidedDoublePlan {
  int n1 = 0;
  double l1 = 0.0;
  double l2 = 0.0;
  int n2 = 0;
  double l3 = 0.0;
};

/// F_{n-1, sqrt(n) z}(l): acceptance probability of T <= l when the
/// fraction above U is Phi(z).
inline double onesided_oc_z(int n, double l, double z) {
  return numerics::noncentral_t_cdf(l, n - 1, std::sqrt(static_cast<double>(n)) * z);
}

inline double onesided_oc(int n, double l, double p) {
  return onesided_oc_z(n, l, numerics::std_normal_quantile(p));
}

/// The l with F_{n-1, sqrt(n) z}(l) = target, searched outward from a
/// normal approximation (or from `guess` when given).
inline double acceptance_constant(int n, double z, double target, std::optional<double> guess = std::nullopt) {
  if (n < 2) throw DomainError("acceptance_constant: n must be >= 2");
  if (!(target > 0.0 && target < 1.0)) throw DomainError("acceptance_constant: target must lie in (0, 1)");
  const double delta = std::sqrt(static_cast<double>(n)) * z;
  const double spread = std::sqrt(1.0 + delta * delta / (2.0 * (n - 1)));
  const double start = guess ? *guess : delta + numerics::std_normal_quantile(target) * spread;
  auto f = [&](double l) { return onesided_oc_z(n, l, z) - target; };
  double step = guess ? 0.05 * spread : 0.5 * spread;
  double lo = start - step, hi = start + step;
  double flo = f(lo), fhi = f(hi);
  for (int i = 0; i < 200 && flo > 0.0; ++i) {
    hi = lo;
    fhi = flo;
    step *= 2.0;
    lo -= step;
    flo = f(lo);
  }
  for (int i = 0; i < 200 && fhi < 0.0; ++i) {
    lo = hi;
    flo = fhi;
    step *= 2.0;
    hi += step;
    fhi = f(hi);
  }
  if (flo > 0.0 || fhi < 0.0) throw ConvergenceError("acceptance_constant: could not bracket");
  return numerics::find_root(f, lo, hi, numerics::RootOptions{1e-13, 0.0, 300});
}

inline constexpr int kMaxSampleSize = 10000;

/// Smallest n for which some l satisfies both OC conditions; l is the
/// midpoint of the feasible interval [l_alpha, l_beta].
inline OneSidedSinglePlan solve_onesided_single(const RiskPoint& risk, int min_n = 2) {
  risk.validate();
  const double z1 = numerics::std_normal_quantile(risk.p1);
  const double z2 = numerics::std_normal_quantile(risk.p2);
  for (int n = std::max(min_n, 2); n <= kMaxSampleSize; ++n) {
    const double l_alpha = acceptance_constant(n, z1, 1.0 - risk.alpha);
    const double l_beta = acceptance_constant(n, z2, risk.beta);
    if (l_alpha <= l_beta) return {n, 0.5 * (l_alpha + l_beta), l_alpha, l_beta};
  }
  throw InfeasibleError("solve_onesided_single: no plan with n <= 10000");
}

/// Probability that the first stage neither accepts nor rejects.
inline double continue_probability_z(const OneSidedDoublePlan& plan, double z) {
  return std::max(0.0, onesided_oc_z(plan.n1, plan.l2, z) - onesided_oc_z(plan.n1, plan.l1, z));
}

inline double oc_onesided_double(const OneSidedDoublePlan& plan, double p) {
  const double z = numerics::std_normal_quantile(p);
  const double first = onesided_oc_z(plan.n1, plan.l1, z);
  const double cont = continue_probability_z(plan, z);
  return std::clamp(first + onesided_oc_z(plan.n2, plan.l3, z) * cont, 0.0, 1.0);
}

inline double asn_onesided_double_z(const OneSidedDoublePlan& plan, double z) {
  return plan.n1 + plan.n2 * continue_probability_z(plan, z);
}

inline double asn_onesided_double(const OneSidedDoublePlan& plan, double p) {
  return asn_onesided_double_z(plan, numerics::std_normal_quantile(p));
}

struct AsnMaximum {
  double p = 0.0;
  double value = 0.0;
};

inline constexpr double kAsnPMin = 1e-6;

/// max_p N(p) over p in [1e-6, 1 - 1e-6]. The grid is laid out in
/// z = Phi^{-1}(p), where the ASN curve is a smooth bump.
inline AsnMaximum asn_max(const OneSidedDoublePlan& plan, int grid = 201) {
  if (plan.l1 == plan.l2) return {0.5, static_cast<double>(plan.n1)};
  const double zmax = -numerics::std_normal_quantile(kAsnPMin);
  const auto e = numerics::maximize_1d([&](double z) { return asn_onesided_double_z(plan, z); }, -zmax, zmax, grid,
                                       1e-10);
  return {numerics::std_normal_cdf(e.arg), e.value};
}

// ---------------------------------------------------------------------------
// ASN-minimax optimizer

struct AmOptions {
  int min_sample = 2;      ///< smallest admissible n1, n2 (4 for MVU mapping)
  int max_n2 = 0;          ///< 0: the one-sided single-plan size
  int l1_grid = 9;         ///< coarse grid over the feasible l1 interval
  double l_tol = 1e-9;     ///< final resolution in l-space
  int patience = 2;        ///< consecutive N_max rises that end a row walk
  bool exhaustive = false; ///< visit every n2 of every row
};

struct AmResult {
  OneSidedDoublePlan plan;
  double n_max = 0.0;        ///< refined max_p N(p)
  double p_at_max = 0.0;
  OneSidedSinglePlan single; ///< one-sided single plan, an upper bound on N_max
  bool degenerate = false;   ///< no genuine double plan beat the single plan
  int pairs_evaluated = 0;
};

namespace detail {

// Evaluates plans with fixed (n1, n2) along the curve where both OC
// conditions bind, parametrized by l1.
class AmPairSolver {
 public:
  AmPairSolver(const RiskPoint& risk, int n1, int n2, double l1_max)
      : risk_(risk), n1_(n1), n2_(n2), l1_max_(l1_max),
        z1_(numerics::std_normal_quantile(risk.p1)), z2_(numerics::std_normal_quantile(risk.p2)) {
    const double delta = std::sqrt(static_cast<double>(n1)) * z2_;
    spread1_ = std::sqrt(1.0 + delta * delta / (2.0 * std::max(n1 - 1, 1)));
  }

  struct Point {
    double l1 = 0.0, l2 = 0.0, l3 = 0.0;
    double n_max = std::numeric_limits<double>::infinity();
    double z_at_max = 0.0;
    bool ok = false;
  };

  // AQL slack with l3 binding the RQL condition, for a given (l1, l2).
  // Requires l1 < l1_max < l2 so that the second-stage target lies in (0, 1).
  double aql_slack(double l1, double a1, double a2, double l2, double* l3_out) {
    const double b2 = l2 == kInf ? 1.0 : onesided_oc_z(n1_, l2, z2_);
    const double a2_up = l2 == kInf ? 1.0 : onesided_oc_z(n1_, l2, z1_);
    const double target = (risk_.beta - a2) / (b2 - a2);
    if (!(target > 0.0)) return -1.0;
    if (!(target < 1.0)) {
      // l3 -> +inf: the second stage always accepts.
      if (l3_out) *l3_out = kInf;
      return a2_up - (1.0 - risk_.alpha);
    }
    const double l3 = acceptance_constant(n2_, z2_, target, l3_guess_);
    l3_guess_ = l3;
    if (l3_out) *l3_out = l3;
    (void)l1;
    return a1 + onesided_oc_z(n2_, l3, z1_) * (a2_up - a1) - (1.0 - risk_.alpha);
  }

  // Smallest l2 > l1_max at which the AQL condition binds for this l1.
  // The slack rises from a negative value just above l1_max, peaks and
  // falls again (large l2 routes bad lots to the second stage), so the
  // smallest root is the cheapest feasible l2.
  std::optional<double> smallest_l2(double l1, double a1, double a2) {
    auto slack = [&](double l2) { return aql_slack(l1, a1, a2, l2, nullptr); };
    const double floor = l1_max_ + 1e-9 * std::max(1.0, std::abs(l1_max_));
    const numerics::RootOptions ropt{1e-13, 0.0, 300};
    if (l2_guess_) {
      double d = 0.02;
      double hi = *l2_guess_ + d, shi = slack(hi);
      if (shi > 0.0) {
        double lo = std::max(*l2_guess_ - d, floor), slo = slack(lo);
        for (int i = 0; i < 40 && slo > 0.0 && lo > floor; ++i) {
          hi = lo;
          d *= 2.0;
          lo = std::max(lo - d, floor);
          slo = slack(lo);
        }
        if (slo < 0.0) return numerics::find_root(slack, lo, hi, ropt);
      }
    }
    // Ascending scan from l1_max.
    const double width = 6.0 * spread1_;
    constexpr int kSteps = 24;
    double prev_x = floor, prev_s = slack(floor);
    if (prev_s >= 0.0) return std::nullopt;
    double best_x = prev_x, best_s = prev_s;
    for (int i = 1; i <= kSteps; ++i) {
      const double x = floor + width * i / kSteps;
      const double sx = slack(x);
      if (sx > 0.0) return numerics::find_root(slack, prev_x, x, ropt);
      if (sx > best_s) {
        best_s = sx;
        best_x = x;
      }
      prev_x = x;
      prev_s = sx;
    }
    // A narrow positive window may sit between scan points.
    const double step = width / kSteps;
    const auto e = numerics::golden_maximize(slack, std::max(floor, best_x - step), best_x + step, 1e-7);
    if (e.value <= 0.0) return std::nullopt;
    return numerics::find_root(slack, std::max(floor, best_x - step), e.arg, ropt);
  }

  // Solves the binding l2 for this l1 and scores the plan.
  Point evaluate(double l1) {
    Point pt;
    pt.l1 = l1;
    const double a1 = onesided_oc_z(n1_, l1, z1_);
    const double a2 = onesided_oc_z(n1_, l1, z2_);
    if (!(a2 < risk_.beta)) return pt;
    const auto l2 = smallest_l2(l1, a1, a2);
    if (!l2) return pt;
    l2_guess_ = *l2;
    double l3 = 0.0;
    aql_slack(l1, a1, a2, *l2, &l3);
    if (!std::isfinite(l3)) return pt;
    pt.l2 = *l2;
    pt.l3 = l3;
    const OneSidedDoublePlan plan{n1_, l1, *l2, n2_, l3};
    const auto [z, n_max] = local_asn_max(plan);
    pt.n_max = n_max;
    pt.z_at_max = z;
    pt.ok = true;
    return pt;
  }

  double spread1() const { return spread1_; }

  int n1() const { return n1_; }
  int n2() const { return n2_; }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  // Warm-started Brent maximization of the ASN over z.
  std::pair<double, double> local_asn_max(const OneSidedDoublePlan& plan) {
    auto neg = [&](double z) { return -asn_onesided_double_z(plan, z); };
    double center = z_guess_ ? *z_guess_ : 0.5 * (z1_ + z2_);
    double width = 0.6;
    for (int attempt = 0; attempt < 6; ++attempt) {
      const auto e = numerics::brent_minimize(neg, center - width, center + width, 1e-9);
      const bool interior = e.arg > center - 0.98 * width && e.arg < center + 0.98 * width;
      if (interior) {
        z_guess_ = e.arg;
        return {e.arg, -e.value};
      }
      center = e.arg;
      width *= 2.0;
    }
    const double zmax = -numerics::std_normal_quantile(kAsnPMin);
    const auto e = numerics::maximize_1d([&](double z) { return -neg(z); }, -zmax, zmax, 201, 1e-10);
    z_guess_ = e.arg;
    return {e.arg, e.value};
  }

  RiskPoint risk_;
  int n1_, n2_;
  double l1_max_;
  double z1_, z2_;
  double spread1_ = 1.0;
  std::optional<double> l2_guess_, l3_guess_, z_guess_;
};

struct Candidate {
  OneSidedDoublePlan plan;
  double n_max = std::numeric_limits<double>::infinity();
};

// Deterministic ordering: N_max, then n1, n2, l2 - l1.
inline bool better(const Candidate& a, const Candidate& b) {
  if (std::abs(a.n_max - b.n_max) > 1e-9) return a.n_max < b.n_max;
  if (a.plan.n1 != b.plan.n1) return a.plan.n1 < b.plan.n1;
  if (a.plan.n2 != b.plan.n2) return a.plan.n2 < b.plan.n2;
  return (a.plan.l2 - a.plan.l1) < (b.plan.l2 - b.plan.l1);
}

// Best plan for a fixed (n1, n2), or nothing when the pair is infeasible.
// N_max along the binding curve is minimized over l1 by a grid scan below
// l1_max followed by Brent around the best grid cell.
inline std::optional<Candidate> optimize_pair(const RiskPoint& risk, int n1, int n2, double l1_max,
                                              const AmOptions& opt) {
  AmPairSolver solver(risk, n1, n2, l1_max);
  const int g = std::max(opt.l1_grid, 3);
  const double top = l1_max - 1e-9 * std::max(1.0, std::abs(l1_max));
  const double width = 4.0 * solver.spread1();
  std::vector<double> gx(g + 1);
  std::vector<AmPairSolver::Point> gp(g + 1);
  int gbest = -1;
  // Walk downward from l1_max so that warm starts follow the curve.
  for (int i = g; i >= 0; --i) {
    gx[i] = top - width * (g - i) / g;
    gp[i] = solver.evaluate(gx[i]);
    if (gp[i].ok && (gbest < 0 || gp[i].n_max < gp[gbest].n_max)) gbest = i;
  }
  if (gbest < 0) return std::nullopt;
  const double a = gbest > 0 ? gx[gbest - 1] : gx[0];
  const double b = gbest < g ? gx[gbest + 1] : top;
  AmPairSolver::Point best_pt = gp[gbest];
  auto objective = [&](double l1) {
    const AmPairSolver::Point pt = solver.evaluate(l1);
    if (pt.ok && pt.n_max < best_pt.n_max) best_pt = pt;
    return pt.ok ? pt.n_max : std::numeric_limits<double>::max();
  };
  numerics::brent_minimize(objective, a, b, opt.l_tol);
  return Candidate{{n1, best_pt.l1, best_pt.l2, n2, best_pt.l3}, best_pt.n_max};
}

}  // namespace detail

/// ASN-minimax one-sided double plan for the risk point: among plans
/// meeting both OC conditions, the one with the smallest maximal ASN.
///
/// For every (n1, n2) both OC conditions are made to bind (l3 from the RQL
/// condition, l2 as the smallest root of the AQL condition) leaving l1
/// free, and N_max is minimized over l1. Rows n1 = n~-1, n~-2, ... are
/// walked in n2 outward from the previous row's best n2 until N_max has
/// risen `patience` times in each direction (or, with `exhaustive`, over
/// every n2). A pair is skipped once n1 + n2 (1 - alpha - F_1(l1_max; p1)),
/// a lower bound on its N_max, cannot beat the incumbent.
inline AmResult solve_am_onesided(const RiskPoint& risk, const AmOptions& opt = {}) {
  risk.validate();
  const int min_n = std::max(opt.min_sample, 2);
  const OneSidedSinglePlan single = solve_onesided_single(risk, min_n);
  const int max_n2 = opt.max_n2 > 0 ? opt.max_n2 : single.n;
  const double z1 = numerics::std_normal_quantile(risk.p1);
  const double z2 = numerics::std_normal_quantile(risk.p2);

  AmResult result;
  result.single = single;
  detail::Candidate incumbent{{single.n, single.l, single.l, min_n, single.l}, static_cast<double>(single.n)};
  bool found_double = false;
  int row_best_n2 = -1;

  for (int n1 = single.n - 1; n1 >= min_n; --n1) {
    if (n1 >= incumbent.n_max) continue;
    const double l1_max = acceptance_constant(n1, z2, risk.beta);
    const double min_continue = (1.0 - risk.alpha) - onesided_oc_z(n1, l1_max, z1);
    auto pruned = [&](int n2) { return n1 + n2 * min_continue >= incumbent.n_max + 1e-9; };
    double row_value = std::numeric_limits<double>::infinity();
    int row_arg = -1;
    auto visit = [&](int n2) -> std::optional<double> {
      ++result.pairs_evaluated;
      const auto cand = detail::optimize_pair(risk, n1, n2, l1_max, opt);
      if (!cand) return std::nullopt;
      if (detail::better(*cand, incumbent)) {
        incumbent = *cand;
        found_double = true;
      }
      if (cand->n_max < row_value) {
        row_value = cand->n_max;
        row_arg = n2;
      }
      return cand->n_max;
    };

    if (opt.exhaustive || row_best_n2 < 0) {
      for (int n2 = min_n; n2 <= max_n2 && !pruned(n2); ++n2) visit(n2);
    } else {
      const int start = std::clamp(row_best_n2, min_n, max_n2);
      // Upward from the start, including it.
      double last = std::numeric_limits<double>::infinity();
      int rises = 0;
      for (int n2 = start; n2 <= max_n2 && !pruned(n2) && rises < opt.patience; ++n2) {
        const auto v = visit(n2);
        if (v && *v > last) ++rises; else if (v) rises = 0;
        if (v) last = *v;
      }
      // Downward; stops at the first infeasible size.
      last = std::numeric_limits<double>::infinity();
      rises = 0;
      for (int n2 = start - 1; n2 >= min_n && rises < opt.patience; --n2) {
        if (pruned(n2)) continue;
        const auto v = visit(n2);
        if (!v) break;
        if (*v > last) ++rises; else rises = 0;
        last = *v;
      }
    }
    if (row_arg >= 0) row_best_n2 = row_arg;
  }

  result.plan = incumbent.plan;
  result.degenerate = !found_double;
  if (found_double) {
    const AsnMaximum refined = asn_max(incumbent.plan);
    result.n_max = std::max(refined.value, incumbent.n_max);
    result.p_at_max = refined.p;
  } else {
    result.n_max = static_cast<double>(single.n);
    result.p_at_max = 0.5;
  }
  return result;
}

}  // namespace vsplan
