#pragma once

// Special functions, quadrature, root finding and 1-D extremization.
// Everything here is a pure function of its arguments.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

#include "vsplan/error.hpp"

namespace vsplan::numerics {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kEps = std::numeric_limits<double>::epsilon();

/// Tolerances for adaptive quadrature. The acceptance threshold is
/// max(abs_tol, rel_tol * |result|).
struct QuadratureSpec {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_subdivisions = 200;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int intervals = 0;
  bool converged = false;
};

struct Extremum {
  double arg = 0.0;
  double value = 0.0;
};

// ---------------------------------------------------------------------------
// Standard normal

inline double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

// Low part of 1/sqrt(2) beyond kInvSqrt2.
inline constexpr double kInvSqrt2Lo = -4.8336466567264565e-17;

/// Phi(x) = erfc(-x/sqrt(2)) / 2. The rounding error of the scaled argument
/// is recovered with fma and applied as a first-order correction; without it
/// the relative error grows like x^2 in the lower tail.
inline double std_normal_cdf(double x) {
  const double t = -x * kInvSqrt2;
  const double e = std::fma(-x, kInvSqrt2, -t) - x * kInvSqrt2Lo;
  return 0.5 * (std::erfc(t) - e * (2.0 * kInvSqrt2Pi * std::numbers::sqrt2) * std::exp(-t * t));
}

/// Phi(b) - Phi(a) for a <= b, evaluated on the tail that avoids cancellation.
inline double std_normal_mass(double a, double b) {
  if (b <= a) return 0.0;
  if (a > 0.0) return std_normal_cdf(-a) - std_normal_cdf(-b);
  return std_normal_cdf(b) - std_normal_cdf(a);
}

/// Inverse of Phi. Wichura's AS 241 (PPND16) followed by one Newton step on
/// the erfc-based cdf.
inline double std_normal_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("std_normal_quantile: q must lie in (0, 1)");
  const double d = q - 0.5;
  double x;
  if (std::abs(d) <= 0.425) {
    const double r = 0.180625 - d * d;
    x = d *
        (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
              6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
            1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
          1.3314166789178437745e+2) * r + 3.3871328727963666080e0) /
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
            5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
          4.2313330701600911252e+1) * r + 1.0);
  } else {
    double r = std::sqrt(-std::log(d < 0.0 ? q : 1.0 - q));
    if (r <= 5.0) {
      r -= 1.6;
      x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
              3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
            4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
            2.05319162663775882187e0) * r + 1.0);
    } else {
      r -= 5.0;
      x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
            5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
    }
    if (d < 0.0) x = -x;
  }
  // Newton refinement on whichever tail is small.
  const double pdf = std_normal_pdf(x);
  if (pdf > 0.0) {
    const double resid = x <= 0.0 ? std_normal_cdf(x) - q : (1.0 - q) - std_normal_cdf(-x);
    x -= resid / pdf;
  }
  return x;
}

// ---------------------------------------------------------------------------
// Gamma family

/// Regularized lower incomplete gamma P(a, x) and its complement Q(a, x).
inline std::pair<double, double> regularized_gamma(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw DomainError("regularized_gamma: need a > 0, x >= 0");
  if (x == 0.0) return {0.0, 1.0};
  const double log_front = a * std::log(x) - x - std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 100000; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * kEps) break;
    }
    const double p = sum * std::exp(log_front);
    return {p, 1.0 - p};
  }
  // Lentz continued fraction for Q.
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  const double q = std::exp(log_front) * h;
  return {1.0 - q, q};
}

inline double log_chi2_pdf(double t, int r) {
  const double half = 0.5 * r;
  return (half - 1.0) * std::log(t) - 0.5 * t - std::lgamma(half) - half * std::numbers::ln2;
}

/// Density g_r of the chi-square distribution with r degrees of freedom.
inline double chi2_pdf(double t, int r) {
  if (t < 0.0) throw DomainError("chi2_pdf: t must be >= 0");
  if (r < 1) throw DomainError("chi2_pdf: r must be >= 1");
  if (t == 0.0) {
    if (r == 1) return std::numeric_limits<double>::infinity();
    return r == 2 ? 0.5 : 0.0;
  }
  return std::exp(log_chi2_pdf(t, r));
}

// ---------------------------------------------------------------------------
// Root finding and 1-D extremization

struct RootOptions {
  double rel_bracket_tol = 1e-13;  ///< relative to the initial hi - lo
  double f_tol = 0.0;
  int max_iter = 300;
};

/// Brent's method. Requires f(lo) * f(hi) <= 0.
template <class F>
double find_root(F&& f, double lo, double hi, const RootOptions& opt = {}) {
  double a = lo, b = hi, fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) throw NoBracketError("find_root: endpoints do not bracket a root");
  const double xtol = opt.rel_bracket_tol * std::abs(hi - lo);
  double c = a, fc = fa, d = b - a, e = d;
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol = 2.0 * kEps * std::abs(b) + 0.5 * xtol;
    const double m = 0.5 * (c - b);
    if (std::abs(m) <= tol || fb == 0.0 || std::abs(fb) <= opt.f_tol) return b;
    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      double p, q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc, r = fb / fc;
        p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q; else p = -p;
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = m;
      }
    } else {
      d = m;
      e = m;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol ? d : (m > 0.0 ? tol : -tol);
    fb = f(b);
  }
  throw ConvergenceError("find_root: iteration limit reached");
}

/// Golden-section search for a maximum inside [lo, hi].
template <class F>
Extremum golden_maximize(F&& f, double lo, double hi, double x_tol) {
  constexpr double r = 0.61803398874989484820;
  double a = lo, b = hi;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > x_tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = f(x1);
    }
  }
  return f1 >= f2 ? Extremum{x1, f1} : Extremum{x2, f2};
}

/// Brent's parabolic/golden minimizer on [lo, hi] (Forsythe-Malcolm-Moler
/// fmin), used where many cheap local refinements are needed.
template <class F>
Extremum brent_minimize(F&& f, double lo, double hi, double x_tol, int max_iter = 200) {
  constexpr double cgold = 0.38196601125010515180;
  double a = lo, b = hi;
  double x = a + cgold * (b - a), w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    const double xm = 0.5 * (a + b);
    const double tol1 = std::sqrt(kEps) * std::abs(x) + x_tol / 3.0;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - xm) <= tol2 - 0.5 * (b - a)) break;
    bool golden = true;
    if (std::abs(e) > tol1) {
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p; else q = -q;
      const double etemp = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * etemp) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = xm >= x ? tol1 : -tol1;
        golden = false;
      }
    }
    if (golden) {
      e = (x >= xm ? a : b) - x;
      d = cgold * e;
    }
    const double u = std::abs(d) >= tol1 ? x + d : x + (d > 0.0 ? tol1 : -tol1);
    const double fu = f(u);
    if (fu <= fx) {
      if (u >= x) a = x; else b = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return {x, fx};
}

/// Coarse grid scan followed by golden-section refinement around the best
/// grid cell. The grid guards against non-unimodal objectives.
template <class F>
Extremum maximize_1d(F&& f, double lo, double hi, int grid = 201, double x_tol = 1e-10) {
  if (!(lo < hi)) throw DomainError("maximize_1d: need lo < hi");
  grid = std::max(grid, 3);
  const double step = (hi - lo) / (grid - 1);
  int best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i) {
    const double x = i + 1 == grid ? hi : lo + i * step;
    const double v = f(x);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  const double a = lo + std::max(best - 1, 0) * step;
  const double b = best + 1 >= grid ? hi : lo + (best + 1) * step;
  const double best_x = best + 1 == grid ? hi : lo + best * step;
  const Extremum refined = golden_maximize(f, a, b, x_tol * std::max(1.0, std::abs(best_x)));
  return refined.value >= best_val ? refined : Extremum{best_x, best_val};
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod (21-point) quadrature

namespace detail {

inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208044465700, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk21(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::array<double, 21> fv;
  fv[20] = f(center);
  double resk = kWgk[10] * fv[20];
  double resg = 0.0;
  double resabs = std::abs(resk);
  for (int j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(center - dx), f2 = f(center + dx);
    fv[2 * j] = f1;
    fv[2 * j + 1] = f2;
    resk += kWgk[j] * (f1 + f2);
    resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  const double reskh = 0.5 * resk;
  double resasc = kWgk[10] * std::abs(fv[20] - reskh);
  for (int j = 0; j < 10; ++j)
    resasc += kWgk[j] * (std::abs(fv[2 * j] - reskh) + std::abs(fv[2 * j + 1] - reskh));
  const double ah = std::abs(half);
  resk *= half;
  resabs *= ah;
  resasc *= ah;
  double err = std::abs((resk - resg * half));
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps)) err = std::max(50.0 * kEps * resabs, err);
  return {a, b, resk, err};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod quadrature. Never throws on
/// non-convergence; inspect `converged`.
template <class F>
QuadratureResult integrate_with_error(F&& f, double a, double b, const QuadratureSpec& spec = {},
                                      int initial_panels = 1) {
  if (b < a) throw DomainError("integrate: need a <= b");
  if (a == b) return {0.0, 0.0, 0, true};
  initial_panels = std::max(initial_panels, 1);
  std::vector<detail::Segment> heap;
  heap.reserve(static_cast<std::size_t>(spec.max_subdivisions + initial_panels + 2));
  double total = 0.0, total_err = 0.0;
  for (int i = 0; i < initial_panels; ++i) {
    const double lo = a + (b - a) * i / initial_panels;
    const double hi = i + 1 == initial_panels ? b : a + (b - a) * (i + 1) / initial_panels;
    heap.push_back(detail::gk21(f, lo, hi));
    total += heap.back().value;
    total_err += heap.back().error;
  }
  std::make_heap(heap.begin(), heap.end());
  int intervals = initial_panels;
  bool converged = false;
  while (true) {
    if (total_err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
      converged = true;
      break;
    }
    if (intervals >= spec.max_subdivisions) break;
    std::pop_heap(heap.begin(), heap.end());
    const detail::Segment worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end());
      break;
    }
    const detail::Segment left = detail::gk21(f, worst.a, mid);
    const detail::Segment right = detail::gk21(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end());
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end());
    ++intervals;
  }
  // Re-sum to remove drift from the running updates.
  total = 0.0;
  total_err = 0.0;
  for (const auto& s : heap) {
    total += s.value;
    total_err += s.error;
  }
  if (!converged) converged = total_err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total));
  return {total, total_err, intervals, converged};
}

/// Adaptive quadrature of f over [a, b]; throws ConvergenceError when the
/// subdivision budget is exhausted before the tolerance is met.
template <class F>
double integrate(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
  const QuadratureResult r = integrate_with_error(f, a, b, spec);
  if (!r.converged) throw ConvergenceError("integrate: subdivision limit exceeded");
  return r.value;
}

// ---------------------------------------------------------------------------
// Chi-square support truncation

inline constexpr double kChi2TailMass = 1e-13;

struct Chi2Support {
  double t_lo = 0.0;
  double t_hi = 0.0;
};

namespace detail {

inline Chi2Support compute_chi2_support(int r) {
  const double a = 0.5 * r;
  auto upper = [a](double log_t) { return regularized_gamma(a, 0.5 * std::exp(log_t)).second - kChi2TailMass; };
  auto lower = [a](double log_t) { return regularized_gamma(a, 0.5 * std::exp(log_t)).first - kChi2TailMass; };
  const double mode = std::log(std::max(1.0, r - 2.0));
  double hi = mode + 1.0;
  while (upper(hi) > 0.0) hi += 1.0;
  double lo = mode - 1.0;
  while (lower(lo) > 0.0) lo -= 2.0;
  const RootOptions opt{1e-12, 0.0, 300};
  return {std::exp(find_root(lower, lo, mode, opt)), std::exp(find_root(upper, mode, hi, opt))};
}

inline constexpr int kChi2CacheSize = 4096;

}  // namespace detail

/// [t_lo, t_hi] such that P(chi2_r < t_lo) and P(chi2_r > t_hi) are each
/// 1e-13. Memoized per r; thread-safe.
inline Chi2Support chi2_support(int r) {
  if (r < 1) throw DomainError("chi2_support: r must be >= 1");
  if (r >= detail::kChi2CacheSize) return detail::compute_chi2_support(r);
  static std::array<std::once_flag, detail::kChi2CacheSize> flags;
  static std::array<Chi2Support, detail::kChi2CacheSize> table;
  std::call_once(flags[r], [r] { table[r] = detail::compute_chi2_support(r); });
  return table[r];
}

// ---------------------------------------------------------------------------
// Symmetric beta distribution with shape (n-2)/2

struct BetaParams {
  int n = 4;
  double shape() const { return 0.5 * (n - 2); }
};

namespace detail {

inline void check_beta(const BetaParams& params) {
  if (params.n < 4) throw DomainError("BetaParams: n must be >= 4");
}

inline double log_sym_beta_norm(double a) { return std::lgamma(2.0 * a) - 2.0 * std::lgamma(a); }

// I_x(a, a) for 0 < x <= 1/2 by the Lentz continued fraction.
inline double sym_beta_cdf_lower(double x, double a) {
  constexpr double tiny = 1e-300;
  const double b = a;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < 100000; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  const double log_front = log_sym_beta_norm(a) + a * (std::log(x) + std::log1p(-x)) - std::log(a);
  return std::exp(log_front) * h;
}

}  // namespace detail

/// Density b(x) of the symmetric beta law, evaluated in log space so that
/// Gamma(n-2) never overflows.
inline double sym_beta_pdf(double x, const BetaParams& params) {
  detail::check_beta(params);
  if (x < 0.0 || x > 1.0) throw DomainError("sym_beta_pdf: x outside [0, 1]");
  const double a = params.shape();
  if (x == 0.0 || x == 1.0) return a == 1.0 ? 1.0 : (a < 1.0 ? std::numeric_limits<double>::infinity() : 0.0);
  return std::exp(detail::log_sym_beta_norm(a) + (a - 1.0) * (std::log(x) + std::log1p(-x)));
}

/// Distribution function B(x).
inline double sym_beta_cdf(double x, const BetaParams& params) {
  detail::check_beta(params);
  if (x < 0.0 || x > 1.0) throw DomainError("sym_beta_cdf: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  if (x == 0.5) return 0.5;
  const double a = params.shape();
  if (x < 0.5) return detail::sym_beta_cdf_lower(x, a);
  return 1.0 - detail::sym_beta_cdf_lower(1.0 - x, a);
}

/// Inverse of B by safeguarded Newton iteration inside a shrinking bracket.
inline double sym_beta_inv(double q, const BetaParams& params) {
  detail::check_beta(params);
  if (q <= 0.0) return 0.0;
  if (q >= 1.0) return 1.0;
  if (q == 0.5) return 0.5;
  if (q > 0.5) return 1.0 - sym_beta_inv(1.0 - q, params);
  const double a = params.shape();
  // Small-x expansion B(x) ~ x^a / (a * Beta(a, a)).
  double x = std::exp((std::log(q) + std::log(a) - detail::log_sym_beta_norm(a)) / a);
  if (!(x > 0.0)) return 0.0;
  double lo = 0.0, hi = 0.5;
  x = std::min(x, 0.49);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = detail::sym_beta_cdf_lower(x, a) - q;
    if (f == 0.0) return x;
    if (f > 0.0) hi = x; else lo = x;
    const double pdf = std::exp(detail::log_sym_beta_norm(a) + (a - 1.0) * (std::log(x) + std::log1p(-x)));
    double next = pdf > 0.0 ? x - f / pdf : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 4.0 * kEps * x) return next;
    x = next;
    if (hi - lo <= 4.0 * kEps * hi) return x;
  }
  return x;
}

// ---------------------------------------------------------------------------
// Noncentral t

/// Default tolerances for the noncentral t mixture integral; tighter than
/// QuadratureSpec's default because plan constants are found by inverting it.
inline constexpr QuadratureSpec kNoncentralTSpec{1e-14, 1e-13, 400};

/// F_{nu, delta}(l) = P((Z + delta) / sqrt(chi2_nu / nu) <= l), computed as
/// the mixture integral  int Phi(l sqrt(t/nu) - delta) g_nu(t) dt  in the
/// variable log t over the chi-square support.
inline double noncentral_t_cdf(double l, int nu, double delta, const QuadratureSpec& spec = kNoncentralTSpec) {
  if (nu < 1) throw DomainError("noncentral_t_cdf: nu must be >= 1");
  if (!std::isfinite(l) || !std::isfinite(delta)) throw DomainError("noncentral_t_cdf: non-finite argument");
  const Chi2Support sup = chi2_support(nu);
  const double half = 0.5 * nu;
  const double log_norm = std::lgamma(half) + half * std::numbers::ln2;
  const double scale = l / std::sqrt(static_cast<double>(nu));
  auto integrand = [&](double x) {
    const double root_t = std::exp(0.5 * x);
    return std_normal_cdf(scale * root_t - delta) * std::exp(half * x - 0.5 * root_t * root_t - log_norm);
  };
  const QuadratureResult r = integrate_with_error(integrand, std::log(sup.t_lo), std::log(sup.t_hi), spec, 4);
  if (!r.converged) throw ConvergenceError("noncentral_t_cdf: quadrature did not converge");
  // The truncated tails each carry kChi2TailMass; Phi is monotone in t, so
  // its endpoint value is accurate to far below that mass.
  const double tails = kChi2TailMass * (std_normal_cdf(scale * std::sqrt(sup.t_lo) - delta) +
                                        std_normal_cdf(scale * std::sqrt(sup.t_hi) - delta));
  return std::clamp(r.value + tails, 0.0, 1.0);
}

}  // namespace vsplan::numerics
