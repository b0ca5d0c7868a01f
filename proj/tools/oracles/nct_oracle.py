"""Reference values of the noncentral t cdf by nested quadrature.

P(T <= l) with T = (Z + delta) / sqrt(V / nu) is integrated directly as
int g_nu(v) int_{-inf}^{l sqrt(v/nu) - delta} phi(z) dz dv, with no series
and no special functions beyond the normal and chi-square densities.
Output lines are C++ initializers for tests/nct_oracle.inc.
"""
import mpmath as mp

mp.mp.dps = 30

POINTS = [(-10.6, 24, -11.4), (-9.1, 24, -7.6), (-8.26, 18, -6.6), (-12.0, 35, -13.8), (-11.0, 35, -9.2),
          (0.5, 1, 0.0), (-1.0, 3, -0.5), (2.0, 5, 1.0), (-3.0, 10, -2.0), (0.0, 10, 1.5),
          (-19.5, 80, -20.9), (-18.0, 80, -14.0), (-16.7, 65, -12.5), (-22.5, 114, -24.8), (-22.5, 114, -16.6),
          (-5.0, 2, -4.0), (3.0, 50, 0.0), (-7.0, 40, -3.0), (-14.0, 30, -12.0), (-25.0, 114, -22.0)]


def cdf(l, nu, d):
    c = mp.mpf(nu) / 2
    g = lambda v: mp.exp((c - 1) * mp.log(v) - v / 2 - mp.loggamma(c) - c * mp.log(2))
    inner = lambda v: mp.quad(mp.npdf, [-mp.inf, l * mp.sqrt(v / nu) - d])
    s = mp.sqrt(2 * nu)
    breaks = [0] + [x for x in (nu - 6 * s, nu - 3 * s, nu, nu + 3 * s, nu + 6 * s, nu + 12 * s) if x > 0] + [mp.inf]
    return mp.quad(lambda v: inner(v) * g(v), breaks)


if __name__ == "__main__":
    for l, nu, d in POINTS:
        print("{%r, %d, %r, %s}," % (l, nu, d, mp.nstr(cdf(mp.mpf(l), nu, mp.mpf(d)), 20)))
