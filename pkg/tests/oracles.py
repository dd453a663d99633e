"""Independent reference computations used by the tests.

None of these call into bouncelab: they rebuild the quantities from series,
bisection, mpmath or brute-force quadrature.
"""

import math

import mpmath as mp
import numpy as np


def ai_maclaurin(x, dps=60):
    """Ai(x) from its Maclaurin series, summed in high precision."""
    with mp.workdps(dps):
        x = mp.mpf(x)
        c1 = 1 / (mp.power(3, mp.mpf(2) / 3) * mp.gamma(mp.mpf(2) / 3))
        c2 = 1 / (mp.power(3, mp.mpf(1) / 3) * mp.gamma(mp.mpf(1) / 3))
        f = g = mp.mpf(0)
        tf, tg = mp.mpf(1), x
        k = 0
        while True:
            f += tf
            g += tg
            # next terms: x^3 / ((3k+2)(3k+3)) and x^3 / ((3k+3)(3k+4))
            tf = tf * x**3 / ((3 * k + 2) * (3 * k + 3))
            tg = tg * x**3 / ((3 * k + 3) * (3 * k + 4))
            k += 1
            if abs(tf) + abs(tg) < mp.mpf(10) ** (-dps + 5) * (abs(f) + abs(g) + 1):
                break
        return float(c1 * f - c2 * g)


def bisect_zero(f, lo, hi, tol=1e-13):
    flo = f(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def mp_derivative(fun, x, order, dps=50):
    """High-precision numerical derivative of a callable taking mpf."""
    with mp.workdps(dps):
        return float(mp.diff(fun, mp.mpf(x), order))


def _ray_rule(n, R):
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1) * R / 2, w * R / 2


def free_packet_triple(T, X, A, lam, window, n_alpha=600, n_ray=200):
    """Brute-force triple sum for the N = 0 reflection term.

    integral over (alpha, sigma, s) of window(alpha)
        exp(i lam (T alpha + sigma^3/3 + sigma (X - alpha) + s^3/3 + s (A - alpha))),
    with each cubic integral taken along the steepest-descent rays
    arg = pi/6 and 5 pi/6 where the integrand decays.
    """
    R = 8 * lam ** (-1.0 / 3.0) + 4
    r, w = _ray_rule(n_ray, R)
    e1, e2 = np.exp(1j * math.pi / 6), np.exp(5j * math.pi / 6)
    z = np.concatenate([r * e1, r * e2])
    dz = np.concatenate([w * e1, -w * e2])
    al, wa = np.polynomial.legendre.leggauss(n_alpha)
    al, wa = 1.25 + 0.75 * al, 0.75 * wa
    zs = z[:, None]
    Es = np.exp(1j * lam * (zs**3 / 3 + zs * (X - al[None, :])))
    Et = np.exp(1j * lam * (zs**3 / 3 + zs * (A - al[None, :])))
    wt = wa * window(al) * np.exp(1j * lam * T * al)
    return complex(np.einsum("a,ia,i,ja,j->", wt, Es, dz, Et, dz))
