"""Compensated summation, double-double phase reduction and Gauss rules."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

TWO_PI = 2.0 * np.pi
# 2 pi split into a head and a tail so that head + tail matches 2 pi to ~1e-32
_TWO_PI_HI = 6.283185307179586
_TWO_PI_LO = 2.4492935982947064e-16


def _neumaier_real(terms: np.ndarray) -> np.ndarray:
    s = np.zeros(terms.shape[1:])
    c = np.zeros(terms.shape[1:])
    for v in terms:
        t = s + v
        big = np.abs(s) >= np.abs(v)
        c += np.where(big, (s - t) + v, (v - t) + s)
        s = t
    return s + c


def compensated_sum(terms, axis: int = -1):
    """Neumaier-compensated sum along ``axis``, in index order.

    Complex input is summed componentwise.  The order is fixed, so the result
    is reproducible bit for bit.
    """
    terms = np.moveaxis(np.asarray(terms), axis, 0)
    if np.iscomplexobj(terms):
        out = _neumaier_real(terms.real) + 1j * _neumaier_real(terms.imag)
    else:
        out = _neumaier_real(terms.astype(float))
    return out[()] if out.ndim == 0 else out


def two_prod(a, b):
    """Exact product a*b = p + e (Dekker/Veltkamp splitting, no fma needed).

    Exact while |a b| stays clear of the subnormal range (above ~1e-290)
    and |a|, |b| stay below ~1e300, where the splitting would overflow.
    """
    p = a * b
    split = 134217729.0  # 2**27 + 1
    ca = split * a
    ah = ca - (ca - a)
    al = a - ah
    cb = split * b
    bh = cb - (cb - b)
    bl = b - bh
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def two_sum(a, b):
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def reduce_phase(hi, lo=0.0):
    """Reduce the double-double number ``hi + lo`` modulo 2 pi into [-pi, pi)."""
    hi = np.asarray(hi, dtype=float)
    lo = np.asarray(lo, dtype=float)
    n = np.round(hi / TWO_PI)
    p1, e1 = two_prod(n, _TWO_PI_HI)
    r, e2 = two_sum(hi, -p1)
    r = r + (lo - e1 + e2 - n * _TWO_PI_LO)
    return np.mod(r + np.pi, TWO_PI) - np.pi


def _cascade(values):
    """Sum doubles, returning (head, accumulated rounding error)."""
    head, err = values[0], 0.0
    for v in values[1:]:
        head, e = two_sum(head, v)
        err = err + e
    return head, err


def ratio_power_dd(num, den):
    """(1 + num/den)**(2/3) - 1 as a double-double pair, for num >= 0.

    The double estimate from expm1/log1p is polished by one Newton step on
    (1 + d)^3 = (1 + r)^2 whose residual is evaluated with error-free
    products and sums, giving roughly 32 significant digits.
    """
    num = np.asarray(num, dtype=float)
    den = float(den)
    r = num / den
    p, e = two_prod(r, den)
    r_lo = ((num - p) - e) / den
    d = np.expm1((2.0 / 3.0) * np.log1p(r))
    a1, e1 = two_prod(3.0, d)
    sq, esq = two_prod(d, d)
    a2, e2 = two_prod(3.0, sq)
    cu, ecu = two_prod(d, sq)
    rr, err = two_prod(r, r)
    head, tail = _cascade([a1, a2, cu, -2.0 * r, -rr])
    small = (e1 + e2 + 3.0 * esq + ecu + d * esq) - (2.0 * r_lo + err + 2.0 * r * r_lo)
    resid = head + (tail + small)
    d_lo = -resid / (3.0 * (1.0 + d) ** 2)
    return d, d_lo


@lru_cache(maxsize=64)
def gauss_legendre(order: int):
    return np.polynomial.legendre.leggauss(order)


def panel_rule(lo: float, hi: float, panels: int, order: int = 20):
    """Composite Gauss-Legendre nodes and weights on [lo, hi]."""
    x, wq = gauss_legendre(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * wq).ravel()
    return nodes, weights
