"""Smooth plateau bump and the dyadic frequency ladder built from it."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ParameterError

_TABLE_SIZE = 4097


@lru_cache(maxsize=1)
def _step_spline() -> CubicSpline:
    # cumulative integral of the mollifier exp(-1/(1-v^2)) on [-1, 1],
    # normalised to run from 0 to 1
    x, wq = np.polynomial.legendre.leggauss(40)
    grid = np.linspace(-1.0, 1.0, _TABLE_SIZE)
    cum = np.zeros_like(grid)
    for i in range(1, len(grid)):
        lo, hi = grid[i - 1], grid[i]
        v = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        inside = np.abs(v) < 1
        f = np.zeros_like(v)
        f[inside] = np.exp(-1.0 / (1.0 - v[inside] ** 2))
        cum[i] = cum[i - 1] + 0.5 * (hi - lo) * np.dot(wq, f)
    cum /= cum[-1]
    return CubicSpline(grid, cum, bc_type="clamped")


def plateau_bump(u):
    """Even C-infinity bump: 1 on [-1/2, 1/2], 0 outside (-1, 1).

    The transition is the normalised cumulative mollifier, tabulated once and
    read back with a clamped cubic spline.
    """
    u = np.abs(np.asarray(u, dtype=float))
    s = np.clip((u - 0.75) * 4.0, -1.0, 1.0)
    out = 1.0 - _step_spline()(s)
    out = np.where(u <= 0.5, 1.0, np.where(u >= 1.0, 0.0, out))
    return float(out) if out.ndim == 0 else out


def plateau_bump_deriv(u, order: int):
    """Derivative of ``plateau_bump`` of the given order (1..3) for u >= 0."""
    if order not in (1, 2, 3):
        raise ParameterError("order must be 1, 2 or 3")
    u = np.abs(np.asarray(u, dtype=float))
    s = np.clip((u - 0.75) * 4.0, -1.0, 1.0)
    d = -_step_spline().derivative(order)(s) * 4.0**order
    out = np.where((u <= 0.5) | (u >= 1.0), 0.0, d)
    return float(out) if out.ndim == 0 else out


def cutoff(u, scale):
    """plateau_bump(u / scale): keeps frequencies up to about ``scale``."""
    return plateau_bump(np.asarray(u, dtype=float) / scale)


def dyadic_bump(v):
    """plateau_bump(v/2) - plateau_bump(v): supported in [1/2, 2], equal to 1 at v = 1."""
    v = np.asarray(v, dtype=float)
    return plateau_bump(0.5 * v) - plateau_bump(v)


def dyadic_bump_jet(v):
    """dyadic_bump and its first two derivatives at v > 0."""
    v = np.asarray(v, dtype=float)
    g0 = dyadic_bump(v)
    g1 = 0.5 * plateau_bump_deriv(0.5 * v, 1) - plateau_bump_deriv(v, 1)
    g2 = 0.25 * plateau_bump_deriv(0.5 * v, 2) - plateau_bump_deriv(v, 2)
    return g0, g1, g2


def dyadic_ladder(base: float, top: float) -> list[float]:
    """Scales top/2, top/4, ... that stay >= ``base``, in ascending order.

    Each scale g carries the window dyadic_bump(u/g) = cutoff(u, 2g) - cutoff(u, g),
    so the windows telescope exactly:

        cutoff(u, ladder[0]) + sum_g dyadic_bump(u/g) = cutoff(u, top).

    When base > top/2 the ladder is empty and the base piece is cutoff(u, top).
    """
    if not 0 < base <= top:
        raise ParameterError(f"need 0 < base <= top, got base={base}, top={top}")
    rungs = []
    g = top / 2
    while g >= base * (1 - 1e-12):
        rungs.append(g)
        g /= 2
    return rungs[::-1]


def on_ladder(gamma: float, ladder: list[float]) -> bool:
    return any(math.isclose(gamma, g, rel_tol=1e-12) for g in ladder)
