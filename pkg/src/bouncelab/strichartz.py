"""Time-integrated sup norms of the Green function below the reflection horizon.

For a fixed source height a the scans work in the window
t in [1.2 sqrt(a), t_end], t_end <= a / h^(1/3), where the number of
reflections stays below lam^(1/3).  Two quantities are produced:

* the L^p norm in time (p = q/2 by Young's inequality) of sup_{x <= a} |G|,
  whose h-scaling gives the loss exponent of the q-Strichartz estimate;
* the resonance ledger: the tangential window of G, restricted to the short
  intervals |t/sqrt(a) - 2N| < 1/N where swallowtail peaks live, squared and
  integrated after the normalisation |V_N| = h^(2/3) |G|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .airy import AiryZeroTable
from .cutoffs import dyadic_bump
from .errors import ParameterError
from .spectral import PhysParams, green_on_grid


def resonance_intervals(T_lo: float, T_hi: float, n_max: int | None = None):
    """The intervals (2N - 1/N, 2N + 1/N) in scaled time meeting [T_lo, T_hi]."""
    out = []
    n = 1
    while 2 * n - 1 / n < T_hi and (n_max is None or n <= n_max):
        lo, hi = 2 * n - 1 / n, 2 * n + 1 / n
        if hi > T_lo:
            out.append((n, max(lo, T_lo), min(hi, T_hi)))
        n += 1
    return out


def scan_times(a: float, T_lo: float, T_hi: float, n_uniform: int, n_extra: int = 40):
    """Uniform scaled-time grid plus ``n_extra`` nodes inside each resonance interval."""
    parts = [np.linspace(T_lo, T_hi, n_uniform)]
    for _, lo, hi in resonance_intervals(T_lo, T_hi):
        parts.append(np.linspace(lo, hi, n_extra + 2)[1:-1])
    return np.unique(np.concatenate(parts)) * math.sqrt(a)


def lower_heights(p: PhysParams, n_uniform: int = 300, n_cluster: int = 100):
    """Grid on [0, a] with a cluster in the Airy layer just below a."""
    layer = 5 * p.h ** (2.0 / 3.0)
    uni = np.linspace(0.0, p.a, n_uniform)
    clu = np.linspace(max(0.0, p.a - layer), p.a, n_cluster)
    return np.unique(np.concatenate([uni, clu]))


def trapezoid(y, x) -> float:
    y, x = np.asarray(y, dtype=float), np.asarray(x, dtype=float)
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


@dataclass(frozen=True)
class TimeNorm:
    h: float
    norm: float
    resonant_share: float  # fraction of the integral of sup^p from the intervals


def sup_time_norm(p: PhysParams, table: AiryZeroTable, t_end: float, power: float = 2.0,
                  n_uniform: int = 4000, n_extra: int = 40) -> TimeNorm:
    """L^power norm in t of sup_{x <= a} |G| over [1.2 sqrt(a), t_end]."""
    T_lo, T_hi = 1.2, t_end / math.sqrt(p.a)
    if T_hi <= T_lo:
        raise ParameterError(f"empty time window: t_end={t_end} <= 1.2 sqrt(a)")
    t = scan_times(p.a, T_lo, T_hi, n_uniform, n_extra)
    sup = np.abs(green_on_grid(t, lower_heights(p), p, table)).max(axis=1)
    y = sup**power
    total = trapezoid(y, t)
    res = 0.0
    for _, lo, hi in resonance_intervals(T_lo, T_hi):
        m = (t >= lo * math.sqrt(p.a)) & (t <= hi * math.sqrt(p.a))
        res += trapezoid(y[m], t[m])
    return TimeNorm(p.h, total ** (1 / power), res / total)


def resonance_ledger(p: PhysParams, table: AiryZeroTable, n_per_interval: int = 400) -> float:
    """sum_{N < lam^(1/3)} int_{I_N} (h^(2/3) sup_{x<=a} |G_tangential|)^2 dt.

    G_tangential keeps the modes with omega h^(2/3) in the window of scale a.
    """
    lam3 = p.mode_scale ** (1.0 / 3.0)
    ns = [n for n in range(1, math.ceil(lam3)) if n < lam3]
    if not ns:
        raise ParameterError("no resonance below lam^(1/3)")
    weight = lambda u: dyadic_bump(u / p.a)  # noqa: E731
    w_top = 2 * p.a * p.h ** (-2.0 / 3.0)
    xs = lower_heights(p)
    total = 0.0
    for n in ns:
        t = np.linspace(2 * n - 1 / n, 2 * n + 1 / n, n_per_interval) * math.sqrt(p.a)
        g = green_on_grid(t, xs, p, table, weight, w_top)
        y = (p.h ** (2.0 / 3.0) * np.abs(g).max(axis=1)) ** 2
        total += trapezoid(y, t)
    return total


def ledger_model(a: float, h: float) -> float:
    """The same sum with |V_N| replaced by its predicted size near resonance."""
    lam3 = (a**1.5 / h) ** (1.0 / 3.0)
    ns = [n for n in range(1, math.ceil(lam3)) if n < lam3]
    total = 0.0
    for n in ns:
        base = (n / lam3) ** 0.25

        def f(t):
            return 1.0 / (base + n ** (1 / 3) * abs(math.sqrt(t / (2 * n * math.sqrt(a))) - 1) ** (1 / 6)) ** 2

        lo, hi = (2 * n - 1 / n) * math.sqrt(a), (2 * n + 1 / n) * math.sqrt(a)
        mid = 2 * n * math.sqrt(a)
        total += quad(f, lo, mid, limit=200)[0] + quad(f, mid, hi, limit=200)[0]
    return total


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    stderr: float


def fit_line(x, y) -> SlopeFit:
    """Least-squares line with the standard error of the slope."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    dof = max(len(x) - 2, 1)
    sxx = np.sum((x - x.mean()) ** 2)
    err = math.sqrt(np.sum(resid**2) / dof / sxx) if sxx > 0 else math.inf
    return SlopeFit(float(coef[0]), float(coef[1]), err)


def loss_exponent(hs, norms) -> SlopeFit:
    """Loss e in norm ~ h^(-1/2 - e), from a log-log fit over the h ladder."""
    f = fit_line(np.log(hs), np.log(norms))
    return SlopeFit(-f.slope - 0.5, f.intercept, f.stderr)


def relative_log_slope(hs, values) -> float:
    """Slope of values against ln(1/h), divided by their mean."""
    f = fit_line(np.log(1 / np.asarray(hs)), values)
    return f.slope / float(np.mean(values))
