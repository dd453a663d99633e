"""Half-line eigenfunctions and the spectrally truncated Green function.

The Dirichlet problem  i h u_t - h^2 u_xx + x u = 0  on x > 0  has
eigenfunctions

    e_k(x) = sqrt(2 pi h^(-2/3) / phase'(omega_k)) Ai(x h^(-2/3) - omega_k)

with eigenvalues omega_k h^(-4/3).  The Green function from a point source at
height ``a`` is summed over modes with frequency weight ``cutoff(omega_k
h^(2/3), eps0)``, or over a single dyadic window of that cutoff.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import airy

from .airy import AiryZeroTable, load_or_build, zeros_needed
from .cutoffs import cutoff, dyadic_bump, dyadic_ladder, on_ladder
from .errors import CoverageError, ParameterError
from .numerics import compensated_sum


@dataclass(frozen=True)
class PhysParams:
    """Raw parameters: semiclassical h, source height a, cutoff eps0, time cap t0."""

    h: float
    a: float
    eps0: float = 0.5
    t0: float = 1.0

    def __post_init__(self):
        if not 0 < self.h < 1:
            raise ParameterError(f"h must lie in (0, 1), got {self.h}")
        if not 0 < self.a <= 1:
            raise ParameterError(f"a must lie in (0, 1], got {self.a}")
        if not 0 < self.eps0 < 1:
            raise ParameterError(f"eps0 must lie in (0, 1), got {self.eps0}")
        if not self.t0 > 0:
            raise ParameterError(f"t0 must be positive, got {self.t0}")

    @property
    def a_natural(self) -> float:
        """Source height floored at the boundary-layer scale h^(2/3)."""
        return max(self.a, self.h ** (2.0 / 3.0))

    @property
    def mode_scale(self) -> float:
        """a^(3/2)/h: number of modes resolving the source height."""
        return self.a**1.5 / self.h

    def scale_modes(self, gamma: float) -> float:
        return gamma**1.5 / self.h

    def scaled_time(self, t):
        return np.asarray(t) / math.sqrt(self.a)

    @property
    def omega_max(self) -> float:
        """Largest spectral parameter reached by the eps0 cutoff."""
        return self.eps0 * self.h ** (-2.0 / 3.0)

    @property
    def ladder(self) -> list[float]:
        return dyadic_ladder(self.a_natural, self.eps0)

    @property
    def base_scale(self) -> float:
        rungs = self.ladder
        return rungs[0] if rungs else self.eps0

    def zero_table(self, cache=None) -> AiryZeroTable:
        return load_or_build(zeros_needed(self.omega_max), cache)


@dataclass(frozen=True)
class NormParams:
    """Normalised variables: mode scale a^(3/2)/h, time t/sqrt(a), height x/a."""

    mode_scale: float
    scaled_time: float
    scaled_height: float

    @classmethod
    def from_raw(cls, h: float, a: float, t: float, x: float) -> "NormParams":
        if h <= 0 or a <= 0 or t < 0 or x < 0:
            raise ParameterError("need h, a > 0 and t, x >= 0")
        return cls(a**1.5 / h, t / math.sqrt(a), x / a)

    def gamma_modes(self, gamma_over_a: float) -> float:
        return self.mode_scale * gamma_over_a**1.5


def eigenfunction(k, x, h: float, table: AiryZeroTable):
    """Normalised Dirichlet eigenfunction e_k at heights ``x``."""
    k = np.asarray(k)
    if np.any(k < 1) or np.any(k > table.k_max):
        raise CoverageError(f"mode index outside 1..{table.k_max}")
    w = table.omega[k - 1]
    norm = np.sqrt(2 * np.pi * h ** (-2.0 / 3.0) / table.phase_slope[k - 1])
    out = norm * airy(np.asarray(x, dtype=float) * h ** (-2.0 / 3.0) - w)[0]
    return float(out) if np.ndim(out) == 0 else out


def _check_time(t, p: PhysParams):
    if not abs(t) <= p.t0:
        raise ParameterError(f"|t| = {abs(t)} exceeds t0 = {p.t0}")


def _mode_sum(t, x, a, p: PhysParams, table: AiryZeroTable, weight, w_top: float):
    """sum_k exp(i t omega_k h^(-1/3)) weight(omega_k h^(2/3)) e_k(x) e_k(a)."""
    _check_time(t, p)
    table.require(w_top)
    n = table.count_below(w_top)
    w = table.omega[:n]
    wt = weight(w * p.h ** (2.0 / 3.0))
    keep = wt != 0
    w, wt, slope = w[keep], wt[keep], table.phase_slope[:n][keep]
    s = p.h ** (-2.0 / 3.0)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    amp = np.exp(1j * t * w * p.h ** (-1.0 / 3.0)) * (2 * np.pi * s / slope) * wt
    ea = airy(a * s - w)[0]
    ex = airy(xs[:, None] * s - w)[0]
    # product in a fixed symmetric order keeps G(t, x, a) == G(t, a, x) bitwise
    terms = amp * (ea * ex)
    out = compensated_sum(terms, axis=1)
    return complex(out[0]) if np.ndim(x) == 0 else out


def green_spectral(t, x, a, p: PhysParams, table: AiryZeroTable):
    """Green function with the smooth eps0 frequency cutoff."""
    return _mode_sum(t, x, a, p, table, lambda u: cutoff(u, p.eps0), p.omega_max)


def green_dyadic(t, x, a, gamma: float, p: PhysParams, table: AiryZeroTable):
    """The piece of the Green function carried by the window dyadic_bump(u/gamma)."""
    if not on_ladder(gamma, p.ladder):
        raise ParameterError(f"gamma={gamma} is not on the ladder {p.ladder}")
    w_top = 2 * gamma * p.h ** (-2.0 / 3.0)
    return _mode_sum(t, x, a, p, table, lambda u: dyadic_bump(u / gamma), w_top)


def green_base(t, x, a, p: PhysParams, table: AiryZeroTable):
    """Low-frequency piece cutoff(u, base_scale) completing the ladder."""
    b = p.base_scale
    w_top = b * p.h ** (-2.0 / 3.0)
    return _mode_sum(t, x, a, p, table, lambda u: cutoff(u, b), w_top)


def mode_matrix(x, a, p: PhysParams, table: AiryZeroTable, weight, w_top: float):
    """Split the mode sum into a height matrix and per-mode frequencies.

    Returns ``(freq, amp)`` with ``amp[i, k] = weight_k e_k(x_i) e_k(a)`` and
    ``freq[k] = omega_k h^(-1/3)``, so that ``amp @ exp(i t freq)`` is the
    weighted Green function at every (x_i, t) at once.
    """
    table.require(w_top)
    n = table.count_below(w_top)
    w = table.omega[:n]
    wt = weight(w * p.h ** (2.0 / 3.0))
    keep = wt != 0
    w, wt, slope = w[keep], wt[keep], table.phase_slope[:n][keep]
    s = p.h ** (-2.0 / 3.0)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    amp = (2 * np.pi * s / slope) * wt * airy(a * s - w)[0] * airy(xs[:, None] * s - w)[0]
    return w * p.h ** (-1.0 / 3.0), amp


def green_on_grid(t_grid, x, p: PhysParams, table: AiryZeroTable, weight=None,
                  w_top=None, chunk: int = 256):
    """|t| x |x| array of the weighted Green function from the source at p.a.

    ``weight`` defaults to the eps0 cutoff.  Times are processed in chunks so
    memory stays bounded; the result is identical whatever the chunk size
    because each entry is one fixed-order dot product.
    """
    if weight is None:
        weight, w_top = (lambda u: cutoff(u, p.eps0)), p.omega_max
    t_grid = np.asarray(t_grid, dtype=float)
    for t in (t_grid.min(), t_grid.max()):
        _check_time(t, p)
    freq, amp = mode_matrix(x, p.a, p, table, weight, w_top)
    out = np.empty((len(t_grid), amp.shape[0]), dtype=complex)
    for i0 in range(0, len(t_grid), chunk):
        ph = np.exp(1j * np.outer(freq, t_grid[i0:i0 + chunk]))
        out[i0:i0 + chunk] = (amp @ ph).T
    return out


# ---------------------------------------------------------------------------
# sup-norm scans


def default_x_grid(p: PhysParams, n_uniform: int = 400, n_cluster: int = 100):
    """Uniform grid on [0, 2a] plus a cluster resolving the Airy layer at x = a."""
    layer = 5 * p.h ** (2.0 / 3.0)
    uni = np.linspace(0.0, 2 * p.a, n_uniform)
    lo, hi = max(0.0, p.a - layer), min(2 * p.a, p.a + layer)
    clu = np.linspace(lo, hi, n_cluster)
    return np.unique(np.concatenate([uni, clu]))


@dataclass(frozen=True)
class SupSample:
    t: float
    scaled_time: float
    sup_abs: float
    argmax_x: float


def refined_sup(f, x_grid, rounds: int = 2, polish: bool = True):
    """Maximise |f| over ``x_grid`` and refine around the coarse argmax.

    Each round evaluates the midpoints on either side of the current best
    point (halving the local spacing).  ``polish`` finishes with a bounded
    Brent search inside the last bracket.
    """
    x_grid = np.asarray(x_grid, dtype=float)
    vals = np.abs(f(x_grid))
    i = int(np.argmax(vals))
    best_x, best = x_grid[i], vals[i]
    if len(x_grid) == 1:
        return float(best), float(best_x)
    left = x_grid[i] - x_grid[i - 1] if i > 0 else x_grid[1] - x_grid[0]
    right = x_grid[i + 1] - x_grid[i] if i + 1 < len(x_grid) else left
    step = 0.5 * min(left, right)
    lo_lim, hi_lim = x_grid[0], x_grid[-1]
    for _ in range(rounds):
        cand = np.clip([best_x - step, best_x + step], lo_lim, hi_lim)
        cv = np.abs(f(cand))
        j = int(np.argmax(cv))
        if cv[j] > best:
            best_x, best = float(cand[j]), float(cv[j])
        step *= 0.5
    if polish:
        lo, hi = max(lo_lim, best_x - 2 * step), min(hi_lim, best_x + 2 * step)
        if hi > lo:
            res = minimize_scalar(
                lambda y: -abs(f(np.array([y]))[0]),
                bounds=(lo, hi),
                method="bounded",
                options={"xatol": 1e-12},
            )
            if -res.fun > best:
                best_x, best = float(res.x), float(-res.fun)
    return float(best), float(best_x)


def sup_norm_scan(p: PhysParams, t_grid, table: AiryZeroTable, x_grid=None,
                  rounds: int = 2, polish: bool = True, threads: int = 1):
    """sup_x |G(t, x, a)| for each t, refined around the coarse argmax."""
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0:
        raise ParameterError("t_grid is empty")
    xg = default_x_grid(p) if x_grid is None else np.asarray(x_grid, dtype=float)
    if xg.min() < 0 or xg.max() > 2 * p.a * (1 + 1e-12):
        raise ParameterError("x_grid must lie in [0, 2a]")

    def one(t):
        f = lambda xx: green_spectral(t, xx, p.a, p, table)  # noqa: E731
        s, xm = refined_sup(f, xg, rounds, polish)
        return SupSample(float(t), float(p.scaled_time(t)), s, xm)

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(one, t_grid))
    return [one(t) for t in t_grid]


# ---------------------------------------------------------------------------
# uniform bound on weighted squared Airy sums


@dataclass(frozen=True)
class AiryBoundResult:
    sup_value: float
    ratio: float
    argmax_b: float = field(default=float("nan"))


def sobolev_airy_bound(n_terms: int, table: AiryZeroTable, b_grid=None):
    """sup_b sum_{k <= n} omega_k^(-1/2) Ai(b - omega_k)^2 and its ratio to n^(1/3)."""
    if n_terms < 1 or n_terms > table.k_max:
        raise CoverageError(f"need 1 <= n_terms <= {table.k_max}")
    w = table.omega[:n_terms]
    if b_grid is None:
        # spacing 0.05 resolves the Airy oscillations near the top zero
        lo, hi = -10.0, w[-1] + 5.0
        b_grid = np.linspace(lo, hi, int((hi - lo) / 0.05) + 1)
    b_grid = np.asarray(b_grid, dtype=float)
    weight = w**-0.5

    def total(b):
        b = np.atleast_1d(b)
        out = np.empty(len(b))
        for i0 in range(0, len(b), 256):
            bb = b[i0:i0 + 256]
            out[i0:i0 + 256] = (airy(bb[:, None] - w)[0] ** 2) @ weight
        return out

    vals = total(b_grid)
    sup, bm = refined_sup(total, b_grid)
    sup = max(sup, float(vals.max()))
    return AiryBoundResult(sup, sup / n_terms ** (1.0 / 3.0), bm)
