"""Airy function, its rotated branches, the zero-counting phase and zero tables.

The phase ``airy_phase(w)`` is the continuous real function with

    airy_phase(w) = pi + i log(A_-(w) / A_+(w)),
    A_pm(z) = exp(-+ i pi/3) Ai(exp(-+ i pi/3) z),

so that ``Ai(-w) = 0`` exactly when ``airy_phase(w)`` is a multiple of 2 pi.
Its derivative at the zeros normalises the Dirichlet eigenfunctions of
``-d^2/dx^2 + x`` on the half-line.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.special import airy as _airy

from .errors import (
    AccuracyError,
    BranchContinuityError,
    ConvergenceError,
    CoverageError,
    DomainError,
)

_ROT_PLUS = np.exp(-1j * np.pi / 3)
_ROT_MINUS = np.exp(1j * np.pi / 3)

# |A_+(z)| ~ ASYMPTOTIC_AMPLITUDE * z**(-1/4) as z -> +inf
ASYMPTOTIC_AMPLITUDE = 1.0 / (2.0 * math.sqrt(math.pi))


def _finite(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def airy_ai(x):
    """Ai(x) for real ``x`` (scalar or array)."""
    arr = _finite(x)
    out = _airy(arr)[0]
    return float(out) if out.ndim == 0 else out


def airy_ai_prime(x):
    """Ai'(x) for real ``x``."""
    arr = _finite(x)
    out = _airy(arr)[1]
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class BranchValue:
    """The pair A_+(z), A_-(z) at a real point, plus Ai(-z) for reference."""

    a_plus: complex
    a_minus: complex
    ai_of_minus_z: float


def rotated_branches(z) -> BranchValue:
    """Evaluate A_+(z) and A_-(z) by complex-rotated Airy evaluation.

    For real ``z`` the two branches are complex conjugates and sum to Ai(-z).
    Below z = 0 they grow like exp((2/3)|z|^(3/2)) while their real part
    stays small, so there the equivalent form (Ai(-z) -+ i Bi(-z))/2 is used
    to keep the real part accurate.
    """
    z = float(_finite(z, "z"))
    ai, _, bi, _ = _airy(-z)
    if z < 0:
        ap = complex(0.5 * ai, -0.5 * bi)
        return BranchValue(ap, ap.conjugate(), float(ai))
    ap = complex(_ROT_PLUS * _airy(_ROT_PLUS * z)[0])
    am = complex(_ROT_MINUS * _airy(_ROT_MINUS * z)[0])
    return BranchValue(ap, am, float(ai))


def _branches_array(w):
    ap = _ROT_PLUS * _airy(_ROT_PLUS * w)[0]
    am = _ROT_MINUS * _airy(_ROT_MINUS * w)[0]
    return ap, am


def asymptotic_branch_modulus(z):
    """Leading large-z modulus of A_+(z): z^(-1/4) / (2 sqrt(pi))."""
    return ASYMPTOTIC_AMPLITUDE * np.asarray(z, dtype=float) ** -0.25


def phase_reference(w):
    """Leading asymptotics (4/3) w^(3/2) + pi/2 of the phase, for w > 0."""
    w = np.asarray(w, dtype=float)
    return (4.0 / 3.0) * w**1.5 + np.pi / 2


def airy_phase(omega, residue_tol: float = 1e-10):
    """The zero-counting phase pi + i log(A_-/A_+) on the real line.

    With A_- = conj(A_+) the phase is 2 arg(i A_+) modulo 2 pi.  The real part
    of A_+ is taken from the sum identity Re A_+ = Ai(-w)/2: for w << 0 the
    branch is almost purely imaginary and the rotated evaluation alone would
    lose the tiny real part to rounding.  The 2 pi branch is fixed by
    continuity: below w = 1 the phase lies in (0, pi); above, it is pinned to
    the nearest copy of the leading asymptotic form, whose error there stays
    under 0.25.
    """
    w = _finite(omega, "omega")
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    ap, am = _branches_array(w)
    # the log-ratio is real up to rounding: its modulus part must vanish
    residue = np.abs(np.log(np.abs(am) / np.abs(ap)))
    bad = residue > residue_tol
    if np.any(bad):
        raise AccuracyError(
            f"imaginary residue {residue[bad].max():.3e} in phase at omega={w[bad][0]}"
        )
    re_plus = 0.5 * _airy(-w)[0]
    principal = 2.0 * np.arctan2(re_plus, -ap.imag)
    out = np.mod(principal, 2 * np.pi)
    hi = w >= 1.0
    if np.any(hi):
        ref = phase_reference(w[hi])
        m = np.round((ref - principal[hi]) / (2 * np.pi))
        val = principal[hi] + 2 * np.pi * m
        off = np.abs(val - ref)
        if np.any(off > np.pi / 2):
            raise BranchContinuityError(
                f"phase branch ambiguous at omega={w[hi][off.argmax()]}"
            )
        out[hi] = val
    return float(out[0]) if scalar else out


def airy_phase_deriv(omega):
    """Derivative of ``airy_phase``: 2 Im(A_+'(w) / A_+(w)).

    A_+'(w) = exp(-2 i pi/3) Ai'(exp(-i pi/3) w); positive everywhere.
    """
    w = _finite(omega, "omega")
    scalar = w.ndim == 0
    zr = _ROT_PLUS * np.atleast_1d(w)
    a, ap = _airy(zr)[:2]
    out = 2.0 * np.imag(_ROT_PLUS * ap / a)
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# zero table


@dataclass(frozen=True)
class AiryZeroTable:
    """Zeros omega_k of Ai(-w), k = 1..k_max, with the phase slope there."""

    omega: np.ndarray
    phase_slope: np.ndarray

    @property
    def k_max(self) -> int:
        return len(self.omega)

    @property
    def k(self) -> np.ndarray:
        return np.arange(1, self.k_max + 1)

    def count_below(self, w: float) -> int:
        """Number of stored zeros strictly below ``w``."""
        return int(np.searchsorted(self.omega, w, side="left"))

    def require(self, w_max: float):
        """Raise if the table stops before ``w_max``."""
        if self.k_max == 0 or self.omega[-1] < w_max:
            need = zeros_needed(w_max)
            raise CoverageError(
                f"zero table has k_max={self.k_max}, needs k_max >= {need} "
                f"to cover omega <= {w_max:.6g}"
            )

    def to_csv(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["k", "omega_k", "L_prime_k"])
            for k, w, s in zip(self.k, self.omega, self.phase_slope):
                wr.writerow([int(k), repr(float(w)), repr(float(s))])

    @classmethod
    def from_csv(cls, path) -> "AiryZeroTable":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        ks = np.array([int(r["k"]) for r in rows])
        if not np.array_equal(ks, np.arange(1, len(ks) + 1)):
            raise ValueError(f"{path}: zero indices are not 1..k_max")
        omega = np.array([float(r["omega_k"]) for r in rows])
        slope = np.array([float(r["L_prime_k"]) for r in rows])
        return cls(omega, slope)



def zeros_needed(w_max: float) -> int:
    """Smallest k_max whose table reaches past ``w_max`` (with one spare)."""
    if w_max <= 0:
        return 1
    return int(math.floor(airy_phase(w_max) / (2 * math.pi))) + 1


def _newton_zeros(ks: np.ndarray, max_iter: int = 60) -> np.ndarray:
    target = 2 * np.pi * ks
    seed = (1.5 * np.pi * ks) ** (2.0 / 3.0)
    lo, hi = 0.8 * seed, 1.2 * seed
    g_lo = airy_phase(lo) - target
    g_hi = airy_phase(hi) - target
    if np.any(g_lo >= 0) or np.any(g_hi <= 0):
        k = ks[(g_lo >= 0) | (g_hi <= 0)][0]
        raise ConvergenceError(f"root not bracketed for k={k}", k=int(k))
    w = seed.copy()
    done = np.zeros(len(ks), bool)
    for _ in range(max_iter):
        g = airy_phase(w) - target
        lo = np.where(g < 0, w, lo)
        hi = np.where(g > 0, w, hi)
        step = g / airy_phase_deriv(w)
        nxt = w - step
        outside = (nxt <= lo) | (nxt >= hi)
        nxt = np.where(outside, 0.5 * (lo + hi), nxt)
        done = np.abs(nxt - w) <= 4 * np.finfo(float).eps * w
        w = nxt
        if np.all(done):
            return w
    k = ks[~done][0]
    raise ConvergenceError(f"Newton iteration did not settle for k={k}", k=int(k))


def airy_zeros(k_max: int) -> AiryZeroTable:
    """Solve airy_phase(w) = 2 pi k for k = 1..k_max."""
    if not 1 <= k_max <= 10**6:
        raise DomainError("k_max must lie in [1, 10**6]")
    ks = np.arange(1, k_max + 1, dtype=float)
    omega = np.empty(k_max)
    for start in range(0, k_max, 20000):
        sl = slice(start, start + 20000)
        omega[sl] = _newton_zeros(ks[sl])
    slope = airy_phase_deriv(omega)
    return AiryZeroTable(omega, slope)


def load_or_build(k_max: int, cache: str | Path | None = None) -> AiryZeroTable:
    """Read a cached table if it is long enough, otherwise build (and store)."""
    if cache is not None:
        path = Path(cache)
        if path.exists():
            table = AiryZeroTable.from_csv(path)
            if table.k_max >= k_max:
                return AiryZeroTable(table.omega[:k_max], table.phase_slope[:k_max])
    table = airy_zeros(k_max)
    if cache is not None:
        table.to_csv(cache)
    return table


# ---------------------------------------------------------------------------
# Poisson identity over the zeros


@dataclass(frozen=True)
class Bump:
    """exp(-1/(1-u^2)) bump rescaled to the interval (lo, hi)."""

    lo: float
    hi: float

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        u = (2 * w - self.lo - self.hi) / (self.hi - self.lo)
        inside = np.abs(u) < 1
        out = np.zeros_like(w)
        out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
        return out


@dataclass(frozen=True)
class PoissonCheck:
    lhs: complex
    rhs: float
    gap: float
    gaps: np.ndarray  # gap after including |N| <= n, for n = 0..n_max


def _panel_rule(lo, hi, panels, order=24):
    x, wq = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * wq).ravel()
    return nodes, weights


def _phase_moments(f, lo, hi, n_max, rtol, max_panels=1 << 14):
    """Integrals of exp(-i n phase(w)) f(w) over (lo, hi) for n = 0..n_max."""
    ns = np.arange(n_max + 1)
    prev = None
    panels = 8
    while panels <= max_panels:
        x, wq = _panel_rule(lo, hi, panels)
        fx = f(x) * wq
        ph = airy_phase(x)
        cur = np.exp(-1j * np.outer(ns, ph)) @ fx
        scale = np.sum(np.abs(fx))
        if prev is not None and np.max(np.abs(cur - prev)) <= rtol * scale:
            return cur
        prev = cur
        panels *= 2
    raise AccuracyError("oscillatory quadrature did not converge")


def poisson_check(
    f: Callable, lo: float, hi: float, n_max: int, table: AiryZeroTable | None = None,
    rtol: float = 1e-13,
) -> PoissonCheck:
    """Compare both sides of the reflection/zero summation identity.

    lhs = sum_{|n| <= n_max} int exp(-i n phase(w)) f(w) dw,
    rhs = 2 pi sum_k f(omega_k) / phase'(omega_k),
    for ``f`` supported in [lo, hi].
    """
    if n_max < 0:
        raise DomainError("n_max must be >= 0")
    moments = _phase_moments(f, lo, hi, n_max, rtol)
    # f is real, so the -n moment is the conjugate of the +n one
    partial = np.cumsum(np.concatenate([[moments[0]], 2 * moments[1:].real]))
    partial = partial + 0j
    if table is None:
        table = airy_zeros(max(zeros_needed(hi), 1))
    else:
        table.require(hi)
    inside = (table.omega > lo) & (table.omega < hi)
    rhs = float(2 * np.pi * np.sum(f(table.omega[inside]) / table.phase_slope[inside]))
    gaps = np.abs(partial - rhs)
    return PoissonCheck(complex(partial[-1]), rhs, float(gaps[-1]), gaps)
