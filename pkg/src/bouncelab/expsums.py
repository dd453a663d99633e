"""Exponential sums over Airy zeros and Van der Corput bound calculators.

Near the source height the tangential part of the Green function is the sum

    E(T, X) = sum_{k ~ lam} exp(i T lam^(1/3) omega_k)
              Ai(X lam^(2/3) - omega_k) Ai(lam^(2/3) - omega_k) / L'(omega_k).

With (3 pi/8)(4k - 1) = lam + l and z = (lam + l)^(2/3) - lam^(2/3), the
oscillating Airy factors split into the branches exp(+-i (4/3) z^(3/2)), so
E becomes three exponential sums with phases

    f(l)    = tau ((lam + l)/lam)^(2/3),              tau = T lam,
    f_e(l)  = f(l) + e (4/3) lam d^(3/2),             d = (1 + l/lam)^(2/3) - 1,

and slowly varying weights.  Those sums are bounded with the Van der
Corput derivative tests, which are collected here with constant 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.special import airy

from .airy import AiryZeroTable, airy_phase_deriv
from .errors import DomainError, ParameterError, PrecisionError
from .numerics import compensated_sum, ratio_power_dd, reduce_phase, two_prod

MAX_TAU = 1e14
MAX_TERMS = 10**7
_ROT = np.exp(-1j * np.pi / 3)


def _check_eps(eps):
    if eps not in (0, 1, -1):
        raise DomainError(f"branch must be 0, +1 or -1, got {eps}")


# ---------------------------------------------------------------------------
# phases and their derivatives


def phase_f(tau, lam, l, eps=0):
    """tau ((lam+l)/lam)^(2/3) + eps (4/3) ((lam+l)^(2/3) - lam^(2/3))^(3/2)."""
    _check_eps(eps)
    l = np.asarray(l, dtype=float)
    d = np.expm1((2.0 / 3.0) * np.log1p(l / lam))
    out = tau * (1.0 + d) + eps * (4.0 / 3.0) * lam * d**1.5
    return float(out) if out.ndim == 0 else out


def phase_reduced(tau, lam, l, eps=0):
    """phase_f modulo 2 pi in [-pi, pi), with the tau part in double-double."""
    _check_eps(eps)
    if tau > MAX_TAU:
        raise PrecisionError(f"tau = {tau:.3g} exceeds {MAX_TAU:.0e}; reduction mod 2 pi is meaningless")
    l = np.asarray(l, dtype=float)
    d, d_lo = ratio_power_dd(l, lam)
    p, e = two_prod(float(tau), d)
    main = reduce_phase(float(tau)) + reduce_phase(p, e + tau * d_lo)
    if eps:
        main = main + reduce_phase(eps * (4.0 / 3.0) * lam * d**1.5)
    return reduce_phase(main)


_BASE_COEF = {2: -2.0 / 9.0, 3: 8.0 / 27.0, 4: -56.0 / 81.0}
_BASE_POW = {2: -4.0 / 3.0, 3: -7.0 / 3.0, 4: -10.0 / 3.0}


def phase_derivs(tau, lam, l, eps, j):
    """Closed-form j-th derivative in l (j = 2, 3, 4) of the branch-eps phase."""
    _check_eps(eps)
    if j not in (2, 3, 4):
        raise DomainError("derivative order must be 2, 3 or 4")
    l = np.asarray(l, dtype=float)
    u = 1.0 + l / lam
    out = _BASE_COEF[j] * tau / lam**j * u ** _BASE_POW[j]
    if eps:
        w = np.expm1((2.0 / 3.0) * np.log1p(l / lam))
        if j == 2:
            corr = 4.0 / (9.0 * lam * np.sqrt(w) * (w + 1) ** 2)
        elif j == 3:
            corr = -4.0 * (5 * w + 1) / (27.0 * lam**2 * w**1.5 * (w + 1) ** 3.5)
        else:
            corr = 4.0 * (40 * w**2 + 15 * w + 3) / (81.0 * lam**3 * w**2.5 * (w + 1) ** 5)
        out = out + eps * corr
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class DerivativeEnvelope:
    """Nominal size T/lam^(j-1) of the j-th derivative and where it is valid.

    ``gamma_ratio`` is max/min of the branch-0 derivative over the range of
    use, and ``valid_l_from`` = lam / T^(2/(2j-3)) is where the branch
    corrections stop dominating.
    """

    j: int
    delta: float
    gamma_ratio: float
    valid_l_from: float

    @classmethod
    def build(cls, T, lam, j, l1, l2):
        if j not in (2, 3, 4):
            raise DomainError("derivative order must be 2, 3 or 4")
        if T <= 0:
            raise DomainError("T must be positive")
        vals = np.abs(phase_derivs(T * lam, lam, np.array([l1, l2], float), 0, j))
        return cls(j, T / lam ** (j - 1), float(vals.max() / vals.min()),
                   lam / T ** (2.0 / (2 * j - 3)))


# ---------------------------------------------------------------------------
# direct summation


def zero_lattice(lam, l1, l2):
    """Offsets l_k = (3 pi/8)(4k-1) - lam falling in [l1, l2]."""
    k_lo = math.ceil(((lam + l1) / (1.5 * math.pi)) + 0.25)
    k_hi = math.floor(((lam + l2) / (1.5 * math.pi)) + 0.25)
    k = np.arange(k_lo, k_hi + 1, dtype=float)
    return (3 * math.pi / 8) * (4 * k - 1) - lam


def branch_weights(lam, l, eps):
    """Slowly varying factor left after pulling the phase f_eps out of
    exp(i T lam^(1/3) w) Ai(lam^(2/3) - w)^2 / L'(w), with w = (lam+l)^(2/3).

    Branch 0 collects the cross term 2 |A_+|^2.
    """
    _check_eps(eps)
    l = np.asarray(l, dtype=float)
    d = np.expm1((2.0 / 3.0) * np.log1p(l / lam))
    z = lam ** (2.0 / 3.0) * d
    w = lam ** (2.0 / 3.0) * (1 + d)
    a_plus = _ROT * airy(_ROT * z)[0]
    slope = airy_phase_deriv(w)
    if eps == 0:
        return 2 * np.abs(a_plus) ** 2 / slope
    sq = a_plus**2 if eps == 1 else np.conj(a_plus) ** 2
    return sq * np.exp(-1j * eps * (4.0 / 3.0) * z**1.5) / slope


@dataclass(frozen=True)
class ExpSumSpec:
    """sum over l in [l1, l2] of weight_l exp(i f_eps(l)) with tau = T lam.

    ``lattice`` is "integer" (l = l1, l1+1, ...) or "zeros" (the offsets
    l_k of the asymptotic Airy zeros); ``weights`` is "unit", "airy" (the
    branch weights) or a constant.
    """

    lam: float
    T: float
    eps: int = 0
    l1: float = 1.0
    l2: float = 1.0
    weights: object = "unit"
    lattice: str = "integer"

    def __post_init__(self):
        _check_eps(self.eps)
        if self.lam <= 0 or self.T < 0:
            raise ParameterError("need lam > 0 and T >= 0")
        if not 0 <= self.l1 <= self.l2 <= self.lam:
            raise ParameterError("need 0 <= l1 <= l2 <= lam")
        if self.lattice not in ("integer", "zeros"):
            raise ParameterError(f"unknown lattice {self.lattice!r}")

    @property
    def tau(self):
        return self.T * self.lam

    def points(self):
        if self.lattice == "integer":
            n = math.floor(self.l2) - math.ceil(self.l1) + 1
            if n > MAX_TERMS:
                raise ParameterError(f"{n} terms exceed the cap {MAX_TERMS}")
            return np.arange(math.ceil(self.l1), math.floor(self.l2) + 1, dtype=float)
        return zero_lattice(self.lam, self.l1, self.l2)

    def weight_values(self, l):
        if isinstance(self.weights, str):
            if self.weights == "unit":
                return np.ones_like(l)
            if self.weights == "airy":
                return branch_weights(self.lam, l, self.eps)
            raise ParameterError(f"unknown weight rule {self.weights!r}")
        return np.full(len(l), complex(self.weights))


def direct_sum(spec: ExpSumSpec) -> complex:
    """Compensated sum of weight_l exp(i f_eps(l)), phases reduced first."""
    l = spec.points()
    if l.size == 0:
        return 0j
    ph = phase_reduced(spec.tau, spec.lam, l, spec.eps)
    return complex(compensated_sum(spec.weight_values(l) * np.exp(1j * ph)))


def prefix_sums(tau, lam, l, eps=0, phase=None):
    """Running sums of exp(i f(l)) in index order."""
    ph = phase_reduced(tau, lam, l, eps) if phase is None else phase(l)
    return np.cumsum(np.exp(1j * ph))


# ---------------------------------------------------------------------------
# the spectral side


def mode_range(lam):
    """Indices k with (3 pi/2) k in [lam/2, 2 lam]."""
    lo = math.ceil(lam / 2 / (1.5 * math.pi))
    hi = math.floor(2 * lam / (1.5 * math.pi))
    return max(lo, 1), hi


def e_lambda(T, X, lam, table: AiryZeroTable) -> complex:
    """E(T, X) summed over the true zeros with (3 pi/2) k in [lam/2, 2 lam]."""
    lo, hi = mode_range(lam)
    if hi > table.k_max:
        raise ParameterError(f"zero table has k_max={table.k_max}, needs {hi}")
    w = table.omega[lo - 1:hi]
    c = lam ** (2.0 / 3.0)
    p, e = two_prod(T * lam ** (1.0 / 3.0), w)
    ph = reduce_phase(p, e)
    terms = np.exp(1j * ph) * airy(X * c - w)[0] * airy(c - w)[0] / table.phase_slope[lo - 1:hi]
    return complex(compensated_sum(terms))


def e_lambda_small(T, lam, table: AiryZeroTable, l_split=None) -> complex:
    """Part of E(T, 1) from zeros with offset l_k below ``l_split`` (lam^(1/3))."""
    l_split = lam ** (1.0 / 3.0) if l_split is None else l_split
    lo, hi = mode_range(lam)
    k = np.arange(lo, hi + 1)
    lk = (3 * math.pi / 8) * (4 * k - 1) - lam
    sel = k[lk < l_split]
    if sel.size and sel[-1] > table.k_max:
        raise ParameterError(f"zero table has k_max={table.k_max}, needs {sel[-1]}")
    w = table.omega[sel - 1]
    c = lam ** (2.0 / 3.0)
    p, e = two_prod(T * lam ** (1.0 / 3.0), w)
    terms = np.exp(1j * reduce_phase(p, e)) * airy(c - w)[0] ** 2 / table.phase_slope[sel - 1]
    return complex(compensated_sum(terms))


@dataclass(frozen=True)
class BranchAssembly:
    small: complex
    branches: dict
    total: complex


def branch_assembly(T, lam, table: AiryZeroTable) -> BranchAssembly:
    """E(T, 1) rebuilt from the three branch sums on the asymptotic zeros
    plus the exactly summed low part l_k < lam^(1/3)."""
    l1 = lam ** (1.0 / 3.0)
    lo, hi = mode_range(lam)
    l2 = (3 * math.pi / 8) * (4 * hi - 1) - lam
    small = e_lambda_small(T, lam, table, l1)
    br = {e: direct_sum(ExpSumSpec(lam, T, e, l1, min(l2, lam), "airy", "zeros"))
          for e in (0, 1, -1)}
    return BranchAssembly(small, br, small + br[0] + br[1] + br[-1])


# ---------------------------------------------------------------------------
# Van der Corput bounds

VARIANTS = ("vdc2", "vdc_j_generic", "vdc3_sargos", "vdc4")
_VARIANT_ORDER = {"vdc2": 2, "vdc3_sargos": 3, "vdc4": 4}


def vdc_bound(j, M, delta, gamma_ratio=1.0, variant="vdc_j_generic"):
    """Derivative-test bound on |sum_{l <= M} exp(i f(l))| with constant 1.

    vdc2:          M d^(1/2) + d^(-1/2)
    vdc_j_generic: M d^(1/(2^j-2)) + M^(1 - 2^(2-j)) d^(-1/(2^j-2))
    vdc3_sargos:   M d^(1/6) + d^(-1/3)
    vdc4:          M d^(1/14) + M^(3/4) d^(-1/14)
    """
    if variant not in VARIANTS:
        raise ParameterError(f"unknown variant {variant!r}")
    if M < 1 or not delta > 0 or gamma_ratio < 1:
        raise DomainError("need M >= 1, delta > 0 and gamma_ratio >= 1")
    if variant in _VARIANT_ORDER and j != _VARIANT_ORDER[variant]:
        raise ParameterError(f"{variant} is a derivative test of order {_VARIANT_ORDER[variant]}")
    if variant == "vdc2":
        return M * delta**0.5 + delta**-0.5
    if variant == "vdc3_sargos":
        return M * delta ** (1 / 6) + delta ** (-1 / 3)
    if variant == "vdc4":
        return M * delta ** (1 / 14) + M**0.75 * delta ** (-1 / 14)
    if j < 2:
        raise DomainError("generic test needs j >= 2")
    q = 2**j - 2
    return M * delta ** (1 / q) + M ** (1 - 2 ** (2 - j)) * delta ** (-1 / q)


@dataclass(frozen=True)
class PhaseFamily:
    """A phase l -> f(l) with its j-th derivative, for the empirical suites.

    ``branch`` marks the Airy-shifted phases whose envelope only holds from
    ``valid_from`` on.
    """

    f: Callable
    deriv: Callable
    branch: int = 0
    valid_from: float = 0.0

    @classmethod
    def airy_branch(cls, T, lam, eps, j):
        tau = T * lam
        valid = 0.0 if eps == 0 else lam / T ** (2.0 / (2 * j - 3))
        return cls(lambda l: phase_reduced(tau, lam, l, eps),
                   lambda l: phase_derivs(tau, lam, l, eps, j), eps, valid)

    @classmethod
    def power(cls, c, p):
        """f(l) = c l^p."""
        def deriv(l, j=3):
            coef = c
            for i in range(j):
                coef *= p - i
            return coef * np.asarray(l, float) ** (p - j)

        return cls(lambda l: reduce_phase(c * np.asarray(l, float) ** p), deriv)


@dataclass(frozen=True)
class VdcRow:
    M: int
    abs_sum: float
    bound: float
    ratio: float


def vdc_empirical_check(family: PhaseFamily, l1: int, l2: int, j: int, trials: int = 8,
                        variant: str | None = None, delta: float | None = None):
    """|prefix sums| against the j-th derivative bound on nested ranges.

    Prefix lengths M are geometric from 1 to l2 - l1 + 1.  ``delta`` defaults
    to min |f^(j)| on the range.  Ranges where the phase leaves its
    derivative envelope are refused.
    """
    if l1 < 1 or l2 < l1:
        raise DomainError("need 1 <= l1 <= l2")
    if family.branch and l1 < family.valid_from:
        raise DomainError(
            f"branch phase leaves its derivative envelope below l = {family.valid_from:.4g}; "
            f"range starts at {l1}"
        )
    l = np.arange(l1, l2 + 1, dtype=float)
    dj = np.abs(family.deriv(l))
    if not np.all(dj > 0):
        raise DomainError("j-th derivative vanishes on the range: no envelope")
    if delta is None:
        delta = float(dj.min())
    gamma_ratio = max(float(dj.max() / delta), 1.0)
    variant = variant or {2: "vdc2", 3: "vdc3_sargos", 4: "vdc4"}.get(j, "vdc_j_generic")
    sums = np.abs(np.cumsum(np.exp(1j * family.f(l))))
    ms = np.unique(np.geomspace(1, len(l), trials).round().astype(int))
    rows = []
    for m in ms:
        b = vdc_bound(j, int(m), delta, gamma_ratio, variant)
        rows.append(VdcRow(int(m), float(sums[m - 1]), b, float(sums[m - 1] / b)))
    return rows


# ---------------------------------------------------------------------------
# summation by parts


def abel_combine(weight: Callable, partial_bound: Callable, l1: int, l2: int,
                 weight_diff: Callable | None = None) -> float:
    """|weight(l2)| bound(l2) + sum_{l1 <= l < l2} |weight(l+1) - weight(l)| bound(l).

    ``partial_bound(l)`` must bound |sum_{p=l1}^{l} e_p|; ``weight_diff``
    may supply an envelope of the weight increments.
    """
    if l2 < l1:
        raise DomainError("need l1 <= l2")
    l = np.arange(l1, l2, dtype=float)
    if weight_diff is None:
        diffs = np.abs(weight(l + 1) - weight(l)) if l.size else np.zeros(0)
    else:
        diffs = np.abs(weight_diff(l))
    bounds = np.array([partial_bound(v) for v in l]) if l.size else np.zeros(0)
    head = abs(weight(float(l2))) * partial_bound(float(l2))
    return float(head + compensated_sum(diffs * bounds)) if l.size else float(head)


# ---------------------------------------------------------------------------
# regime table

R3_TOPS = (Fraction(29, 12), Fraction(3))


@dataclass(frozen=True)
class RegimeBound:
    regime: str
    bound_value: float
    loss_exponent: float


# (lam exponent, T exponent) of each regime formula
REGIME_EXPONENTS = {
    "R1": (Fraction(-1, 6), Fraction(1, 2)),
    "R2": (Fraction(0), Fraction(1, 6)),
    "R3": (Fraction(5, 42), Fraction(1, 14)),
    "R4": (Fraction(1, 3), Fraction(0)),
}


def _regime_value(name, T, lam):
    pl, pt = REGIME_EXPONENTS[name]
    return lam ** float(pl) * T ** float(pt)


def seam_gaps(lam, r3_top: Fraction = Fraction(29, 12)):
    """Relative jump between adjacent regime formulas at each seam T = lam^x.

    Returns {x: (left regime, right regime, gap)}.
    """
    r3_top = Fraction(r3_top)
    out = {}
    for x, left, right in ((Fraction(1, 2), "R1", "R2"), (Fraction(5, 4), "R2", "R3"),
                           (r3_top, "R3", "R4")):
        T = lam ** float(x)
        lv, rv = _regime_value(left, T, lam), _regime_value(right, T, lam)
        out[x] = (left, right, abs(lv - rv) / lv)
    return out


def regime_bound(T, lam, r3_top: Fraction = Fraction(29, 12)) -> RegimeBound:
    """Piecewise bound on |E(T, 1)| for T >= lam^(1/3).

    R1 (T/lam^(1/3))^(1/2) up to lam^(1/2); R2 T^(1/6) up to lam^(5/4);
    R3 lam^(5/42) T^(1/14) up to lam^r3_top; R4 lam^(1/3).  The loss exponent
    is the dispersive loss at t = 1, see ``dispersion_loss``.
    """
    if Fraction(r3_top) not in R3_TOPS:
        raise ParameterError(f"r3_top must be one of {R3_TOPS}")
    if lam <= 1:
        raise ParameterError("lam must exceed 1")
    if T < lam ** (1.0 / 3.0) * (1 - 1e-12):
        raise ParameterError(f"T = {T} is below lam^(1/3) = {lam ** (1 / 3):.6g}: out of regime")
    x = math.log(T) / math.log(lam)
    if x <= 0.5:
        name = "R1"
    elif x < 1.25:
        name = "R2"
    elif x < float(r3_top):
        name = "R3"
    else:
        name = "R4"
    value = _regime_value(name, T, lam)
    # t = 1: a = T^-2, h = a^(3/2)/lam, loss = 1/6 + ln(value)/ln(1/h)
    loss = 1.0 / 6.0 + math.log(value) / math.log(lam * T**3)
    return RegimeBound(name, value, loss)


def dispersion_loss(T, lam, h, t, r3_top: Fraction = Fraction(29, 12), rtol=1e-9) -> float:
    """Loss e with |G| <~ (1/h)(h/t)^(1/2) h^(-e) implied by the regime table.

    The quadruple must be consistent: a = (lam h)^(2/3) and T = t / sqrt(a).
    For lam <= 1 (source inside the boundary layer) the loss is 1/6.
    """
    if min(h, t, lam, T) <= 0 or h >= 1:
        raise ParameterError("need 0 < h < 1 and positive T, lam, t")
    a = (lam * h) ** (2.0 / 3.0)
    if not math.isclose(T, t / math.sqrt(a), rel_tol=rtol):
        raise ParameterError(f"inconsistent: t/sqrt(a) = {t / math.sqrt(a):.12g} but T = {T}")
    if lam <= 1:
        return 1.0 / 6.0
    B = regime_bound(T, lam, r3_top).bound_value
    return 1.0 / 6.0 + math.log(math.sqrt(t) * B) / math.log(1.0 / h)


def worst_case_loss(r3_top: Fraction = Fraction(29, 12)) -> Fraction:
    """Exact supremum over source heights of the t = 1 loss, as a fraction.

    With t = 1 and a = h^s: lam = h^(3s/2 - 1), T = h^(-s/2) = lam^x with
    s = 2x/(3x + 1).  Inside each regime the loss is linear in s, so the
    supremum is attained at a regime endpoint; each regime formula is
    evaluated at both of its ends (x = infinity means s = 2/3).
    """
    r3_top = Fraction(r3_top)
    if r3_top not in R3_TOPS:
        raise ParameterError(f"r3_top must be one of {R3_TOPS}")
    ends = [Fraction(1, 3), Fraction(1, 2), Fraction(5, 4), r3_top, None]
    formulas = list(REGIME_EXPONENTS.values())

    def s_of(x):
        return Fraction(2, 3) if x is None else 2 * x / (3 * x + 1)

    best = None
    for (pl, pt), lo, hi in zip(formulas, ends[:-1], ends[1:]):
        for x in (lo, hi):
            s = s_of(x)
            val = Fraction(1, 6) - (pl * (Fraction(3, 2) * s - 1) + pt * (-s / 2))
            best = val if best is None else max(best, val)
    return best
