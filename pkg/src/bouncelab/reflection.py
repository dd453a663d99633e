"""Green function as a sum over boundary reflections.

Each frequency window of the Green function is rewritten, through the
zero-counting phase, as a sum over reflection counts N of three-fold
oscillatory integrals in (alpha, sigma, s).  In normalised units
(T = t/sqrt(gamma), X = x/gamma, A = a/gamma, lam = gamma^(3/2)/h) the N-th
phase divided by gamma^(3/2) is

    T alpha + sigma^3/3 + sigma (X - alpha) + s^3/3 + s (A - alpha)
        - (4/3) N alpha^(3/2)

up to the constant -N pi/2.  The alpha integral is done by stationary phase
(with the first correction term), leaving a 2D integral over (sigma, s).
The N = 0 term has no alpha critical point and is integrated exactly through
its Airy-function form.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import airy

from .cutoffs import dyadic_bump, dyadic_bump_jet, plateau_bump
from .errors import ParameterError
from .numerics import panel_rule
from .spectral import PhysParams

# support of the frequency window in alpha
WINDOW = (0.5, 2.0)
MIN_MODE_SCALE = 10.0


class NoCriticalPoint(ParameterError):
    """The alpha equation has no real solution (negative square root)."""


@dataclass(frozen=True)
class ReflectionConfig:
    """Numerical knobs: window constant, node density, stationary-phase order.

    ``node_scale`` sets nodes per axis to about node_scale * lam (rounded up
    to whole 20-point panels, never below ``min_nodes``).  ``b1`` is the first
    coefficient of the phase remainder; 0 leaves it out of the symbol.
    """

    m_cut: float = 3.0
    node_scale: float = 8.0
    min_nodes: int = 200
    sp_order: int = 1
    b1: float = 0.0
    far_constant: float = 1.0

    def __post_init__(self):
        if self.m_cut < 2:
            raise ParameterError("m_cut must be >= 2")
        if self.node_scale <= 0 or self.min_nodes < 20:
            raise ParameterError("node_scale must be positive and min_nodes >= 20")
        if self.sp_order not in (0, 1):
            raise ParameterError("sp_order must be 0 or 1")

    def nodes(self, lam: float) -> int:
        n = max(self.min_nodes, self.node_scale * lam)
        return 20 * math.ceil(n / 20)


@dataclass(frozen=True)
class CriticalPoint:
    alpha: float
    in_window: bool


def alpha_critical(sigma, s, t, gamma, N) -> CriticalPoint:
    """Solve d/d alpha of the N-th phase = 0: sqrt(alpha) = (T - sigma - s)/(2N)."""
    if N < 1:
        raise ParameterError("the alpha critical point needs N >= 1")
    if t <= 0 or gamma <= 0:
        raise ParameterError("t and gamma must be positive")
    root = t / (2 * N * math.sqrt(gamma)) - (s + sigma) / (2 * N)
    if root < 0:
        raise NoCriticalPoint(f"no critical point: sqrt(alpha) = {root:.6g} < 0")
    alpha = root * root
    return CriticalPoint(alpha, WINDOW[0] <= alpha <= WINDOW[1])


def n_window(t, gamma, m_cut: float = 3.0) -> range:
    """Reflection counts 0..floor(m_cut t/sqrt(gamma)) that can contribute."""
    if m_cut < 2:
        raise ParameterError("m_cut must be >= 2")
    top = math.floor(m_cut * t / math.sqrt(gamma) + 1e-12)
    return range(0, max(top, 0) + 1)


# ---------------------------------------------------------------------------
# the phase and its derivatives


@dataclass(frozen=True)
class ReflectionPhase:
    """Phase of the N-th reflected term for fixed (t, x, a, gamma, h)."""

    N: int
    gamma: float
    t: float
    x: float
    a: float

    @property
    def _scale(self):
        return self.gamma**1.5

    @property
    def scaled_time(self):
        return self.t / math.sqrt(self.gamma)

    def __call__(self, alpha, s, sigma):
        X, A = self.x / self.gamma, self.a / self.gamma
        inner = (
            self.scaled_time * alpha
            + sigma**3 / 3 + sigma * (X - alpha)
            + s**3 / 3 + s * (A - alpha)
            - (4.0 / 3.0) * self.N * alpha**1.5
        )
        return self._scale * inner

    def d_sigma(self, alpha, s, sigma):
        return self._scale * (sigma**2 + self.x / self.gamma - alpha)

    def d_s(self, alpha, s, sigma):
        return self._scale * (s**2 + self.a / self.gamma - alpha)

    def d_alpha(self, alpha, s, sigma):
        return self._scale * (self.scaled_time - sigma - s - 2 * self.N * np.sqrt(alpha))


# ---------------------------------------------------------------------------
# per-packet bounds


def packet_bound(N, T, lam, K, X, h, far_constant: float = 1.0):
    """Size of the N-th tangential packet predicted by the dispersive analysis.

    Returns (bound, tag) with tag in {"large-N", "far", "near"}; constants
    are 1.  Between |K-1| = 1/(4N^2) and far_constant/N^2 neither estimate
    applies and the larger of the two is returned.
    """
    if N < 1:
        raise ParameterError("packet_bound needs N >= 1")
    if X > 1:
        raise ParameterError("packet_bound needs x <= a (X <= 1)")
    h3 = h ** (1.0 / 3.0)
    cube = lam ** (1.0 / 3.0)
    dk = abs(K - 1)
    if N >= cube:
        den = math.sqrt(N / cube) + lam ** (1.0 / 6.0) * math.sqrt(4 * N) * math.sqrt(dk)
        return h3 / den, "large-N"
    far = h3 / (1 + 2 * N * math.sqrt(dk))
    near = h3 / ((N / cube) ** 0.25 + N ** (1.0 / 3.0) * dk ** (1.0 / 6.0))
    if dk <= 1 / (4 * N * N):
        return near, "near"
    if dk >= far_constant / (N * N):
        return far, "far"
    return (near, "near") if near >= far else (far, "far")


def transverse_bound(N, gamma, h):
    """gamma^2/h (N lam)^(-1/2) / lam for windows gamma >= 4a."""
    lam = gamma**1.5 / h
    return gamma**2 / h / math.sqrt(N * lam) / lam


# ---------------------------------------------------------------------------
# packet quadrature


def _free_packet(T, X, A, lam, nodes):
    """N = 0 term: the sigma and s integrals are Airy functions exactly."""
    al, wa = panel_rule(WINDOW[0], WINDOW[1], nodes // 20)
    c = lam ** (2.0 / 3.0)
    f = dyadic_bump(al) * np.exp(1j * lam * T * al) * airy(c * (X - al))[0] * airy(c * (A - al))[0]
    return (2 * np.pi) ** 2 * lam ** (-2.0 / 3.0) * np.dot(wa, f)


def _reflected_packet(N, T, X, A, lam, nodes, order, b1, rows=200):
    """Stationary phase in alpha, then tensor Gauss-Legendre in (sigma, s)."""
    R = 2 * math.sqrt(WINDOW[1])
    z, wz = panel_rule(-R, R, nodes // 20)
    u_lo, u_hi = 2 * N * math.sqrt(WINDOW[0]), 2 * N * math.sqrt(WINDOW[1])
    acc = 0j
    for i0 in range(0, len(z), rows):
        sig = z[i0:i0 + rows, None]
        u = T - sig - z[None, :]
        # the alpha window and the (sigma, s) cutoffs |.| < 2 sqrt(alpha_c) = u/N
        keep = (u > u_lo) & (u < u_hi) & (np.abs(sig) < u / N) & (np.abs(z[None, :]) < u / N)
        ii, jj = np.nonzero(keep)
        if ii.size == 0:
            continue
        sg, sv, uu = z[i0 + ii], z[jj], u[ii, jj]
        ac = (uu / (2 * N)) ** 2
        g0, g1, g2 = dyadic_bump_jet(ac)
        f2 = -N * ac**-0.5
        sym = g0 + 0j
        if order:
            f3 = 0.5 * N * ac**-1.5
            f4 = -0.75 * N * ac**-2.5
            c1 = 1j * (g2 / (2 * f2) - g1 * f3 / (2 * f2**2) - g0 * f4 / (8 * f2**2)
                       + 5 * g0 * f3**2 / (24 * f2**3))
            sym = sym + c1 / lam
        if b1:
            sym = sym * np.exp(1j * N * b1 / (lam * ac**1.5))
        rt = uu / (2 * N)
        cut = plateau_bump(sg / (2 * rt)) * plateau_bump(sv / (2 * rt))
        amp = wz[i0 + ii] * wz[jj] * cut * np.sqrt(2 * np.pi / (lam * np.abs(f2))) * sym
        ph = lam * (uu**3 / (12 * N * N) + sg**3 / 3 + sg * X + sv**3 / 3 + sv * A)
        acc += np.sum(amp * np.exp(1j * ph))
    return acc * np.exp(-1j * (N * np.pi / 2 + np.pi / 4))


@dataclass(frozen=True)
class WavePacket:
    N: int
    gamma: float
    value: complex
    K: float
    bound_theory: float
    regime_tag: str
    flag: str = "ok"


def _check_scale(gamma, p: PhysParams):
    lam = gamma**1.5 / p.h
    if lam < MIN_MODE_SCALE:
        raise ParameterError(
            f"gamma={gamma} gives gamma^(3/2)/h = {lam:.4g} < {MIN_MODE_SCALE}; "
            "stationary phase is unreliable there"
        )
    return lam


def v_packet(N, t, x, a, gamma, p: PhysParams, cfg: ReflectionConfig = ReflectionConfig()):
    """The N-th reflected packet V_N, normalised so that G = (1/h) sum_N V_N."""
    if N < 0:
        raise ParameterError("N must be >= 0")
    if t <= 0:
        raise ParameterError("t must be positive")
    lam = _check_scale(gamma, p)
    T, X, A = t / math.sqrt(gamma), x / gamma, a / gamma
    pref = gamma**2 / p.h / (2 * np.pi) ** 2
    nodes = cfg.nodes(lam)
    if N == 0:
        val = pref * _free_packet(T, X, A, lam, 20 * math.ceil(nodes * (1 + T) / 20))
        return WavePacket(0, gamma, complex(val), math.inf, math.nan, "free")
    K = math.sqrt(T / (2 * N))
    if gamma >= 4 * a * (1 - 1e-12):
        bound, tag = transverse_bound(N, gamma, p.h), "transverse"
    else:
        lam_a = a**1.5 / p.h
        bound, tag = packet_bound(N, t / math.sqrt(a), lam_a, K, min(x / a, 1.0), p.h,
                                  cfg.far_constant)
    # alpha_c ranges over ((T - 4 sqrt 2)/(2N))^2 .. ((T + 4 sqrt 2)/(2N))^2 on the box
    reach = 4 * math.sqrt(WINDOW[1])
    if (T + reach) / (2 * N) <= math.sqrt(WINDOW[0]) or (T - reach) / (2 * N) >= math.sqrt(WINDOW[1]):
        return WavePacket(N, gamma, 0j, K, bound, tag, "empty-window")
    val = pref * _reflected_packet(N, T, X, A, lam, nodes, cfg.sp_order, cfg.b1)
    return WavePacket(N, gamma, complex(val), K, bound, tag)


def reflection_packets(t, x, a, gamma, p: PhysParams, cfg: ReflectionConfig = ReflectionConfig(),
                       threads: int = 1):
    """All packets in the reflection window, in ascending N."""
    ns = list(n_window(t, gamma, cfg.m_cut))
    one = lambda n: v_packet(n, t, x, a, gamma, p, cfg)  # noqa: E731
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(one, ns))
    return [one(n) for n in ns]


def green_reflection(t, x, a, gamma, p: PhysParams, cfg: ReflectionConfig = ReflectionConfig(),
                     threads: int = 1) -> complex:
    """Frequency window gamma of the Green function, summed over reflections."""
    packets = reflection_packets(t, x, a, gamma, p, cfg, threads)
    total = 0j
    for pk in packets:
        total += pk.value
    return total / p.h


def write_packets(path, packets) -> None:
    """Packet dump: one row per reflection count."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["N", "gamma", "K", "re_value", "im_value", "abs_value",
                     "bound_theory", "regime_tag"])
        for pk in packets:
            wr.writerow([pk.N, repr(pk.gamma), repr(pk.K), repr(pk.value.real),
                         repr(pk.value.imag), repr(abs(pk.value)), repr(pk.bound_theory),
                         pk.regime_tag])
