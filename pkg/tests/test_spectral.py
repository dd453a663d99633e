import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from bouncelab.airy import airy_ai
from bouncelab.cutoffs import cutoff, dyadic_bump
from bouncelab.errors import CoverageError, ParameterError
from bouncelab.numerics import panel_rule
from bouncelab.spectral import (
    NormParams,
    PhysParams,
    default_x_grid,
    eigenfunction,
    green_base,
    green_dyadic,
    green_on_grid,
    green_spectral,
    mode_matrix,
    sobolev_airy_bound,
    sup_norm_scan,
)


def test_params_validation():
    for bad in [(0.0, 0.3), (1.0, 0.3), (1e-3, 0.0), (1e-3, 1.5)]:
        with pytest.raises(ParameterError):
            PhysParams(*bad)
    with pytest.raises(ParameterError):
        PhysParams(1e-3, 0.3, eps0=1.0)
    p = PhysParams(1e-3, 1e-3)
    assert p.a_natural == pytest.approx(1e-2)
    assert PhysParams(1e-3, 0.3).mode_scale == pytest.approx(0.3**1.5 / 1e-3)


def test_norm_params_identity(table):
    h, a, t = 1e-3, 0.3, 0.7
    n = NormParams.from_raw(h, a, t, 0.15)
    assert n.scaled_height == 0.5
    w = table.omega[:50]
    lhs = h * t * w * h ** (-4 / 3)
    rhs = n.scaled_time * n.mode_scale ** (1 / 3) * w
    assert np.allclose(lhs, rhs, rtol=1e-13)
    assert n.gamma_modes(4.0) == pytest.approx(8 * n.mode_scale)


def test_eigenfunction_dirichlet(table):
    for k in (1, 10, 300):
        assert abs(eigenfunction(k, 0.0, 1e-3, table)) <= 1e-9


@pytest.mark.parametrize("k", [1, 5, 20])
def test_eigenfunction_normalised(table, k):
    h = 0.05
    top = (table.omega[k - 1] + 30) * h ** (2 / 3)
    val = quad(lambda x: eigenfunction(k, x, h, table) ** 2, 0, top, limit=400,
               epsabs=1e-14, epsrel=1e-12)[0]
    assert val == pytest.approx(1.0, abs=1e-6)


def test_eigenfunction_at_turning_point(table):
    w1 = table.omega[0]
    assert eigenfunction(1, w1, 1.0, table) == pytest.approx(
        math.sqrt(2 * math.pi / table.phase_slope[0]) * airy_ai(0.0), rel=1e-14)
    with pytest.raises(CoverageError):
        eigenfunction(table.k_max + 1, 0.1, 1e-3, table)


def test_eigenfunctions_orthogonal(table):
    h = 0.01
    x, w = panel_rule(0.0, 1.5, 200)
    e = np.array([eigenfunction(k, x, h, table) for k in range(1, 9)])
    gram = (e * w) @ e.T
    assert np.allclose(gram, np.eye(8), atol=1e-9)


P = PhysParams(1e-3, 0.3, 0.5, 3.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.01, 3.0), st.floats(0.0, 0.6), st.floats(0.05, 0.6))
def test_green_symmetries(table, t, x, a):
    p = PhysParams(1e-3, a, 0.5, 3.0)
    g = green_spectral(t, x, a, p, table)
    # same summands in the same order: equal bit for bit
    assert g == green_spectral(t, a, x, PhysParams(1e-3, x or a, 0.5, 3.0), table) or x == 0
    assert green_spectral(-t, x, a, p, table) == pytest.approx(np.conj(g), abs=1e-12 * (1 + abs(g)))


def test_green_exchange_exact(table):
    g1 = green_spectral(1.1, 0.2, 0.3, P, table)
    g2 = green_spectral(1.1, 0.3, 0.2, PhysParams(1e-3, 0.2, 0.5, 3.0), table)
    assert g1 == g2


def test_l2_conservation(table):
    x, w = panel_rule(0.0, 0.8, 400)
    norms = []
    for t in (0.0, 0.4, 1.1, 2.5):
        g = green_on_grid([t], x, P, table)[0]
        norms.append(math.sqrt(np.sum(w * np.abs(g) ** 2)))
    # Parseval: sum over modes of (cutoff weight * e_k(a))^2
    freq, amp = mode_matrix(np.array([P.a]), P.a, P, table, lambda u: cutoff(u, P.eps0), P.omega_max)
    n = len(freq)
    ea = eigenfunction(np.arange(1, n + 1), P.a, P.h, table)
    wt = cutoff(table.omega[:n] * P.h ** (2 / 3), P.eps0)
    parseval = math.sqrt(np.sum((wt * ea) ** 2))
    assert np.allclose(norms, norms[0], rtol=1e-6)
    assert norms[0] == pytest.approx(parseval, rel=1e-6)


def test_boundary_vanishing(table):
    xs = default_x_grid(P)
    for t in (0.4, 1.1, 2.5):
        sup = np.abs(green_on_grid([t], xs, P, table)[0]).max()
        assert abs(green_spectral(t, 0.0, P.a, P, table)) <= 1e-8 * sup


def test_grid_matches_pointwise(table):
    xs = np.array([0.1, 0.3, 0.45])
    grid = green_on_grid([0.5, 1.7], xs, P, table)
    for i, t in enumerate((0.5, 1.7)):
        for j, x in enumerate(xs):
            assert grid[i, j] == pytest.approx(green_spectral(t, x, P.a, P, table), rel=1e-11)


def test_time_cap_and_coverage(table):
    with pytest.raises(ParameterError):
        green_spectral(3.5, 0.1, 0.3, P, table)
    with pytest.raises(CoverageError):
        green_spectral(1.0, 0.1, 0.3, PhysParams(1e-6, 0.3, 0.5, 3.0), table)


# ---------------------------------------------------------------------------
# dyadic windows

PL = PhysParams(1e-3, 0.1, 0.8, 3.0)  # ladder 0.1, 0.2, 0.4


def test_partition_reconstruction(table):
    assert PL.ladder == [0.1, 0.2, 0.4]
    for t, x in [(0.3, 0.1), (1.2, 0.05), (2.0, 0.17)]:
        full = green_spectral(t, x, PL.a, PL, table)
        parts = green_base(t, x, PL.a, PL, table) + sum(
            green_dyadic(t, x, PL.a, g, PL, table) for g in PL.ladder)
        assert abs(parts - full) <= 1e-10 * abs(full)


def test_dyadic_rejects_off_ladder(table):
    with pytest.raises(ParameterError):
        green_dyadic(1.0, 0.1, 0.1, 0.3, PL, table)


def test_dyadic_low_modes_excluded(table):
    g = PL.a_natural
    u = table.omega[:400] * PL.h ** (2 / 3)
    w = dyadic_bump(u[u < g / 4] / g)
    assert np.all(np.abs(w) <= 1e-12)


def test_transverse_window_scaling(table):
    # gamma = 4a with a = 0.1 (a = 0.3 would put 4a above eps0 < 1)
    a, g = 0.1, 0.4
    consts = []
    for h in (1e-3, 5e-4):
        p = PhysParams(h, a, 0.8, 10.0)
        lam = g**1.5 / h
        T = np.linspace(1.0, lam ** (1 / 3), 300)
        xs = np.linspace(0, 2 * a, 400)
        G = green_on_grid(T * math.sqrt(g), xs, p, table, lambda u: dyadic_bump(u / g),
                          2 * g * h ** (-2 / 3))
        assert G[5, 77] == pytest.approx(green_dyadic(T[5] * math.sqrt(g), xs[77], a, g, p, table),
                                         rel=1e-10)
        consts.append(np.abs(G).max() * h ** (2 / 3))
    assert consts[1] / consts[0] == pytest.approx(1, abs=0.3)


# ---------------------------------------------------------------------------
# sup-norm scans

PS = PhysParams(1e-3, 0.3, 0.5, 4.0)


def test_resonant_peaks(table):
    for n in (1, 2, 3):
        ts = [(2 * n + d) * math.sqrt(0.3) for d in (-0.5, 0.0, 0.5)]
        lo, mid, hi = (s.sup_abs for s in sup_norm_scan(PS, ts, table))
        assert mid > lo and mid > hi


def test_resonant_versus_off_resonant(table):
    r = math.sqrt(0.3)
    at_a = [abs(green_spectral(T * r, 0.3, 0.3, PS, table)) for T in (2.0, 2.6)]
    assert at_a[0] >= 2 * at_a[1]
    s2 = sup_norm_scan(PS, [2 * r], table)[0]
    assert abs(s2.argmax_x - 0.3) < 0.01


def test_off_resonant_plateau(table):
    vals = []
    for h in (1e-3, 5e-4, 2.5e-4):
        p = PhysParams(h, 0.3, 0.5, 2.0)
        vals.append(sup_norm_scan(p, [2.7 * math.sqrt(0.3)], table)[0].sup_abs * h ** (2 / 3))
    assert max(vals) / min(vals) <= 2


def test_sup_refinement_not_below_grid(table):
    xs = default_x_grid(PS)
    t = 1.3
    coarse = np.abs(green_on_grid([t], xs, PS, table)[0]).max()
    s = sup_norm_scan(PS, [t], table, xs)[0]
    assert s.sup_abs >= coarse
    assert 0 <= s.argmax_x <= 0.6


def test_scan_validation(table):
    with pytest.raises(ParameterError):
        sup_norm_scan(PS, [], table)
    with pytest.raises(ParameterError):
        sup_norm_scan(PS, [1.0], table, np.linspace(0, 0.9, 10))


def test_scan_threads_deterministic(table):
    ts = [0.5, 1.0, 1.5]
    one = sup_norm_scan(PS, ts, table)
    many = sup_norm_scan(PS, ts, table, threads=3)
    assert one == many


# ---------------------------------------------------------------------------
# weighted Airy sums


def test_sobolev_single_term(table):
    b = np.linspace(-10, 10, 20001)
    r = sobolev_airy_bound(1, table)
    direct = table.omega[0] ** -0.5 * np.max(airy_ai(b - table.omega[0]) ** 2)
    assert r.sup_value == pytest.approx(direct, rel=1e-6)
    assert r.ratio == r.sup_value


def test_sobolev_decay_above_top_zero(table):
    b = table.omega[49] + 20.0
    r = sobolev_airy_bound(50, table, b_grid=np.array([b]))
    assert r.sup_value <= 1e-8


@pytest.mark.xfail(strict=True, reason="b - omega_k < 0 is the oscillatory side of Ai: no decay")
def test_sobolev_decay_far_below(table):
    r = sobolev_airy_bound(50, table, b_grid=np.array([-20.0]))
    assert r.sup_value <= 1e-8


def test_sobolev_coverage(table):
    with pytest.raises(CoverageError):
        sobolev_airy_bound(table.k_max + 1, table)
