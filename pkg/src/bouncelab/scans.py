"""Scan commands: configuration, evaluation, gates.

Each ``run_*`` function takes a validated config dict, a zero-table loader
and a thread count, and returns a ``ScanResult`` of CSV rows plus pass/fail
gates.  File output lives in :mod:`bouncelab.cli`.
"""

from __future__ import annotations

import copy
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from statistics import median
from typing import Callable

import numpy as np

from . import expsums as es
from .airy import AiryZeroTable, airy_ai, airy_phase, load_or_build
from .errors import ParameterError, PrecisionError
from .reflection import ReflectionConfig, green_reflection
from .spectral import PhysParams, green_dyadic, sup_norm_scan
from .strichartz import (
    fit_line,
    ledger_model,
    loss_exponent,
    relative_log_slope,
    resonance_ledger,
    sup_time_norm,
)


@dataclass
class Gate:
    name: str
    target: object
    measured: object
    tolerance: object
    passed: bool

    def as_json(self):
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


@dataclass
class ScanResult:
    header: list
    rows: list
    gates: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(g.passed for g in self.gates)


@dataclass(frozen=True)
class RegressionReport:
    fitted_exponent: float
    stderr: float
    points: list
    target_exponent: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return abs(self.fitted_exponent - self.target_exponent) <= self.tolerance

    @classmethod
    def fit(cls, hs, values, target, tol):
        x, y = np.log(hs), np.log(values)
        f = fit_line(x, y)
        return cls(f.slope, f.stderr, list(zip(x.tolist(), y.tolist())), target, tol)


# ---------------------------------------------------------------------------
# configuration

DEFAULTS = {
    "dispersion-scan": {
        "a": 0.3,
        "h_ladder": [1e-3, 5e-4, 2.5e-4],
        "eps0": 0.5,
        "t0": 5.0,
        "T_grid": [1.5, 2.0, 2.35, 2.7, 4.0],
        "resonant_T": 2.0,
        "off_resonant_T": 2.7,
        "resonant_target": 0.25,
        "off_resonant_target": 1.0 / 3.0,
        "tolerance": 0.05,
        "min_peak_ratio": 2.0,
        "x_uniform": 400,
        "x_cluster": 100,
        "refine_rounds": 2,
    },
    "parametrix-compare": {
        "a": 0.25,
        "lambda": 100.0,
        "eps0": 0.5,
        "gamma": None,
        "T_grid": [1.5, 2.0, 3.0],
        "X_grid": [1.0],
        "m_cut": 3.0,
        "node_scale": 8.0,
        "sp_order": 1,
        "b1": 0.0,
        "max_median_gap": 5e-2,
        "stability_tolerance": 1e-3,
        "check_stability": True,
    },
    "expsum-verify": {
        "lambda_ladder": [1e3, 1e4],
        "T_exponents": [0.4, 0.7, 1.3],
        "T_extra": [2.0],
        "r3_top": "29/12",
        "c_fit_max": 10.0,
        "seam_tolerance": 1e-12,
    },
    "strichartz-scan": {
        "a": 0.3,
        "h_ladder": [1e-3, 5e-4, 2.5e-4],
        "eps0": 0.5,
        "q": 4,
        "t_end": None,
        "n_uniform": 4000,
        "n_extra": 40,
        "loss_range": [1.0 / 6.0 - 0.03, 0.25 - 0.02],
        "ledger_points": 400,
        "ledger_slope_factor": 2.0,
    },
    "vdc-table": {
        "lambda": 1e4,
        "T_values": [1e2, 1e3, 3e3],
        "M_max": 1000,
        "trials": 8,
        "c_fit_max": 3.0,
        "hand_M": 1000,
        "hand_delta": 1e-3,
        "sharpness_M": 10000,
        "sharpness_range": [0.1, 3.0],
    },
    "build-cache": {
        "k_max": 5000,
        "check_k": 1000,
        "zero_tol": 1e-10,
        "phase_tol": 1e-8,
    },
}

COMMANDS = tuple(DEFAULTS)
REGRESSION_COMMANDS = ("dispersion-scan", "strichartz-scan")


def _ordered(name, seq, strict=True):
    if not isinstance(seq, (list, tuple)) or len(seq) == 0:
        raise ParameterError(f"{name}: must be a non-empty list")
    arr = np.asarray(seq, dtype=float)
    d = np.diff(arr)
    if strict and not (np.all(d > 0) or np.all(d < 0)):
        raise ParameterError(f"{name}: must be strictly ordered")


def make_config(command: str, overrides: dict | None = None) -> dict:
    """Defaults for ``command`` updated with ``overrides``, then validated."""
    if command not in DEFAULTS:
        raise ParameterError(f"unknown command {command!r}")
    cfg = copy.deepcopy(DEFAULTS[command])
    for k, v in (overrides or {}).items():
        if k not in cfg:
            raise ParameterError(f"{command}: unknown config field {k!r}")
        cfg[k] = v
    for k, v in cfg.items():
        if k.endswith(("_ladder", "_grid", "_values", "_exponents")):
            _ordered(k, v)
    if command in REGRESSION_COMMANDS:
        hs = cfg["h_ladder"]
        if len(hs) < 2 or max(hs) / min(hs) < 4 * (1 - 1e-12):
            raise ParameterError("h_ladder: regression needs at least two h spanning a factor 4")
    return cfg


# ---------------------------------------------------------------------------
# helpers


def classify_time(T, lam):
    """Dispersive regime of a scaled time."""
    if T < 1:
        return "pre-reflection"
    if T >= lam ** (1.0 / 3.0):
        return "beyond-horizon"
    n = max(round(T / 2), 1)
    return "resonant" if abs(T - 2 * n) < 1 / (4 * T * T) else "off-resonant"


def _table_for(loader, w_max):
    from .airy import zeros_needed

    return loader(zeros_needed(w_max))


# ---------------------------------------------------------------------------
# commands


def run_dispersion_scan(cfg, loader, threads=1) -> ScanResult:
    a, hs = cfg["a"], sorted(cfg["h_ladder"], reverse=True)
    Ts = sorted(set(cfg["T_grid"]) | {cfg["resonant_T"], cfg["off_resonant_T"]})
    header = ["h", "a", "lambda", "t", "T", "sup_abs_G", "argmax_x", "bound_quarter",
              "bound_sixth", "regime_label"]
    rows, res, off = [], [], []
    for h in hs:
        p = PhysParams(h, a, cfg["eps0"], cfg["t0"])
        table = _table_for(loader, p.omega_max)
        ts = [T * math.sqrt(a) for T in Ts]
        from .spectral import default_x_grid

        xg = default_x_grid(p, cfg["x_uniform"], cfg["x_cluster"])
        samples = sup_norm_scan(p, ts, table, xg, cfg["refine_rounds"], True, threads)
        lam = p.mode_scale
        for T, s in zip(Ts, samples):
            rows.append([h, a, lam, s.t, T, s.sup_abs, s.argmax_x,
                         (1 / h) * (h * a / s.t) ** 0.25, h ** (-2.0 / 3.0),
                         classify_time(T, lam)])
            if T == cfg["resonant_T"]:
                res.append(s.sup_abs)
            if T == cfg["off_resonant_T"]:
                off.append(s.sup_abs)
    hs_arr = np.array(hs)
    tol = cfg["tolerance"]
    r1 = RegressionReport.fit(hs_arr, np.array(res) * hs_arr, cfg["resonant_target"], tol)
    r2 = RegressionReport.fit(hs_arr, np.array(off) * hs_arr, cfg["off_resonant_target"], tol)
    ratios = [x / y for x, y in zip(res, off)]
    gates = [
        Gate("resonant_h_exponent", r1.target_exponent, r1.fitted_exponent, tol, r1.passed),
        Gate("off_resonant_h_exponent", r2.target_exponent, r2.fitted_exponent, tol, r2.passed),
        Gate("min_peak_ratio", cfg["min_peak_ratio"], min(ratios), None,
             min(ratios) >= cfg["min_peak_ratio"]),
    ]
    return ScanResult(header, rows, gates, {"regressions": [asdict(r1), asdict(r2)],
                                            "peak_ratios": ratios})


def run_parametrix_compare(cfg, loader, threads=1) -> ScanResult:
    a, lam = cfg["a"], cfg["lambda"]
    h = a**1.5 / lam
    gamma = a if cfg["gamma"] is None else cfg["gamma"]
    p = PhysParams(h, a, cfg["eps0"], t0=4 * max(cfg["T_grid"]) * math.sqrt(gamma))
    lam_g = gamma**1.5 / h
    if lam_g < 10:
        raise ParameterError(f"gamma={gamma}: gamma^(3/2)/h = {lam_g:.4g} < 10, "
                             "the reflection sum needs at least 10")
    rc = ReflectionConfig(cfg["m_cut"], cfg["node_scale"], sp_order=cfg["sp_order"], b1=cfg["b1"])
    table = _table_for(loader, 2 * gamma * h ** (-2.0 / 3.0))
    header = ["T", "t", "x", "re_dyadic", "im_dyadic", "re_reflection", "im_reflection",
              "rel_gap", "window_shift", "node_shift"]
    rows, gaps, shifts = [], [], []
    for T in cfg["T_grid"]:
        t = T * math.sqrt(gamma)
        for X in cfg["X_grid"]:
            x = X * a
            ref = green_dyadic(t, x, a, gamma, p, table)
            g = green_reflection(t, x, a, gamma, p, rc, threads)
            gap = abs(g - ref) / abs(ref)
            ws = ns = math.nan
            if cfg["check_stability"]:
                g2 = green_reflection(t, x, a, gamma, p,
                                      ReflectionConfig(2 * rc.m_cut, rc.node_scale,
                                                       sp_order=rc.sp_order, b1=rc.b1), threads)
                g3 = green_reflection(t, x, a, gamma, p,
                                      ReflectionConfig(rc.m_cut, 2 * rc.node_scale,
                                                       sp_order=rc.sp_order, b1=rc.b1), threads)
                ws, ns = abs(g2 - g) / abs(g), abs(g3 - g) / abs(g)
                shifts.append(max(ws, ns))
            gaps.append(gap)
            rows.append([T, t, x, ref.real, ref.imag, g.real, g.imag, gap, ws, ns])
    gates = [Gate("median_relative_gap", cfg["max_median_gap"], median(gaps), None,
                  median(gaps) <= cfg["max_median_gap"])]
    if shifts:
        gates.append(Gate("max_stability_shift", cfg["stability_tolerance"], max(shifts), None,
                          max(shifts) <= cfg["stability_tolerance"]))
    return ScanResult(header, rows, gates)


def _formula(regime, T, lam):
    pl, pt = es.REGIME_EXPONENTS[regime]
    return lam ** float(pl) * T ** float(pt)


def _short_time_bound(T, lam):
    if classify_time(T, lam) == "resonant":
        return (lam ** (1.0 / 3.0) / T) ** 0.25
    return 1.0


def run_expsum_verify(cfg, loader, threads=1) -> ScanResult:
    r3 = Fraction(cfg["r3_top"])
    lams = cfg["lambda_ladder"]
    if max(lams) > 1e5:
        raise ParameterError("lambda_ladder: lambda <= 1e5 required")
    table = loader(es.mode_range(max(lams))[1])
    header = ["lambda", "T", "regime", "abs_sum", "regime_bound_value", "ratio",
              "short_time_bound", "seam_gap"]
    rows, worst, seams = [], {}, []
    for lam in lams:
        Ts = [lam**x for x in cfg["T_exponents"]] + list(cfg["T_extra"])
        for T in Ts:
            try:
                e = abs(es.e_lambda(T, 1.0, lam, table))
            except PrecisionError as exc:
                raise PrecisionError(f"cell lambda={lam!r}, T={T!r}: {exc}") from exc
            if T < lam ** (1.0 / 3.0):
                stb = _short_time_bound(T, lam)
                rows.append([lam, T, "below-horizon", e, math.nan, e / stb, stb, math.nan])
                continue
            rb = es.regime_bound(T, lam, r3)
            ratio = e / rb.bound_value
            worst[rb.regime] = max(worst.get(rb.regime, 0.0), ratio)
            rows.append([lam, T, rb.regime, e, rb.bound_value, ratio, math.nan, math.nan])
        for x, (left, right, gap) in es.seam_gaps(lam, r3).items():
            T = lam ** float(x)
            required = x != r3 or r3 == 3
            rows.append([lam, T, f"seam:{left}|{right}", math.nan,
                         _formula(left, T, lam), math.nan,
                         math.nan, gap])
            if required:
                seams.append(gap)
    gates = [Gate(f"c_fit_{k}", cfg["c_fit_max"], v, None, v <= cfg["c_fit_max"])
             for k, v in sorted(worst.items())]
    gates.append(Gate("seam_continuity", 0.0, max(seams), cfg["seam_tolerance"],
                      max(seams) <= cfg["seam_tolerance"]))
    wc = es.worst_case_loss(r3)
    gates.append(Gate("worst_case_loss", "1/6+5/114", str(wc), 0,
                      wc == Fraction(1, 6) + Fraction(5, 114)))
    return ScanResult(header, rows, gates, {"c_fit": worst})


def run_strichartz_scan(cfg, loader, threads=1) -> ScanResult:
    a, hs = cfg["a"], sorted(cfg["h_ladder"], reverse=True)
    q = cfg["q"]
    if q not in (2, 4):
        raise ParameterError("q must be 2 (ledger mode) or 4")
    horizon = min(a / h ** (1.0 / 3.0) for h in hs)
    t_end = horizon if cfg["t_end"] is None else min(cfg["t_end"], horizon)
    if t_end <= 1.2 * math.sqrt(a):
        raise ParameterError(f"time window [1.2 sqrt(a), {t_end:.4g}] is empty; increase a")
    header = ["h", "lambda", "q", "norm", "resonant_share", "ledger", "ledger_model"]
    rows, norms, ledgers, models = [], [], [], []
    for h in hs:
        lam = a**1.5 / h
        if q == 4:
            p = PhysParams(h, a, cfg["eps0"], t_end)
            table = _table_for(loader, p.omega_max)
            tn = sup_time_norm(p, table, t_end, q / 2, cfg["n_uniform"], cfg["n_extra"])
            norms.append(tn.norm)
            rows.append([h, lam, q, tn.norm, tn.resonant_share, math.nan, math.nan])
        else:
            top = 2 * math.ceil(lam ** (1.0 / 3.0)) + 1
            p = PhysParams(h, a, cfg["eps0"], top * math.sqrt(a))
            table = _table_for(loader, 2 * a * h ** (-2.0 / 3.0))
            s = resonance_ledger(p, table, cfg["ledger_points"])
            m = ledger_model(a, h)
            ledgers.append(s)
            models.append(m)
            rows.append([h, lam, q, math.nan, math.nan, s, m])
    gates = []
    if q == 4:
        lo, hi = cfg["loss_range"]
        fit = loss_exponent(hs, norms)
        gates.append(Gate("loss_exponent", [lo, hi], fit.slope, fit.stderr, lo <= fit.slope <= hi))
        extra = {"loss_fit": asdict(fit), "t_window": [1.2 * math.sqrt(a), t_end]}
    else:
        ms = relative_log_slope(hs, ledgers)
        mm = relative_log_slope(hs, models)
        k = cfg["ledger_slope_factor"]
        gates.append(Gate("ledger_relative_slope", [0.0, k * mm], ms, None, 0 < ms < k * mm))
        extra = {"model_relative_slope": mm}
    return ScanResult(header, rows, gates, extra)


def run_vdc_table(cfg, loader, threads=1) -> ScanResult:
    lam, M = cfg["lambda"], cfg["M_max"]
    header = ["variant", "j", "T", "delta", "M", "abs_sum", "bound", "ratio"]
    rows, worst = [], {}
    suites = [(2, "vdc2"), (3, "vdc3_sargos"), (3, "vdc_j_generic"), (4, "vdc4"),
              (4, "vdc_j_generic")]
    for T in cfg["T_values"]:
        for j, var in suites:
            fam = es.PhaseFamily.airy_branch(T, lam, 0, j)
            delta = es.DerivativeEnvelope.build(T, lam, j, 1, M).delta
            for r in es.vdc_empirical_check(fam, 1, M, j, cfg["trials"], var, delta):
                rows.append([var, j, T, delta, r.M, r.abs_sum, r.bound, r.ratio])
                worst[var] = max(worst.get(var, 0.0), r.ratio)
    # calculator rows at the hand cell, plus the vdc2 optimum at delta = 1/M
    hm, hd = cfg["hand_M"], cfg["hand_delta"]
    hand = {
        "vdc2": hm * hd**0.5 + hd**-0.5,
        "vdc3_sargos": hm * hd ** (1 / 6) + hd ** (-1 / 3),
        "vdc4": hm * hd ** (1 / 14) + hm**0.75 * hd ** (-1 / 14),
    }
    calc_ok = True
    for var, j in (("vdc2", 2), ("vdc3_sargos", 3), ("vdc4", 4)):
        b = es.vdc_bound(j, hm, hd, 1.0, var)
        calc_ok &= math.isclose(b, hand[var], rel_tol=1e-12)
        rows.append([var, j, math.nan, hd, hm, math.nan, b, math.nan])
    opt = es.vdc_bound(2, hm, 1 / hm, 1.0, "vdc2")
    calc_ok &= math.isclose(opt, 2 * math.sqrt(hm), rel_tol=1e-12)
    rows.append(["vdc2_optimal_delta", 2, math.nan, 1 / hm, hm, math.nan, opt, math.nan])
    # model phase c l^(3/2) whose stationary points add coherently
    sm = cfg["sharpness_M"]
    fam = es.PhaseFamily.power(4 * math.pi / (3 * math.sqrt(3)), 1.5)
    d3 = float(abs(fam.deriv(sm)))
    sharp = es.vdc_empirical_check(fam, 1, sm, 3, 2, "vdc3_sargos", d3)[-1]
    rows.append(["vdc3_sargos_sharpness", 3, math.nan, d3, sm, sharp.abs_sum, sharp.bound,
                 sharp.ratio])
    lo, hi = cfg["sharpness_range"]
    gates = [Gate("calculator_hand_values", "exact", calc_ok, 1e-12, calc_ok)]
    gates += [Gate(f"c_fit_{k}", cfg["c_fit_max"], v, None, v <= cfg["c_fit_max"])
              for k, v in sorted(worst.items())]
    gates.append(Gate("sharpness_ratio", [lo, hi], sharp.ratio, None, lo <= sharp.ratio <= hi))
    return ScanResult(header, rows, gates, {"c_fit": worst})


def run_build_cache(cfg, loader, threads=1) -> ScanResult:
    table: AiryZeroTable = loader(cfg["k_max"])
    n = min(cfg["check_k"], table.k_max)
    w = table.omega[:n]
    zero_err = float(np.max(np.abs(airy_ai(-w))))
    phase_err = float(np.max(np.abs(airy_phase(w) - 2 * np.pi * table.k[:n])))
    header = ["k", "omega_k", "phase_slope"]
    rows = [[int(k), float(x), float(s)] for k, x, s in zip(table.k, table.omega, table.phase_slope)]
    gates = [
        Gate("zero_residual", 0.0, zero_err, cfg["zero_tol"], zero_err <= cfg["zero_tol"]),
        Gate("phase_residual", 0.0, phase_err, cfg["phase_tol"], phase_err <= cfg["phase_tol"]),
        Gate("strictly_increasing", True, bool(np.all(np.diff(table.omega) > 0)), None,
             bool(np.all(np.diff(table.omega) > 0))),
    ]
    return ScanResult(header, rows, gates)


RUNNERS: dict[str, Callable] = {
    "dispersion-scan": run_dispersion_scan,
    "parametrix-compare": run_parametrix_compare,
    "expsum-verify": run_expsum_verify,
    "strichartz-scan": run_strichartz_scan,
    "vdc-table": run_vdc_table,
    "build-cache": run_build_cache,
}


def table_loader(cache=None):
    """Zero-table loader that builds once and then slices."""
    state = {}

    def load(k_max):
        have = state.get("table")
        if have is None or have.k_max < k_max:
            state["table"] = load_or_build(max(k_max, 1), cache)
            have = state["table"]
        return AiryZeroTable(have.omega[:k_max], have.phase_slope[:k_max])

    return load
