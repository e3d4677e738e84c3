"""Sampling audit of the structural assumptions on the constitutive model.

Checked properties (numbered as the solver relies on them):

    A1  material and boundary constants positive (A_lambda may have any sign)
    A2  delta_w, delta_theta in [delta_min, delta_max], lam in [lambda_min,
        lambda_max], with finite numerical partial derivatives
    A3  0 <= d_eq <= d_eq_scale, d_eq nondecreasing, |d_eq'| <= d_eq_slope_bound
    A4  P * w >= 0 for all w (negative w included), P(theta, 0) = 0 and P
        Lipschitz with constant below ``P_LIPSCHITZ_BOUND``
    A5  boundary forcing vartheta positive and finite on [0, t_end]
    A6  initial temperature and water content positive

Samples are uniform in the admissible box plus a deterministic grid with
integer water contents, so isolated defects at round numbers are hit too.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..fire import BoundaryParams, ISO834, Hydrocarbon, Parametric, thermal_load
from ..materials import (DEFAULT_PARAMS, MaterialParams, dehydration_equilibrium,
                         sorption_pressure, transformed_coefficients)

DEFAULT_BOX = ((273.15, 1473.15), (0.0, 150.0))
# documented global Lipschitz bound of P(theta, w) on the default box,
# Pa per K and Pa per kg/m^3 (the audit measures about 1.2e8)
P_LIPSCHITZ_BOUND = 5e8


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    witness: dict | None = None

    def as_dict(self):
        return dataclasses.asdict(self)


@dataclass
class AuditReport:
    checks: list = field(default_factory=list)
    n_samples: int = 0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def by_name(self, name) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self):
        return {"passed": self.passed, "n_samples": self.n_samples,
                "checks": [c.as_dict() for c in self.checks]}


def _witness(mask, **arrays):
    i = int(np.flatnonzero(mask)[0])
    return {k: float(np.ravel(v)[i]) for k, v in arrays.items()}


def _sample_points(box, n_samples, rng):
    (t0, t1), (w0, w1) = box
    th = rng.uniform(t0, t1, n_samples)
    w = rng.uniform(w0, w1, n_samples)
    grid_t = np.linspace(t0, t1, 25)
    grid_w = np.arange(np.ceil(w0), np.floor(w1) + 1.0)
    gt, gw = np.meshgrid(grid_t, grid_w)
    return np.concatenate([th, gt.ravel()]), np.concatenate([w, gw.ravel()])


def assumption_audit(mp: MaterialParams = DEFAULT_PARAMS, box=DEFAULT_BOX, n_samples: int = 10_000,
                     sorption: Callable | None = None, d_eq: Callable | None = None,
                     coefficients: Callable | None = None,
                     bp: BoundaryParams | None = None, scenarios=None, t_end: float = 7200.0,
                     theta0=293.15, w0=71.01, seed: int = 0) -> AuditReport:
    """Run all checks; any callable argument overrides the built-in model.

    ``sorption(theta, w)`` returns P, ``d_eq(theta)`` the equilibrium
    dehydration and ``coefficients(theta, w)`` a TransformedCoefficients-like
    object.  ``scenarios`` is a list of (FireScenario, BoundaryParams).
    """
    if n_samples < 10_000:
        raise ValueError("the audit needs at least 1e4 samples")
    rng = np.random.default_rng(seed)
    sorption = sorption or (lambda th, w: sorption_pressure(th, w, mp))
    d_eq = d_eq or (lambda th: dehydration_equilibrium(th, mp))
    coefficients = coefficients or (lambda th, w: transformed_coefficients(th, w, mp))
    if scenarios is None:
        scenarios = [(sc, bp or BoundaryParams.for_scenario(sc))
                     for sc in (ISO834(), Hydrocarbon(), Parametric())]
    th, w = _sample_points(box, n_samples, rng)
    report = AuditReport(n_samples=th.size)
    checks = report.checks

    # A1 ------------------------------------------------------------------
    bad = [f.name for f in dataclasses.fields(mp)
           if f.name != "A_lambda" and not getattr(mp, f.name) > 0]
    for _, b in scenarios:
        bad += [f"boundary.{f.name}" for f in dataclasses.fields(b) if not getattr(b, f.name) > 0]
    checks.append(CheckResult("A1_positive_constants", not bad,
                              "all constants positive" if not bad else f"non-positive: {bad}",
                              {"fields": bad} if bad else None))

    # A2 ------------------------------------------------------------------
    c = coefficients(th, w)
    for name, lo, hi in (("delta_w", mp.delta_min, mp.delta_max),
                         ("delta_theta", mp.delta_min, mp.delta_max),
                         ("lam", mp.lambda_min, mp.lambda_max)):
        v = np.asarray(getattr(c, name), dtype=float)
        bad = ~np.isfinite(v) | (v < lo) | (v > hi)
        checks.append(CheckResult(
            f"A2_{name}_bounds", not bad.any(),
            f"range [{np.nanmin(v):.3e}, {np.nanmax(v):.3e}] within [{lo:.3e}, {hi:.3e}]",
            _witness(bad, theta=th, w=w, value=v) if bad.any() else None))
    step_t, step_w = 1e-3, 1e-3
    cp_t = coefficients(th + step_t, w)
    cm_t = coefficients(th - step_t, w)
    cp_w = coefficients(th, w + step_w)
    cm_w = coefficients(th, w - step_w)
    sups = {}
    ok = True
    witness = None
    for name in ("delta_w", "delta_theta", "lam"):
        dt_ = (np.asarray(getattr(cp_t, name)) - np.asarray(getattr(cm_t, name))) / (2 * step_t)
        dw_ = (np.asarray(getattr(cp_w, name)) - np.asarray(getattr(cm_w, name))) / (2 * step_w)
        bad = ~np.isfinite(dt_) | ~np.isfinite(dw_)
        sups[name] = (float(np.nanmax(np.abs(dt_))), float(np.nanmax(np.abs(dw_))))
        if bad.any() and witness is None:
            ok = False
            witness = _witness(bad, theta=th, w=w)
    checks.append(CheckResult("A2_partials_finite", ok,
                              "sup |d/dtheta|, |d/dw|: " + ", ".join(
                                  f"{k}=({a:.3e}, {b:.3e})" for k, (a, b) in sups.items()),
                              witness))

    # A3 ------------------------------------------------------------------
    tg = np.linspace(box[0][0], box[0][1], max(n_samples, 10_000))
    dv = np.asarray(d_eq(tg), dtype=float)
    bad = ~np.isfinite(dv) | (dv < 0) | (dv > mp.d_eq_scale)
    checks.append(CheckResult("A3_d_eq_bounds", not bad.any(),
                              f"range [{dv.min():.4g}, {dv.max():.4g}] within [0, {mp.d_eq_scale}]",
                              _witness(bad, theta=tg, value=dv) if bad.any() else None))
    slope = np.diff(dv) / np.diff(tg)
    tol = 1e-9 * mp.d_eq_scale
    bad = (slope < -tol) | (np.abs(slope) > mp.d_eq_slope_bound * (1 + 1e-9))
    checks.append(CheckResult("A3_d_eq_slope", not bad.any(),
                              f"slope in [{slope.min():.4g}, {slope.max():.4g}], "
                              f"bound {mp.d_eq_slope_bound:.4g}",
                              _witness(bad, theta=tg[:-1], slope=slope) if bad.any() else None))

    # A4 ------------------------------------------------------------------
    w_signed = np.concatenate([w, -w])
    th_signed = np.concatenate([th, th])
    p = np.asarray(sorption(th_signed, w_signed), dtype=float)
    bad = ~np.isfinite(p) | (p * w_signed < 0)
    checks.append(CheckResult("A4_sign_condition", not bad.any(),
                              "P*w >= 0 at all samples, negative w included",
                              _witness(bad, theta=th_signed, w=w_signed, P=p) if bad.any() else None))
    p0 = np.asarray(sorption(th, np.zeros_like(th)), dtype=float)
    bad = p0 != 0
    checks.append(CheckResult("A4_zero_at_dry", not bad.any(), "P(theta, 0) = 0",
                              _witness(bad, theta=th, P=p0) if bad.any() else None))
    # difference quotients on short random segments
    d_th = rng.uniform(-1.0, 1.0, th.size)
    d_w = rng.uniform(-1.0, 1.0, th.size)
    th2 = np.clip(th + d_th, box[0][0], box[0][1])
    w2 = w + d_w
    p1 = np.asarray(sorption(th, w), dtype=float)
    p2 = np.asarray(sorption(th2, w2), dtype=float)
    dist = np.abs(th2 - th) + np.abs(w2 - w)
    quot = np.abs(p2 - p1) / np.where(dist > 0, dist, np.inf)
    lip = float(np.nanmax(quot)) if np.all(np.isfinite(quot)) else float("inf")
    bad = ~np.isfinite(quot) | (quot > P_LIPSCHITZ_BOUND)
    checks.append(CheckResult("A4_lipschitz", not bad.any(),
                              f"empirical Lipschitz constant {lip:.4g} (bound {P_LIPSCHITZ_BOUND:.1e})",
                              _witness(bad, theta=th, w=w, quotient=quot) if bad.any() else None))

    # A5 ------------------------------------------------------------------
    ts = np.linspace(0.0, t_end, 4001)
    ok, witness, lines = True, None, []
    for sc, b in scenarios:
        load = np.asarray(thermal_load(sc, b, ts), dtype=float)
        jump = np.max(np.abs(np.diff(load))) if load.size > 1 else 0.0
        lines.append(f"{sc.kind}: min {load.min():.4g}, max step change {jump:.4g}")
        bad = ~np.isfinite(load) | (load <= 0)
        if bad.any() and witness is None:
            ok = False
            witness = dict(_witness(bad, t=ts, load=load), scenario=sc.kind)
    checks.append(CheckResult("A5_thermal_load_positive", ok, "; ".join(lines), witness))

    # A6 ------------------------------------------------------------------
    init_t = np.atleast_1d(np.asarray(theta0, dtype=float))
    init_w = np.atleast_1d(np.asarray(w0, dtype=float))
    ok = bool(np.all(init_t > 0) and np.all(init_w > 0)
              and np.all(np.isfinite(init_t)) and np.all(np.isfinite(init_w)))
    checks.append(CheckResult("A6_initial_positive", ok,
                              f"theta0 min {init_t.min():.4g}, w0 min {init_w.min():.4g}",
                              None if ok else {"theta0_min": float(init_t.min()),
                                               "w0_min": float(init_w.min())}))
    return report


def sabotaged_isotherm(mp: MaterialParams = DEFAULT_PARAMS, at_w: float = 1.0, value: float = -1.0):
    """Built-in isotherm except ``value`` returned where w == at_w."""

    def p(theta, w):
        base = sorption_pressure(theta, w, mp)
        return np.where(np.asarray(w) == at_w, value, base)

    return p


__all__ = ["assumption_audit", "AuditReport", "CheckResult", "sabotaged_isotherm",
           "DEFAULT_BOX", "P_LIPSCHITZ_BOUND"]
