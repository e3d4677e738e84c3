"""Manufactured-solution convergence studies.

The targets are

    theta*(x, t) = theta_0 + A_theta cos(pi x / ell) exp(-r t)
    w*(x, t)     = w_0     + A_w     cos(pi x / ell) exp(-r t)

Both have zero slope at x = 0 and x = ell, so the insulated face needs no
correction and the exposed face only needs the Robin data cancelled.  The
sources follow from inserting the targets into

    w_t - d_t = q_x,                       q = delta_w w_x + delta_theta theta_x
    c theta_t + (C_w theta + h_d) d_t = (lam theta_x)_x + C_w q theta_x

With ``theta_0 + |A_theta| < 378.15`` K no dehydration occurs (d = 0).

Frozen (constant) coefficients give, with k = pi/ell and E = exp(-r t),

    S_w     = -r A_w cos E + k^2 (delta_w A_w + delta_theta A_theta) cos E
    S_theta = -c(w*) r A_theta cos E + lam k^2 A_theta cos E - C_w q* theta*_x
    q*      = -k (delta_w A_w + delta_theta A_theta) sin E

For the full constitutive coefficients the fluxes q* and lam theta*_x are
evaluated pointwise and differentiated by central differences in x.

Exposed-face corrections: the exact outward fluxes vanish, so
g_w = beta_c (P(theta*, w*) - P_inf) and
g_theta = (alpha_c + e sigma theta*^3) theta* - vartheta(t).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..fire import ConstantAmbient, thermal_load
from ..materials import DEFAULT_PARAMS, MaterialParams, sorption_pressure, transformed_coefficients
from ..solver import (Forcing, FrozenCoefficients, Mesh1D, Problem, SolverOptions, SystemState,
                      simulate)

FD_REL_STEP = 1e-5


@dataclass(frozen=True)
class MmsCase:
    """Cosine-in-space, exponential-in-time manufactured targets."""

    ell: float = 0.12
    theta_0: float = 293.15
    w_0: float = 71.01
    a_theta: float = 10.0
    a_w: float = 5.0
    rate: float = 1.0

    @property
    def k(self) -> float:
        return math.pi / self.ell

    def _shape(self, x, t):
        return np.cos(self.k * x) * np.exp(-self.rate * t)

    def _slope(self, x, t):
        return -self.k * np.sin(self.k * x) * np.exp(-self.rate * t)

    def theta(self, x, t):
        return self.theta_0 + self.a_theta * self._shape(x, t)

    def w(self, x, t):
        return self.w_0 + self.a_w * self._shape(x, t)

    def theta_x(self, x, t):
        return self.a_theta * self._slope(x, t)

    def w_x(self, x, t):
        return self.a_w * self._slope(x, t)

    def theta_t(self, x, t):
        return -self.rate * self.a_theta * self._shape(x, t)

    def w_t(self, x, t):
        return -self.rate * self.a_w * self._shape(x, t)

    # -- sources ------------------------------------------------------------

    def frozen_sources(self, frozen: FrozenCoefficients, mp: MaterialParams):
        k2 = self.k**2

        def s_w(x, t):
            lap = -k2 * self._shape(x, t)
            return self.w_t(x, t) - frozen.delta_w * self.a_w * lap - frozen.delta_theta * self.a_theta * lap

        def s_theta(x, t):
            cap = mp.C_w * self.w(x, t) + mp.rho_S * mp.C_S
            q = frozen.delta_w * self.w_x(x, t) + frozen.delta_theta * self.theta_x(x, t)
            lap = -k2 * self.a_theta * self._shape(x, t)
            return cap * self.theta_t(x, t) - frozen.lam * lap - mp.C_w * q * self.theta_x(x, t)

        return s_w, s_theta

    def _fluxes(self, x, t, mp):
        c = transformed_coefficients(self.theta(x, t), self.w(x, t), mp)
        q = c.delta_w * self.w_x(x, t) + c.delta_theta * self.theta_x(x, t)
        return q, c.lam * self.theta_x(x, t)

    def nonlinear_sources(self, mp: MaterialParams):
        step = FD_REL_STEP * self.ell

        def derivs(x, t):
            qp, fp = self._fluxes(x + step, t, mp)
            qm, fm = self._fluxes(x - step, t, mp)
            return (qp - qm) / (2 * step), (fp - fm) / (2 * step)

        def s_w(x, t):
            q_x, _ = derivs(x, t)
            return self.w_t(x, t) - q_x

        def s_theta(x, t):
            _, heat_xx = derivs(x, t)
            q, _ = self._fluxes(x, t, mp)
            cap = mp.C_w * self.w(x, t) + mp.rho_S * mp.C_S
            return cap * self.theta_t(x, t) - heat_xx - mp.C_w * q * self.theta_x(x, t)

        return s_w, s_theta

    def forcing(self, problem: Problem, frozen: FrozenCoefficients | None) -> Forcing:
        mp, bp, sc = problem.mp, problem.bp, problem.scenario
        if frozen is None:
            s_w, s_theta = self.nonlinear_sources(mp)
        else:
            s_w, s_theta = self.frozen_sources(frozen, mp)
        ell = self.ell

        def g_w(t):
            return bp.beta_c * (sorption_pressure(self.theta(ell, t), self.w(ell, t), mp) - bp.P_inf)

        def g_theta(t):
            th = self.theta(ell, t)
            return (bp.alpha_c + bp.e * bp.sigma * abs(th) ** 3) * th - thermal_load(sc, bp, t)

        return Forcing(s_w, s_theta, g_w, g_theta)


@dataclass
class ConvergenceReport:
    """Errors per refinement level and the fitted orders."""

    kind: str
    levels: list
    errors_theta: list
    errors_w: list
    order_theta: float
    order_w: float
    monotone: bool
    notes: list = field(default_factory=list)

    @property
    def order(self) -> float:
        return min(self.order_theta, self.order_w)

    def as_dict(self) -> dict:
        return {"kind": self.kind, "levels": self.levels, "errors_theta": self.errors_theta,
                "errors_w": self.errors_w, "order_theta": self.order_theta,
                "order_w": self.order_w, "order": self.order, "monotone": self.monotone,
                "notes": self.notes}


def fitted_order(sizes, errors) -> float:
    """Least-squares slope of log(error) against log(size)."""
    return float(np.polyfit(np.log(sizes), np.log(errors), 1)[0])


def run_case(case: MmsCase, n_elements: int, dt: float, t_end: float,
             frozen: FrozenCoefficients | None, advection: str,
             mp: MaterialParams = DEFAULT_PARAMS):
    """Solve one level; returns discrete L2 errors (theta, w) at t_end."""
    mesh = Mesh1D(case.ell, n_elements)
    problem = Problem(mesh=mesh, scenario=ConstantAmbient(), mp=mp, dt=dt,
                      options=SolverOptions(advection=advection, frozen=frozen))
    problem.forcing = case.forcing(problem, frozen)
    x = mesh.x
    state = SystemState(0.0, case.theta(x, 0.0), case.w(x, 0.0), np.zeros_like(x))
    series = simulate(problem, state, t_end, snapshot_times=(t_end,))
    snap = series.snapshots[-1]
    m = mesh.lumped_mass
    e_theta = math.sqrt(m @ (snap.theta - case.theta(x, t_end)) ** 2 / case.ell)
    e_w = math.sqrt(m @ (snap.w - case.w(x, t_end)) ** 2 / case.ell)
    return e_theta, e_w


# Constant coefficients large enough that diffusion shapes the error
# within a fraction of a second, so tiny time steps stay affordable.
SPATIAL_FROZEN = FrozenCoefficients(delta_w=0.1, delta_theta=1e-3, lam=2.3e5)


def spatial_convergence(case: MmsCase = MmsCase(), levels=(8, 16, 32), dt: float = 5e-5,
                        t_end: float = 0.1, frozen: FrozenCoefficients = SPATIAL_FROZEN,
                        mp: MaterialParams = DEFAULT_PARAMS) -> ConvergenceReport:
    """Observed order in h with frozen coefficients and centered advection."""
    errs = [run_case(case, n, dt, t_end, frozen, "centered", mp) for n in levels]
    return _report("space", [case.ell / n for n in levels], list(levels), errs)


def temporal_convergence(case: MmsCase = MmsCase(), steps=(0.1, 0.05, 0.025), n_elements: int = 64,
                         t_end: float = 1.0, advection: str = "upwind",
                         mp: MaterialParams = DEFAULT_PARAMS) -> ConvergenceReport:
    """Observed order in dt with the full constitutive coefficients."""
    errs = [run_case(case, n_elements, dt, t_end, None, advection, mp) for dt in steps]
    return _report("time", list(steps), list(steps), errs)


def _report(kind, sizes, levels, errs):
    e_t = [e[0] for e in errs]
    e_w = [e[1] for e in errs]
    notes = []
    monotone = all(a > b for a, b in zip(e_t, e_t[1:])) and all(a > b for a, b in zip(e_w, e_w[1:]))
    if not monotone:
        notes.append("error does not decrease monotonically under refinement")
    if min(e_t + e_w) <= 0:
        notes.append("zero error on some level; order undefined")
        return ConvergenceReport(kind, levels, e_t, e_w, float("nan"), float("nan"), monotone, notes)
    return ConvergenceReport(kind, levels, e_t, e_w, fitted_order(sizes, e_t),
                             fitted_order(sizes, e_w), monotone, notes)


def mms_convergence(case: MmsCase = MmsCase()) -> dict:
    """Both studies with their default settings."""
    return {"space": spatial_convergence(case), "time": temporal_convergence(case)}


__all__ = ["MmsCase", "ConvergenceReport", "spatial_convergence", "temporal_convergence",
           "mms_convergence", "run_case", "fitted_order", "SPATIAL_FROZEN"]
