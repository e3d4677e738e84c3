"""Space-time integral identity satisfied by weak solutions.

For test functions phi, psi vanishing at the final time T the pair (theta, w)
with d from the relaxation law must satisfy

    moisture:  int int [-(w - d) phi_t + q phi_x]
               + int beta_c (P - P_inf) phi(ell, t) dt
               - int (w_0 - d_0) phi(x, 0) dx                          = 0

    energy:    int int [-(c theta + h_d d) psi_t + lam theta_x psi_x
                        + C_w q theta psi_x]
               + int [(alpha_c + e sigma |theta|^3) theta - vartheta] psi(ell, t) dt
               + int C_w theta beta_c (P - P_inf) psi(ell, t) dt
               - int (c_0 theta_0 + h_d d_0) psi(x, 0) dx               = 0

with q = delta_w w_x + delta_theta theta_x and c = C_w w + rho_S C_S.  The
discrete solution is inserted and taken piecewise linear in time between
levels.  Space integrals use the trapezoidal rule (gradients are element-wise
constant, so the flux groups use the element midpoints); each time step is
integrated with Simpson's rule, which keeps the quadrature error of the
smooth test functions far below the discretisation error.  Initial data
enter with d_0 = 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import DomainError
from ..fire import thermal_load
from ..materials import sorption_pressure, transformed_coefficients

MOISTURE_GROUPS = ("storage_w", "flux_w", "boundary_w", "initial_w")
ENERGY_GROUPS = ("storage_theta", "conduction", "convection", "boundary_radiative",
                 "boundary_convective", "initial_theta")


@dataclass
class TestFunction:
    """A scalar test function with its partial derivatives.

    ``value``, ``dx`` and ``dt`` are callables of (x, t) accepting arrays.
    """

    name: str
    value: Callable
    dx: Callable
    dt: Callable


@dataclass
class TestPair:
    """A (phi, psi) pair; either component may be None (meaning zero)."""

    name: str
    phi: TestFunction | None = None
    psi: TestFunction | None = None


@dataclass
class ResidualEntry:
    name: str
    residual: float
    scale: float
    groups: dict = field(default_factory=dict)

    @property
    def relative(self) -> float:
        return self.residual / self.scale if self.scale > 0 else self.residual


def _space_factor(k, ell):
    if k == 0:
        return (lambda x: np.ones_like(x), lambda x: np.zeros_like(x))
    a = k * np.pi / ell
    return (lambda x: np.cos(a * x), lambda x: -a * np.sin(a * x))


def _time_factor(kind, t_end):
    if kind == "linear":
        return (lambda t: 1.0 - t / t_end, lambda t: -np.ones_like(t) / t_end)
    b = np.pi / (2.0 * t_end)
    return (lambda t: np.cos(b * t) ** 2, lambda t: -2.0 * b * np.cos(b * t) * np.sin(b * t))


def product_function(k: int, kind: str, ell: float, t_end: float) -> TestFunction:
    """cos(k pi x / ell) times (1 - t/T) or cos^2(pi t / 2T)."""
    fx, dfx = _space_factor(k, ell)
    gt, dgt = _time_factor(kind, t_end)
    return TestFunction(
        name=f"cos{k}x*{kind}",
        value=lambda x, t: fx(x) * gt(t),
        dx=lambda x, t: dfx(x) * gt(t),
        dt=lambda x, t: fx(x) * dgt(t),
    )


def default_catalog(ell: float, t_end: float) -> list[TestPair]:
    """Every product function used once as phi and once as psi."""
    pairs = []
    for kind in ("linear", "cos2"):
        for k in range(4):
            f = product_function(k, kind, ell, t_end)
            pairs.append(TestPair(f"phi={f.name}", phi=f))
            pairs.append(TestPair(f"psi={f.name}", psi=f))
    return pairs


def weak_form_residual(states, problem, test_pairs=None, theta0=None, w0=None):
    """Residuals of the integral identity for each test pair.

    ``states`` is the list of all time levels of a run (dense output).  The
    initial fields default to the first state.  Returns a list of
    :class:`ResidualEntry` with per-group contributions; the scale is the
    sum of the integrals of the absolute integrands.
    """
    if len(states) < 2:
        raise DomainError("weak-form residual needs every time level (dense output)")
    t = np.array([s.t for s in states])
    steps = np.diff(t)
    if np.any(steps <= 0) or not np.allclose(steps, problem.dt, rtol=1e-9, atol=0):
        raise DomainError("states must cover consecutive time levels at the problem time step")
    mesh, mp, bp, sc = problem.mesh, problem.mp, problem.bp, problem.scenario
    x = mesh.x
    h = mesh.h
    xm = 0.5 * (x[:-1] + x[1:])
    t_end = t[-1]
    if test_pairs is None:
        test_pairs = default_catalog(mesh.ell, t_end)
    theta0 = states[0].theta if theta0 is None else np.asarray(theta0, dtype=float)
    w0 = states[0].w if w0 is None else np.asarray(w0, dtype=float)
    d0 = np.zeros_like(x)

    theta = np.array([s.theta for s in states])
    w = np.array([s.w for s in states])
    d = np.array([s.d for s in states])
    coeffs = transformed_coefficients(theta, w, mp)
    dw_e = 0.5 * (coeffs.delta_w[:, :-1] + coeffs.delta_w[:, 1:])
    dth_e = 0.5 * (coeffs.delta_theta[:, :-1] + coeffs.delta_theta[:, 1:])
    lam_e = 0.5 * (coeffs.lam[:, :-1] + coeffs.lam[:, 1:])
    theta_x = np.diff(theta, axis=1) / h
    w_x = np.diff(w, axis=1) / h
    q = dw_e * w_x + dth_e * theta_x
    theta_mid = 0.5 * (theta[:, :-1] + theta[:, 1:])
    cap = mp.C_w * w + mp.rho_S * mp.C_S
    p_s = np.asarray(sorption_pressure(theta[:, -1], w[:, -1], mp))
    th_s = theta[:, -1]
    moist_out = bp.beta_c * (p_s - bp.P_inf)
    rad_out = (bp.alpha_c + bp.e * bp.sigma * np.abs(th_s) ** 3) * th_s
    conv_out = mp.C_w * th_s * moist_out
    t_half = 0.5 * (t[:-1] + t[1:])
    # the load is known in closed form, so it is sampled at the midpoints too
    load, load_half = thermal_load(sc, bp, t), thermal_load(sc, bp, t_half)

    def simpson(ends, mids):
        # Simpson's rule per step on the values at the levels and midpoints
        return float(np.sum(steps / 6.0 * (ends[:-1] + 4.0 * mids + ends[1:])))

    def space_time(data, fn, nodal):
        xs = x if nodal else xm
        xint = (lambda f: np.trapezoid(f, x, axis=-1)) if nodal else (lambda f: h * np.sum(f, axis=-1))
        f_end = fn(xs[None, :], t[:, None])
        f_mid = fn(xs[None, :], t_half[:, None])
        d_mid = 0.5 * (data[:-1] + data[1:])
        value = simpson(xint(data * f_end), xint(d_mid * f_mid))
        size = simpson(xint(np.abs(data * f_end)), xint(np.abs(d_mid * f_mid)))
        return value, size

    def boundary(data, fn, data_half=None):
        if data_half is None:
            data_half = 0.5 * (data[:-1] + data[1:])
        f_end, f_mid = fn(mesh.ell, t), fn(mesh.ell, t_half)
        return (simpson(data * f_end, data_half * f_mid),
                simpson(np.abs(data * f_end), np.abs(data_half * f_mid)))

    def initial(integrand):
        return -float(np.trapezoid(integrand, x)), float(np.trapezoid(np.abs(integrand), x))

    out = []
    for pair in test_pairs:
        terms = {}
        if pair.phi is not None:
            f = pair.phi
            terms["storage_w"] = space_time(-(w - d), f.dt, True)
            terms["flux_w"] = space_time(q, f.dx, False)
            terms["boundary_w"] = boundary(moist_out, f.value)
            terms["initial_w"] = initial((w0 - d0) * f.value(x, 0.0))
        if pair.psi is not None:
            f = pair.psi
            terms["storage_theta"] = space_time(-(cap * theta + mp.h_d * d), f.dt, True)
            terms["conduction"] = space_time(lam_e * theta_x, f.dx, False)
            terms["convection"] = space_time(mp.C_w * q * theta_mid, f.dx, False)
            rad_mid = 0.5 * (rad_out[:-1] + rad_out[1:])
            terms["boundary_radiative"] = boundary(rad_out - load, f.value, rad_mid - load_half)
            terms["boundary_convective"] = boundary(conv_out, f.value)
            cap0 = mp.C_w * w0 + mp.rho_S * mp.C_S
            terms["initial_theta"] = initial((cap0 * theta0 + mp.h_d * d0) * f.value(x, 0.0))
        groups = {k: v[0] for k, v in terms.items()}
        scale = sum(v[1] for v in terms.values())
        out.append(ResidualEntry(pair.name, abs(sum(groups.values())), scale, groups))
    return out


def refinement_study(scenario=None, t_end: float = 1800.0, n_elements: int = 240, dt: float = 0.5,
                     ell: float = 0.12, theta0: float = 293.15, w0: float = 71.01,
                     min_ratio: float = 1.8) -> dict:
    """Residuals at (h, dt) and (h/2, dt/2) for every catalog pair.

    The catalog is built once for ``t_end`` and used on both levels.
    Returns a JSON-ready report with the per-pair ratio coarse/fine.
    """
    from ..fire import ISO834
    from ..solver import Mesh1D, Problem, SolverOptions, initial_state, simulate

    scenario = scenario or ISO834()
    catalog = default_catalog(ell, t_end)
    levels = []
    for k in (1, 2):
        pr = Problem(mesh=Mesh1D(ell, n_elements * k), scenario=scenario, dt=dt / k,
                     options=SolverOptions(dense_output=True))
        series = simulate(pr, initial_state(pr.mesh, theta0, w0, pr.mp), t_end)
        levels.append(weak_form_residual(series.dense, pr, catalog))
    pairs = []
    for coarse, fine in zip(*levels):
        ratio = coarse.residual / fine.residual if fine.residual > 0 else float("inf")
        pairs.append({"pair": coarse.name, "coarse": coarse.residual, "fine": fine.residual,
                      "relative_coarse": coarse.relative, "ratio": ratio,
                      "passed": ratio >= min_ratio})
    passed = all(p["passed"] for p in pairs)
    return {"passed": passed, "min_ratio": min_ratio, "t_end": t_end, "n_elements": n_elements,
            "dt": dt, "scenario": scenario.kind, "pairs": pairs}
