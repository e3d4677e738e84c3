"""Linear finite elements with semi-implicit time stepping for the wall.

Unknowns are nodal temperature theta, free water w and dehydrated water d on
a uniform mesh of [0, ell]; x = 0 is insulated, x = ell faces the fire.  One
step advances d, then w, then theta, each a single linear solve with all
nonlinear coefficients taken from the previous time level:

    w_t - d_t = (delta_w w_x + delta_theta theta_x)_x
    c(w) theta_t + (C_w theta + h_d) d_t = (lam theta_x)_x + C_w q theta_x

with q = delta_w w_x + delta_theta theta_x and c(w) = C_w w + rho_S C_S.
Mass and capacity are lumped (row sums).  In ``upwind`` mode the
thermally driven moisture flux and the advective heat term are upwinded so
both matrices are M-matrices, which keeps w and d non-negative.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import materials
from .dehydration import d_step
from .errors import ConfigError, SolverError
from .fire import BoundaryParams, FireScenario, thermal_load
from .materials import DEFAULT_PARAMS, MaterialParams
from .tridiag import TridiagonalSystem, solve_tridiagonal

log = logging.getLogger(__name__)

CLAMP_WARN_FRACTION = 1e-3


@dataclass(frozen=True)
class Mesh1D:
    """Uniform mesh of [0, ell] with ``n_elements`` linear elements."""

    ell: float = 0.12
    n_elements: int = 240

    def __post_init__(self):
        if not (math.isfinite(self.ell) and self.ell > 0):
            raise ConfigError(f"ell must be positive, got {self.ell!r}")
        if int(self.n_elements) != self.n_elements or self.n_elements < 2:
            raise ConfigError(f"n_elements must be an integer >= 2, got {self.n_elements!r}")

    @property
    def n_nodes(self) -> int:
        return self.n_elements + 1

    @property
    def h(self) -> float:
        return self.ell / self.n_elements

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.ell, self.n_nodes)

    @property
    def lumped_mass(self) -> np.ndarray:
        m = np.full(self.n_nodes, self.h)
        m[0] = m[-1] = 0.5 * self.h
        return m


@dataclass
class SystemState:
    """Nodal fields at one time level."""

    t: float
    theta: np.ndarray
    w: np.ndarray
    d: np.ndarray

    def copy(self) -> "SystemState":
        return SystemState(self.t, self.theta.copy(), self.w.copy(), self.d.copy())


@dataclass
class StepReport:
    """Diagnostics of one time step."""

    t: float
    residual_w: float
    residual_theta: float
    n_clamped: int
    n_evaluated: int
    theta_min: float
    theta_max: float
    w_min: float
    w_max: float
    d_min: float
    d_max: float
    heat_flux_out: float
    moisture_flux_out: float
    violations: tuple = ()

    def log_line(self) -> str:
        return (f"t={self.t:.6g} theta=[{self.theta_min:.6g},{self.theta_max:.6g}] "
                f"w=[{self.w_min:.6g},{self.w_max:.6g}] d=[{self.d_min:.6g},{self.d_max:.6g}] "
                f"clamped={self.n_clamped} res_w={self.residual_w:.3e} "
                f"res_theta={self.residual_theta:.3e}")


@dataclass(frozen=True)
class FrozenCoefficients:
    """Constant transport coefficients replacing the constitutive stack."""

    delta_w: float
    delta_theta: float
    lam: float


@dataclass
class Forcing:
    """Extra volumetric sources and exposed-face flux corrections.

    ``source_w(x, t)`` and ``source_theta(x, t)`` are added to the right-hand
    sides of the moisture and energy equations; ``boundary_w(t)`` and
    ``boundary_theta(t)`` are subtracted from the outward moisture and heat
    fluxes at x = ell.  Used for manufactured solutions.
    """

    source_w: Optional[Callable] = None
    source_theta: Optional[Callable] = None
    boundary_w: Optional[Callable] = None
    boundary_theta: Optional[Callable] = None


@dataclass
class SolverOptions:
    """Discretisation switches and monitor policy."""

    advection: str = "upwind"
    coupling_theta: str = "old"
    monitor_policy: str = "warn"
    dense_output: bool = False
    boundary_enthalpy_term: bool = False
    frozen: Optional[FrozenCoefficients] = None
    negative_tolerance: float = 1e-10
    check_residual: bool = True

    def __post_init__(self):
        if self.advection not in ("upwind", "centered"):
            raise ConfigError(f"advection must be 'upwind' or 'centered', got {self.advection!r}")
        if self.coupling_theta not in ("old", "predictor"):
            raise ConfigError(f"coupling_theta must be 'old' or 'predictor', got {self.coupling_theta!r}")
        if self.monitor_policy not in ("warn", "abort"):
            raise ConfigError(f"monitor_policy must be 'warn' or 'abort', got {self.monitor_policy!r}")


@dataclass
class Problem:
    """Everything a run needs apart from the initial state."""

    mesh: Mesh1D = field(default_factory=Mesh1D)
    scenario: FireScenario = None
    bp: BoundaryParams = None
    mp: MaterialParams = DEFAULT_PARAMS
    dt: float = 0.5
    options: SolverOptions = field(default_factory=SolverOptions)
    forcing: Forcing = field(default_factory=Forcing)

    def __post_init__(self):
        if self.scenario is None:
            from .fire import ISO834
            self.scenario = ISO834()
        if self.bp is None:
            self.bp = BoundaryParams.for_scenario(self.scenario)
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"dt must be positive, got {self.dt!r}")


@dataclass
class Snapshot:
    t: float
    theta: np.ndarray
    w: np.ndarray
    d: np.ndarray
    p: np.ndarray


@dataclass
class NormMonitor:
    """Running maxima of the discrete L2 and L4 norms."""

    theta_l2: float = 0.0
    w_l2: float = 0.0
    theta_l4: float = 0.0

    def update(self, mass, state):
        self.theta_l2 = max(self.theta_l2, float(np.sqrt(mass @ state.theta**2)))
        self.w_l2 = max(self.w_l2, float(np.sqrt(mass @ state.w**2)))
        self.theta_l4 = max(self.theta_l4, float((mass @ state.theta**4) ** 0.25))

    def as_dict(self):
        return {"theta_Linf_L2": self.theta_l2, "w_Linf_L2": self.w_l2,
                "theta_Linf_L4": self.theta_l4}


@dataclass
class SnapshotSeries:
    """Recorded output of a run."""

    x: np.ndarray
    snapshots: list = field(default_factory=list)
    probe_x: tuple = ()
    probe_t: list = field(default_factory=list)
    probe_values: list = field(default_factory=list)
    reports: list = field(default_factory=list)
    norms: NormMonitor = field(default_factory=NormMonitor)
    monitor: dict = field(default_factory=dict)
    dense: list = field(default_factory=list)

    @property
    def times(self):
        return [s.t for s in self.snapshots]

    def at(self, t: float) -> Snapshot:
        for s in self.snapshots:
            if abs(s.t - t) < 1e-9 * max(1.0, abs(t)):
                return s
        raise KeyError(f"no snapshot at t={t}")


def initial_state(mesh: Mesh1D, theta0, w0, mp: MaterialParams = DEFAULT_PARAMS) -> SystemState:
    """Uniform or nodal initial fields with d = 0.

    ``theta0`` and ``w0`` may be scalars, nodal arrays or callables of x.
    Non-positive values are rejected.
    """
    x = mesh.x

    def nodal(value, name):
        v = value(x) if callable(value) else value
        arr = np.broadcast_to(np.asarray(v, dtype=float), x.shape).copy()
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
            raise ConfigError(f"initial {name} must be finite and positive at every node")
        return arr

    return SystemState(0.0, nodal(theta0, "theta"), nodal(w0, "w"), np.zeros_like(x))


class Stepper:
    """Assembles and solves the two tridiagonal systems of one step."""

    def __init__(self, problem: Problem):
        self.problem = problem
        self.mesh = problem.mesh
        self.x = self.mesh.x
        self.mass = self.mesh.lumped_mass
        self.w_floor = 1e-8 * problem.mp.w0s
        self.clamped = 0
        self.evaluated = 0

    # -- coefficients -------------------------------------------------------

    def coefficients(self, state):
        """Nodal P, dP/dw and element-averaged transport coefficients."""
        mp = self.problem.mp
        p, _, dp_dw, coeffs = materials.state_properties(state.theta, state.w, mp)
        frozen = self.problem.options.frozen
        if frozen is not None:
            n = self.mesh.n_elements
            return p, dp_dw, (np.full(n, frozen.delta_w), np.full(n, frozen.delta_theta),
                              np.full(n, frozen.lam))
        self.clamped += coeffs.n_clamped
        self.evaluated += coeffs.n_evaluated

        def avg(v):
            return 0.5 * (v[:-1] + v[1:])

        return p, dp_dw, (avg(coeffs.delta_w), avg(coeffs.delta_theta), avg(coeffs.lam))

    # -- moisture -------------------------------------------------------------

    def assemble_moisture(self, state, d_new, p_old, dp_dw, coeffs, theta_drive, t_new):
        """System for w_new; returns it with the data needed for the fluxes."""
        pr = self.problem
        dt, h, m = pr.dt, self.mesh.h, self.mass
        dw_e, dth_e, _ = coeffs
        n = self.mesh.n_nodes
        sys = TridiagonalSystem.zeros(n)
        sys.diag += m / dt
        sys.rhs += m * state.w / dt

        a = dw_e / h
        sys.diag[:-1] += a
        sys.diag[1:] += a
        sys.upper[:-1] -= a
        sys.lower[1:] -= a

        flux_theta = dth_e * np.diff(theta_drive) / h
        w_donor = None
        if pr.options.advection == "centered":
            sys.rhs[:-1] += flux_theta
            sys.rhs[1:] -= flux_theta
        else:
            # Patankar donor-cell form: the flux is carried by w_new of the donor
            fwd = flux_theta > 0  # donor is the right node
            w_donor = np.maximum(np.where(fwd, state.w[1:], state.w[:-1]), self.w_floor)
            k = np.abs(flux_theta) / w_donor
            kf = np.where(fwd, k, 0.0)
            kb = np.where(fwd, 0.0, k)
            sys.diag[1:] += kf
            sys.upper[:-1] -= kf
            sys.diag[:-1] += kb
            sys.lower[1:] -= kb

        source = m * (d_new - state.d) / dt
        gain = source >= 0
        sys.rhs += np.where(gain, source, 0.0)
        sys.diag += np.where(gain, 0.0, -source / np.maximum(state.w, self.w_floor))

        if pr.forcing.source_w is not None:
            sys.rhs += m * pr.forcing.source_w(self.x, t_new)

        slope, intercept = self._pressure_linearisation(state.w[-1], p_old[-1], dp_dw[-1])
        beta = pr.bp.beta_c
        sys.diag[-1] += beta * slope
        sys.rhs[-1] += beta * (pr.bp.P_inf - intercept)
        if pr.forcing.boundary_w is not None:
            sys.rhs[-1] += pr.forcing.boundary_w(t_new)
        return sys, (flux_theta, w_donor, slope, intercept)

    def _pressure_linearisation(self, w_old, p_old, dp_dw):
        """P(w_new) ~ slope * w_new + intercept around the old state.

        One Newton step on P, with the intercept capped at P_inf so the
        boundary right-hand side stays non-negative; the line still passes
        through (w_old, P_old).
        """
        p_inf = self.problem.bp.P_inf
        if w_old <= 0:
            return max(dp_dw, 0.0), 0.0
        intercept = min(p_old - dp_dw * w_old, p_inf)
        slope = (p_old - intercept) / w_old
        return max(slope, 0.0), intercept

    def moisture_fluxes(self, w_new, coeffs, aux):
        """Discrete element fluxes q_e consistent with the moisture solve."""
        dw_e = coeffs[0]
        flux_theta, w_donor, _, _ = aux
        q = dw_e * np.diff(w_new) / self.mesh.h
        if w_donor is None:
            return q + flux_theta
        fwd = flux_theta > 0
        carried = np.where(fwd, w_new[1:], w_new[:-1])
        return q + flux_theta * carried / w_donor

    # -- energy ---------------------------------------------------------------

    def assemble_energy(self, state, w_new, d_new, q, coeffs, t_new, p_surf_new=None):
        pr = self.problem
        mp, bp = pr.mp, pr.bp
        dt, h, m = pr.dt, self.mesh.h, self.mass
        lam_e = coeffs[2]
        n = self.mesh.n_nodes
        sys = TridiagonalSystem.zeros(n)
        cap = mp.C_w * w_new + mp.rho_S * mp.C_S
        sys.diag += m * cap / dt
        sys.rhs += m * cap * state.theta / dt

        a = lam_e / h
        sys.diag[:-1] += a
        sys.diag[1:] += a
        sys.upper[:-1] -= a
        sys.lower[1:] -= a

        k = mp.C_w * q
        if pr.options.advection == "centered":
            half = 0.5 * k
            sys.diag[:-1] += half
            sys.upper[:-1] -= half
            sys.lower[1:] += half
            sys.diag[1:] -= half
        else:
            # heat is carried by the water flux -q (positive toward x = ell)
            to_right = q < 0
            kr = np.where(to_right, -k, 0.0)
            kl = np.where(to_right, 0.0, k)
            sys.diag[1:] += kr
            sys.lower[1:] -= kr
            sys.diag[:-1] += kl
            sys.upper[:-1] -= kl

        sys.rhs -= m * (mp.C_w * state.theta + mp.h_d) * (d_new - state.d) / dt
        if pr.forcing.source_theta is not None:
            sys.rhs += m * pr.forcing.source_theta(self.x, t_new)

        theta_s = state.theta[-1]
        sys.diag[-1] += bp.alpha_c + bp.e * bp.sigma * abs(theta_s) ** 3
        sys.rhs[-1] += thermal_load(pr.scenario, bp, t_new)
        if pr.forcing.boundary_theta is not None:
            sys.rhs[-1] += pr.forcing.boundary_theta(t_new)
        if pr.options.boundary_enthalpy_term and p_surf_new is not None:
            sys.diag[-1] += mp.C_w * bp.beta_c * (p_surf_new - bp.P_inf)
        return sys

    # -- step -----------------------------------------------------------------

    def step(self, state: SystemState):
        pr = self.problem
        t_new = state.t + pr.dt
        d_new = d_step(state.d, state.theta, pr.dt, pr.mp.tau, pr.mp)
        p_old, dp_dw, coeffs = self.coefficients(state)

        theta_drive = state.theta
        passes = 2 if pr.options.coupling_theta == "predictor" else 1
        for _ in range(passes):
            msys, aux = self.assemble_moisture(state, d_new, p_old, dp_dw, coeffs, theta_drive, t_new)
            w_new = solve_tridiagonal(msys, check=pr.options.check_residual)
            q = self.moisture_fluxes(w_new, coeffs, aux)
            p_surf = aux[2] * w_new[-1] + aux[3]
            esys = self.assemble_energy(state, w_new, d_new, q, coeffs, t_new, p_surf)
            theta_new = solve_tridiagonal(esys, check=pr.options.check_residual)
            theta_drive = theta_new

        new = SystemState(t_new, theta_new, w_new, d_new)
        report = self._report(new, msys, esys, p_surf)
        return new, report

    def _report(self, new, msys, esys, p_surf):
        pr = self.problem
        bp = pr.bp
        th_s = new.theta[-1]
        heat_out = (bp.alpha_c + bp.e * bp.sigma * abs(th_s) ** 3) * th_s \
            - thermal_load(pr.scenario, bp, new.t)
        violations = []
        if not (np.all(np.isfinite(new.theta)) and np.all(np.isfinite(new.w))
                and np.all(np.isfinite(new.d))):
            raise SolverError(f"non-finite field at t={new.t}", report={"t": new.t})
        w_min = float(new.w.min())
        d_min = float(new.d.min())
        if w_min < -pr.options.negative_tolerance * pr.mp.w0s:
            violations.append(f"w_min={w_min:.3e}")
        if d_min < 0:
            violations.append(f"d_min={d_min:.3e}")
        if np.any(new.theta <= 0):
            violations.append(f"theta_min={new.theta.min():.3e}")
        return StepReport(
            t=new.t,
            residual_w=msys.last_residual if pr.options.check_residual else msys.residual(new.w),
            residual_theta=(esys.last_residual if pr.options.check_residual
                            else esys.residual(new.theta)),
            n_clamped=self.clamped, n_evaluated=self.evaluated,
            theta_min=float(new.theta.min()), theta_max=float(new.theta.max()),
            w_min=w_min, w_max=float(new.w.max()),
            d_min=d_min, d_max=float(new.d.max()),
            heat_flux_out=float(heat_out),
            moisture_flux_out=float(bp.beta_c * (p_surf - bp.P_inf)),
            violations=tuple(violations),
        )


def step(state: SystemState, problem: Problem):
    """One time step; returns ``(new_state, StepReport)``."""
    return Stepper(problem).step(state)


def _interp_weights(x, points):
    idx, frac = [], []
    for p in points:
        if not (x[0] <= p <= x[-1]):
            raise ConfigError(f"probe location {p} lies outside [0, {x[-1]}]")
        i = min(int(np.searchsorted(x, p, side="right")) - 1, x.size - 2)
        idx.append(i)
        frac.append((p - x[i]) / (x[i + 1] - x[i]))
    return np.array(idx), np.array(frac)


def simulate(problem: Problem, state: SystemState, t_end: float, snapshot_times=(),
             probes=(), log_file=None) -> SnapshotSeries:
    """Step from ``state`` to ``t_end`` and record snapshots and probes.

    Snapshot times are rounded to the nearest time level.  The number of
    steps is ``round(t_end / dt)``; ``t_end`` must be a multiple of dt to
    within 1e-9 relative.
    """
    dt = problem.dt
    n_steps = int(round(t_end / dt))
    if t_end < 0 or abs(n_steps * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise ConfigError(f"end time {t_end} is not a non-negative multiple of dt={dt}")
    snap_steps = {}
    for s in snapshot_times:
        k = int(round(s / dt))
        if s < 0 or k > n_steps:
            raise ConfigError(f"snapshot time {s} outside [0, {t_end}]")
        snap_steps[k] = s
    stepper = Stepper(problem)
    mp = problem.mp
    series = SnapshotSeries(x=stepper.x, probe_x=tuple(probes))
    pidx, pfrac = _interp_weights(stepper.x, probes) if probes else (None, None)
    policy = problem.options.monitor_policy
    n_violations = 0
    first_violation = None

    def record(st, k):
        if k in snap_steps:
            p = materials.sorption_pressure(st.theta, st.w, mp)
            series.snapshots.append(Snapshot(snap_steps[k], st.theta.copy(), st.w.copy(),
                                             st.d.copy(), np.asarray(p, dtype=float)))
        if probes:
            nodes = np.concatenate([pidx, pidx + 1])
            p_nodes = np.zeros_like(st.theta)
            p_nodes[nodes] = materials.sorption_pressure(st.theta[nodes], st.w[nodes], mp)
            row = []
            for i, f in zip(pidx, pfrac):
                for arr in (st.theta, p_nodes, st.w, st.d):
                    row.append(float((1 - f) * arr[i] + f * arr[i + 1]))
            series.probe_t.append(st.t)
            series.probe_values.append(row)
        if problem.options.dense_output:
            series.dense.append(st.copy())
        series.norms.update(stepper.mass, st)

    state = state.copy()
    record(state, 0)
    w_min = float(state.w.min())
    d_min = float(state.d.min())
    for k in range(1, n_steps + 1):
        state, report = stepper.step(state)
        state.t = k * dt
        w_min = min(w_min, report.w_min)
        d_min = min(d_min, report.d_min)
        if log_file is not None:
            log_file.write(report.log_line() + "\n")
        if report.violations:
            n_violations += 1
            if first_violation is None:
                first_violation = (report.t, report.violations)
            msg = f"monitor violation at t={report.t}: {', '.join(report.violations)}"
            if policy == "abort":
                raise SolverError(msg, report=report)
            if n_violations == 1:
                log.warning(msg)
        if problem.options.dense_output:
            series.reports.append(report)
        record(state, k)

    clamp_fraction = stepper.clamped / stepper.evaluated if stepper.evaluated else 0.0
    if clamp_fraction > CLAMP_WARN_FRACTION:
        log.warning("%.3f%% of coefficient evaluations were clamped", 100 * clamp_fraction)
    series.monitor = {
        "steps": n_steps,
        "w_min": w_min,
        "d_min": d_min,
        "violations": n_violations,
        "first_violation": None if first_violation is None
        else {"t": first_violation[0], "what": list(first_violation[1])},
        "clamped": stepper.clamped,
        "evaluated": stepper.evaluated,
        "clamp_fraction": clamp_fraction,
        "passed": n_violations == 0,
    }
    return series
