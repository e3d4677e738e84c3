"""Relaxation of the dehydrated-water mass toward its equilibrium.

The field d obeys ``d_t = -(d - d_eq(theta)) / tau`` pointwise in x, whose
solution is the exponential convolution

    d(t) = (1/tau) * int_0^t exp((s - t)/tau) * d_eq(theta(s)) ds

with d(0) = 0.  Both updates below integrate that kernel exactly for a
given assumption on theta within a step, so they are unconditionally stable
and never leave the interval spanned by the old value and the forcing.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .materials import DEFAULT_PARAMS, MaterialParams, dehydration_equilibrium


@dataclass
class DehydrationField:
    """Nodal dehydrated-water mass and the time it refers to."""

    d: np.ndarray
    t: float = 0.0

    def advance(self, theta_new, dt, tau, mp: MaterialParams = DEFAULT_PARAMS, theta_old=None):
        self.d = d_step(self.d, theta_new, dt, tau, mp, theta_old=theta_old)
        self.t += dt
        return self.d


def _check_positive(name, value):
    if not (np.isfinite(value) and value > 0):
        raise DomainError(f"{name} must be positive and finite, got {value!r}")


def relax(d_old, d_eq_old, d_eq_new, dt, tau):
    """Exact update for a forcing d_eq varying linearly in time over the step.

    With ``E = exp(-dt/tau)`` the result is::

        E d_old + (1 - E) d_eq_old + (d_eq_new - d_eq_old) (1 - tau (1 - E) / dt)

    which is a convex combination of d_old, d_eq_old and d_eq_new.  When
    d_eq_old == d_eq_new it reduces to the frozen-forcing update.
    """
    r = dt / tau
    e = np.exp(-r)
    ramp_weight = 1.0 + np.expm1(-r) / r
    return e * d_old + (1.0 - e) * d_eq_old + (d_eq_new - d_eq_old) * ramp_weight


def d_step(d_old, theta_new, dt, tau, mp: MaterialParams = DEFAULT_PARAMS, theta_old=None):
    """Advance d by one step of length dt.

    Without ``theta_old`` the temperature is frozen at ``theta_new`` over the
    step: ``d_new = E d_old + (1 - E) d_eq(theta_new)``, ``E = exp(-dt/tau)``.
    With ``theta_old`` the forcing d_eq(theta(t)) is interpolated linearly
    between the two step ends and integrated exactly, which is second order
    for smooth temperature histories.
    """
    _check_positive("dt", dt)
    _check_positive("tau", tau)
    d_old = np.asarray(d_old, dtype=float)
    if not np.all(np.isfinite(d_old)):
        raise DomainError("d_old must be finite")
    d_new_eq = dehydration_equilibrium(theta_new, mp)
    if theta_old is None:
        e = np.exp(-dt / tau)
        out = e * d_old + (1.0 - e) * d_new_eq
    else:
        out = relax(d_old, dehydration_equilibrium(theta_old, mp), d_new_eq, dt, tau)
    return float(out) if np.ndim(out) == 0 else out


def d_exact(times, thetas, t, tau, mp: MaterialParams = DEFAULT_PARAMS):
    """Convolution solution for a piecewise-constant temperature history.

    ``thetas[k]`` holds on ``[times[k], times[k+1])``; the last value holds
    up to ``t``.  ``times[0]`` must be 0 and times strictly increasing.
    Each segment contributes ``D_k (exp(-(t - b_k)/tau) - exp(-(t - a_k)/tau))``.
    """
    _check_positive("tau", tau)
    times = np.asarray(times, dtype=float)
    thetas = np.asarray(thetas, dtype=float)
    if times.ndim != 1 or times.shape != thetas.shape[:1] or times.size == 0:
        raise DomainError("times and thetas must be 1-D with matching length")
    if times[0] != 0.0 or np.any(np.diff(times) <= 0):
        raise DomainError("history times must start at 0 and be strictly increasing")
    if not (np.isfinite(t) and t >= 0):
        raise DomainError("t must be finite and non-negative")
    d_eq = dehydration_equilibrium(thetas, mp)
    starts = np.minimum(times, t)
    ends = np.minimum(np.append(times[1:], np.inf), t)
    weights = np.exp(-(t - ends) / tau) - np.exp(-(t - starts) / tau)
    out = np.tensordot(weights, np.asarray(d_eq), axes=(0, 0))
    return float(out) if np.ndim(out) == 0 else out
