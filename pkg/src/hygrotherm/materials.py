"""Constitutive models for heated concrete.

All functions accept scalars or numpy arrays and are pure.  Temperatures are
absolute (K), water contents in kg/m^3, pressures in Pa.

The pore pressure is eliminated from the transport equations through the
sorption relation ``P = P_sat(theta) * h(theta, w)``; the transport
coefficients of the two-field system then follow from the chain rule::

    delta_w     = kappa(theta, P) * dP/dw
    delta_theta = kappa(theta, P) * dP/dtheta
    lam         = Lambda(theta, P)

Partial derivatives of ``P`` are computed by complex-step differentiation of
the same code path that evaluates ``P``, so every branch below is written with
analytic operations only and branch selection on real parts.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

T_REF = 293.15  # K, reference (room) temperature
RHO_LIQUID = 1000.0  # kg/m^3, liquid water density used in the conductivity model

# IAPWS (Wagner & Pruss 1993) saturation-pressure correlation.
T_CRIT = 647.096  # K
P_CRIT = 22.064e6  # Pa
_WP_A = (-7.85951783, 1.84408259, -11.7866497, 22.6807411, -15.9618719, 1.80122502)
# slope of the correlation at the critical point; used for the linear extension
_DPSAT_CRIT = -P_CRIT * _WP_A[0] / T_CRIT

# Bazant-Thonguthai isotherm knots and saturated-branch slope.
H_UNSAT = 0.96
H_SAT = 1.04
SAT_SLOPE = 0.12
_W_SHIFT_FRAC = 1e-3  # regularising shift of the power law, as a fraction of w0s
_FILLET_FRAC = 0.2

# Bazant-Thonguthai humidity factor of the low-temperature permeability branch.
_PERM_ALPHA = 0.05
_PERM_HC = 0.75

_COMPLEX_STEP = 1e-30


@dataclass(frozen=True)
class MaterialParams:
    """Material constants of heated concrete plus the coefficient clamps.

    Defaults reproduce the illustrative wall of the reference example.  The
    clamp bounds keep the transformed coefficients uniformly positive and
    bounded, which the discrete problem needs to stay uniformly parabolic.
    """

    rho_S: float = 2400.0
    C_S: float = 900.0
    C_w: float = 2080.0
    h_d: float = 2.5e6
    tau: float = 10800.0
    a0: float = 1e-13
    g: float = 9.81
    lambda_d0: float = 1.3863
    A_lambda: float = -0.0007272
    n0: float = 0.1
    c_cem: float = 250.0
    w0s: float = 100.0
    d_eq_scale: float = 330.0
    lambda_min: float = 0.05
    lambda_max: float = 10.0
    delta_min: float = 1e-16
    delta_max: float = 1e-4
    # shape constants of the surrogate models (see module docstring of each)
    porosity_slope: float = 1.95e-4
    d_eq_onset: float = 378.15
    d_eq_full: float = 973.15
    d_eq_smoothing: float = 10.0
    perm_jump: float = 100.0
    perm_center: float = 368.15
    perm_width: float = 5.0

    def __post_init__(self):
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if not np.isfinite(value):
                raise DomainError(f"MaterialParams.{f.name} must be finite, got {value!r}")
            if f.name != "A_lambda" and value <= 0:
                raise DomainError(f"MaterialParams.{f.name} must be positive, got {value!r}")
        if self.lambda_min > self.lambda_max:
            raise DomainError("lambda_min must not exceed lambda_max")
        if self.delta_min > self.delta_max:
            raise DomainError("delta_min must not exceed delta_max")
        if self.n0 >= 1:
            raise DomainError("n0 must be below 1")
        if self.d_eq_onset + self.d_eq_smoothing > self.d_eq_full:
            raise DomainError("d_eq_full must exceed d_eq_onset + d_eq_smoothing")

    @property
    def d_eq_slope_bound(self) -> float:
        """Global bound on |d d_eq / d theta|."""
        return self.d_eq_scale / (self.d_eq_full - self.d_eq_onset)

    def replace(self, **changes) -> "MaterialParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class StatePoint:
    """A single (theta, w[, P]) material state."""

    theta: float
    w: float
    p: float | None = None

    def __post_init__(self):
        if not self.theta > 0:
            raise DomainError(f"theta must be positive, got {self.theta!r}")


@dataclass
class TransformedCoefficients:
    """Diffusion coefficients of the two-field system, already clamped."""

    delta_w: np.ndarray
    delta_theta: np.ndarray
    lam: np.ndarray
    n_clamped: int = 0
    n_evaluated: int = 0


DEFAULT_PARAMS = MaterialParams()


def _as_array(x, name):
    a = np.asarray(x)
    if a.dtype.kind not in "fc":
        a = a.astype(float)
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} must be finite")
    return a


def _result(a, *inputs):
    if all(np.ndim(x) == 0 for x in inputs):
        return float(np.real(a))
    return np.real(a) if np.iscomplexobj(a) else a


def _check_temperature(theta):
    if np.any(np.real(theta) <= 0):
        raise DomainError("absolute temperature must be positive")


# ----------------------------------------------------------------------------
# saturation vapour pressure


def _psat(theta):
    tau = 1.0 - theta / T_CRIT
    below = np.real(tau) > 0
    t1 = np.where(below, tau, 0.5)
    root = np.sqrt(t1)
    t3 = t1 * t1 * t1
    t35 = t3 * root
    a1, a2, a3, a4, a5, a6 = _WP_A
    poly = a1 * t1 + a2 * t1 * root + a3 * t3 + a4 * t35 + a5 * t3 * t1 + a6 * t35 * t3 * t1
    p_low = P_CRIT * np.exp(T_CRIT / theta * poly)
    p_high = P_CRIT + _DPSAT_CRIT * (theta - T_CRIT)
    return np.where(below, p_low, p_high)


def saturation_pressure(theta):
    """Saturation vapour pressure of water (Pa).

    IAPWS correlation of Wagner and Pruss below the critical point, continued
    linearly (C^1) above it so the function stays positive and increasing.
    """
    th = _as_array(theta, "theta")
    _check_temperature(th)
    return _result(_psat(th), theta)


# ----------------------------------------------------------------------------
# sorption isotherm


def porosity(theta, mp: MaterialParams = DEFAULT_PARAMS):
    """Porosity n(theta): constant n0 up to T_REF, then a C^1 linear ramp."""
    th = _as_array(theta, "theta")
    _check_temperature(th)
    return _result(_porosity(th, mp), theta)


def _porosity(theta, mp):
    width = 10.0
    u = theta - T_REF
    ur = np.real(u)
    ramp = np.where(ur <= 0, 0.0 * u, np.where(ur < width, u * u / (2 * width), u - width / 2))
    n = mp.n0 + mp.porosity_slope * ramp
    # keep strictly below one for absurd temperatures
    return np.where(np.real(n) < 0.95, n, 0.95 + 0.0 * n)


def _m_exponent(theta):
    t_prime = (theta - 263.15) / 35.0
    t2 = t_prime * t_prime
    return 1.04 - t2 / (22.34 + t2)


def _saturated_content(theta, mp):
    return H_SAT * mp.w0s * _porosity(theta, mp) / mp.n0


def _hermite(x, x0, x1, y0, y1, m0, m1):
    dx = x1 - x0
    t = (x - x0) / dx
    t2 = t * t
    t3 = t2 * t
    return ((2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * dx * m0
            + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * dx * m1)


def _relative_humidity(theta, w, mp):
    """h = P/P_sat as a function of (theta, w); works on complex input."""
    c = mp.c_cem
    ws = _W_SHIFT_FRAC * mp.w0s
    m = _m_exponent(theta)
    k = c / mp.w0s
    # written as b0 * b0^(m-1) so the power law vanishes exactly at w = 0
    b0 = ws / c
    b0m1 = b0 ** (m - 1)
    base0 = b0 * b0m1

    wr = np.real(w)
    w_pos = np.where(wr >= 0, w, 0.0 * w)

    def h_a_and_slope(x):
        # one complex power serves both the value and the slope
        b = (x + ws) / c
        bm1 = b ** (m - 1)
        return k * (b * bm1 - base0), k * m / c * bm1

    w_a = c * (H_UNSAT / k + base0) ** (1.0 / m) - ws
    w_sat = _saturated_content(theta, mp)
    gap = w_sat - w_a
    eps = _FILLET_FRAC * gap * w_a / (gap + w_a)
    slope_line = (H_SAT - H_UNSAT) / gap
    slope_sat = 1.0 / (SAT_SLOPE * w_sat)

    h_line = H_UNSAT + slope_line * (w_pos - w_a)
    h_satb = H_SAT + (w_pos / w_sat - 1.0) / SAT_SLOPE
    x0 = w_a - eps
    h_x0, dh_x0 = h_a_and_slope(x0)
    f1 = _hermite(w_pos, x0, w_a + eps, h_x0, H_UNSAT + slope_line * eps, dh_x0, slope_line)
    f2 = _hermite(w_pos, w_sat - eps, w_sat + eps, H_SAT - slope_line * eps,
                  H_SAT + eps / (SAT_SLOPE * w_sat), slope_line, slope_sat)

    x0r, a1r = np.real(x0), np.real(w_a + eps)
    s0r, s1r = np.real(w_sat - eps), np.real(w_sat + eps)
    h = np.where(wr < x0r, h_a_and_slope(w_pos)[0],
        np.where(wr < a1r, f1,
        np.where(wr < s0r, h_line,
        np.where(wr < s1r, f2, h_satb))))
    # odd linear continuation for w < 0 keeps P*w >= 0
    slope0 = k * m / c * b0m1
    return np.where(wr >= 0, h, slope0 * w)


def _pressure(theta, w, mp):
    return _psat(theta) * _relative_humidity(theta, w, mp)


def sorption_pressure(theta, w, mp: MaterialParams = DEFAULT_PARAMS):
    """Pore pressure P(theta, w) = P_sat(theta) * h(theta, w).

    The relative humidity follows the Bazant-Thonguthai isotherm: a power law
    ``w = c (w0s h / c)^(1/m(theta))`` for h <= 0.96, the saturated branch
    ``w = w_sat(theta) (1 + 0.12 (h - 1.04))`` for h >= 1.04 and a linear
    bridge in between.  Corners are rounded by cubic Hermite fillets, so h is
    C^1 and monotone in w; the power law is shifted by ``1e-3 w0s`` so its
    slope stays finite at w = 0.  For w < 0 the isotherm continues linearly
    with its slope at zero, so ``P * w >= 0`` for every finite input.
    """
    th = _as_array(theta, "theta")
    ww = _as_array(w, "w")
    _check_temperature(th)
    th, ww = np.broadcast_arrays(th, ww)
    return _result(_pressure(th.astype(complex), ww.astype(complex), mp), theta, w)


def sorption_pressure_derivatives(theta, w, mp: MaterialParams = DEFAULT_PARAMS):
    """Return ``(dP/dtheta, dP/dw)`` by complex-step differentiation."""
    th = _as_array(theta, "theta")
    ww = _as_array(w, "w")
    _check_temperature(th)
    th, ww = np.broadcast_arrays(th.astype(float), ww.astype(float))
    _, dp_dt, dp_dw = _pressure_and_partials(th, ww, mp)
    return _result(dp_dt, theta, w), _result(dp_dw, theta, w)


def _pressure_and_partials(theta, w, mp):
    # both perturbations in one stacked evaluation
    step = _COMPLEX_STEP
    n = theta.size
    th = np.concatenate([theta.ravel() + 1j * step, theta.ravel() + 0j])
    ww = np.concatenate([w.ravel() + 0j, w.ravel() + 1j * step])
    pr = _pressure(th, ww, mp)
    shape = theta.shape
    return (np.real(pr[:n]).reshape(shape), (np.imag(pr[:n]) / step).reshape(shape),
            (np.imag(pr[n:]) / step).reshape(shape))


def saturation_degree(theta, p, mp: MaterialParams = DEFAULT_PARAMS):
    """Liquid saturation S(theta, P) in [0, 1].

    Water content on the unsaturated isotherm branch at ``h = P / P_sat``,
    normalised by the saturated content w_sat(theta).
    """
    th = _as_array(theta, "theta")
    pp = _as_array(p, "p")
    _check_temperature(th)
    return _result(_saturation(th, pp, mp), theta, p)


def _saturation(theta, p, mp, psat=None):
    if psat is None:
        psat = _psat(theta)
    c = mp.c_cem
    ws = _W_SHIFT_FRAC * mp.w0s
    m = _m_exponent(theta)
    h = np.clip(p / psat, 0.0, H_SAT)
    w_eq = c * (h * mp.w0s / c + (ws / c) ** m) ** (1.0 / m) - ws
    return np.clip(w_eq / _saturated_content(theta, mp), 0.0, 1.0)


# ----------------------------------------------------------------------------
# transport properties


def thermal_conductivity(theta, p, mp: MaterialParams = DEFAULT_PARAMS):
    """Effective conductivity Lambda(theta, P) in W/(m K), clamped.

    Dry conductivity ``lambda_d0 (1 + A_lambda (theta - T_REF))`` enhanced by
    the liquid fraction, ``1 + 4 n rho_l S / ((1 - n) rho_S)``.
    """
    th = _as_array(theta, "theta")
    pp = _as_array(p, "p")
    _check_temperature(th)
    lam = _conductivity_raw(th, pp, mp)
    return _result(np.clip(lam, mp.lambda_min, mp.lambda_max), theta, p)


def _conductivity_raw(theta, p, mp, psat=None):
    dry = mp.lambda_d0 * (1.0 + mp.A_lambda * (theta - T_REF))
    n = _porosity(theta, mp)
    s = _saturation(theta, p, mp, psat)
    return dry * (1.0 + 4.0 * n * RHO_LIQUID * s / ((1.0 - n) * mp.rho_S))


def permeability(theta, p, mp: MaterialParams = DEFAULT_PARAMS):
    """Moisture mobility kappa = a(theta, P)/g (flux = kappa * P_x), in s.

    Below about 95 C the Bazant-Thonguthai humidity factor
    ``f1(h) = alpha + (1 - alpha) / (1 + ((1 - h)/(1 - hc))^4)`` applies; above
    it the humidity dependence is dropped, the magnitude jumps by
    ``perm_jump`` and grows with ``exp(u / (0.881 + 0.214 u))``, u = theta -
    perm_center.  A logistic weight of scale ``perm_width`` blends the two.
    """
    th = _as_array(theta, "theta")
    pp = _as_array(p, "p")
    _check_temperature(th)
    return _result(_permeability(th, pp, mp), theta, p)


def _permeability(theta, p, mp, psat=None):
    if psat is None:
        psat = _psat(theta)
    h = np.clip(p / psat, 0.0, 1.0)
    f1 = _PERM_ALPHA + (1.0 - _PERM_ALPHA) / (1.0 + ((1.0 - h) / (1.0 - _PERM_HC)) ** 4)
    u = theta - mp.perm_center
    f3 = np.exp(u / (0.881 + 0.214 * np.maximum(u, 0.0)))
    s = 0.5 * (1.0 + np.tanh(u / (2.0 * mp.perm_width)))
    return mp.a0 / mp.g * ((1.0 - s) * f1 + s * mp.perm_jump * f3)


def dehydration_equilibrium(theta, mp: MaterialParams = DEFAULT_PARAMS):
    """Equilibrium mass of dehydrated water d_eq(theta), kg/m^3.

    Zero up to ``d_eq_onset``, linear growth to ``d_eq_scale`` at
    ``d_eq_full`` and constant beyond.  Both corners are rounded over
    ``d_eq_smoothing`` kelvin above the knot with a smoothstep slope blend, so d_eq is
    C^2, exactly zero below onset and bounded by d_eq_scale.
    """
    th = _as_array(theta, "theta")
    _check_temperature(th)
    return _result(_d_eq(th, mp), theta)


def _smooth_ramp(u, width):
    t = np.clip(u / width, 0.0, 1.0)
    inner = width * (2.5 * t**4 - 3.0 * t**5 + t**6)
    return np.where(u <= 0, 0.0, np.where(u < width, inner, u - width / 2))


def _d_eq(theta, mp):
    if np.max(theta) <= mp.d_eq_onset:
        return np.zeros_like(theta, dtype=float)
    span = mp.d_eq_full - mp.d_eq_onset
    r = (_smooth_ramp(theta - mp.d_eq_onset, mp.d_eq_smoothing)
         - _smooth_ramp(theta - mp.d_eq_full, mp.d_eq_smoothing))
    return np.clip(mp.d_eq_scale * r / span, 0.0, mp.d_eq_scale)


def transformed_coefficients(theta, w, mp: MaterialParams = DEFAULT_PARAMS) -> TransformedCoefficients:
    """Clamped coefficients (delta_w, delta_theta, lam) of the two-field system."""
    th = _as_array(theta, "theta")
    ww = _as_array(w, "w")
    _check_temperature(th)
    th, ww = np.broadcast_arrays(th.astype(float), ww.astype(float))
    p, dp_dt, dp_dw = _pressure_and_partials(th, ww, mp)
    return _coefficients_from_pressure(th, p, dp_dt, dp_dw, mp)


def _coefficients_from_pressure(theta, p, dp_dt, dp_dw, mp):
    p_pos = np.maximum(p, 0.0)
    psat = _psat(theta)
    kappa = _permeability(theta, p_pos, mp, psat)
    raw_w = kappa * dp_dw
    raw_t = kappa * dp_dt
    raw_l = _conductivity_raw(theta, p_pos, mp, psat)
    dw = np.clip(raw_w, mp.delta_min, mp.delta_max)
    dt = np.clip(raw_t, mp.delta_min, mp.delta_max)
    lam = np.clip(raw_l, mp.lambda_min, mp.lambda_max)
    n_clamped = int(np.count_nonzero(dw != raw_w) + np.count_nonzero(dt != raw_t)
                    + np.count_nonzero(lam != raw_l))
    return TransformedCoefficients(dw, dt, lam, n_clamped, 3 * dw.size)


def state_properties(theta, w, mp: MaterialParams = DEFAULT_PARAMS):
    """Pressure, its partials and the clamped coefficients in one pass.

    Used by the solver to avoid evaluating the isotherm twice per step.
    Returns ``(P, dP/dtheta, dP/dw, TransformedCoefficients)``.
    """
    th = np.asarray(theta, dtype=float)
    ww = np.asarray(w, dtype=float)
    p, dp_dt, dp_dw = _pressure_and_partials(th, ww, mp)
    return p, dp_dt, dp_dw, _coefficients_from_pressure(th, p, dp_dt, dp_dw, mp)
