"""Fire scenarios and the boundary fluxes of the exposed face.

Every scenario maps time in seconds to an absolute gas temperature.  The
exposed face exchanges heat and moisture with the gas through

    vartheta(t)  = alpha_c * theta_inf(t) + e * sigma * theta_inf(t)**4
    heat out     = (alpha_c + e * sigma * |theta|**3) * theta - vartheta(t)
    moisture out = beta_c * (P(theta, w) - P_inf)

The Eurocode formulas work in minutes or hours; the conversion happens
inside each ``gas_temperature`` so callers always pass seconds.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import DomainError
from .materials import DEFAULT_PARAMS, MaterialParams, sorption_pressure

log = logging.getLogger(__name__)

T_AMBIENT = 293.15
SIGMA = 5.67e-8  # W/(m^2 K^4)

ALPHA_ISO = 25.0
ALPHA_HC = 50.0
ALPHA_PARAM = 35.0

# growth-rate dependent limiting times of the parametric curve, minutes
T_LIM_MIN = {"slow": 25.0, "medium": 20.0, "fast": 15.0}


def _check_time(t):
    a = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(a)) or np.any(a < 0):
        raise DomainError("time must be finite and non-negative")
    return a


def _ret(values, t):
    return float(values) if np.ndim(t) == 0 else values


@dataclass(frozen=True)
class FireScenario:
    """Base class; subclasses implement :meth:`gas_temperature`."""

    kind = "abstract"
    default_alpha_c = ALPHA_ISO

    def gas_temperature(self, t):
        raise NotImplementedError

    def __call__(self, t):
        return self.gas_temperature(t)

    def describe(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class ISO834(FireScenario):
    """Standard cellulosic curve: 20 + 345 log10(8 t_min + 1) C."""

    kind = "iso"

    def gas_temperature(self, t):
        a = _check_time(t)
        return _ret(T_AMBIENT + 345.0 * np.log10(8.0 * a / 60.0 + 1.0), t)


@dataclass(frozen=True)
class Hydrocarbon(FireScenario):
    """Hydrocarbon curve: 20 + 1080 (1 - 0.325 e^-0.167t - 0.675 e^-2.5t) C."""

    kind = "hc"
    default_alpha_c = ALPHA_HC

    def gas_temperature(self, t):
        a = _check_time(t) / 60.0
        rise = 1080.0 * (1.0 - 0.325 * np.exp(-0.167 * a) - 0.675 * np.exp(-2.5 * a))
        return _ret(T_AMBIENT + rise, t)


@dataclass(frozen=True)
class ConstantAmbient(FireScenario):
    """Constant gas temperature; handy for equilibrium and regression runs."""

    temperature: float = T_AMBIENT
    kind = "constant"

    def __post_init__(self):
        if not (np.isfinite(self.temperature) and self.temperature > 0):
            raise DomainError("constant ambient temperature must be positive")

    def gas_temperature(self, t):
        a = _check_time(t)
        return _ret(np.full_like(a, self.temperature, dtype=float), t)

    def describe(self) -> dict:
        d = super().describe()
        d["temperature"] = self.temperature
        return d


@dataclass(frozen=True)
class Parametric(FireScenario):
    """Eurocode parametric compartment fire (heating and linear cooling).

    Parameters
    ----------
    q_td : design fire load density related to the enclosure area, MJ/m^2
    opening : opening factor O, m^(1/2)
    b : thermal absorptivity of the enclosure, J/(m^2 s^(1/2) K)
    growth : 'slow', 'medium' or 'fast'; sets the limiting time t_lim
    """

    q_td: float = 160.0
    opening: float = 0.12
    b: float = 1000.0
    growth: str = "medium"
    _derived: dict = field(default=None, init=False, repr=False, compare=False)

    kind = "pm"
    default_alpha_c = ALPHA_PARAM

    def __post_init__(self):
        if self.growth not in T_LIM_MIN:
            raise DomainError(f"growth must be one of {sorted(T_LIM_MIN)}, got {self.growth!r}")
        for name in ("q_td", "opening", "b"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        object.__setattr__(self, "_derived", self._derive())
        d = self._derived
        log.info("parametric fire: t_max=%.4f h (%s-controlled), peak %.1f C",
                 d["t_max_h"], d["regime"], d["peak_C"])

    def _derive(self):
        gamma = ((self.opening / self.b) / (0.04 / 1160.0)) ** 2
        t_lim = T_LIM_MIN[self.growth] / 60.0
        t_vent = 0.2e-3 * self.q_td / self.opening
        if t_vent >= t_lim:
            regime, t_max, gamma_heat = "ventilation", t_vent, gamma
        else:
            regime, t_max = "fuel", t_lim
            o_lim = 0.1e-3 * self.q_td / t_lim
            gamma_heat = ((o_lim / self.b) / (0.04 / 1160.0)) ** 2
            if self.opening > 0.04 and self.q_td < 75 and self.b < 1160:
                k = 1.0 + ((self.opening - 0.04) / 0.04) * ((self.q_td - 75) / 75) \
                    * ((1160 - self.b) / 1160)
                gamma_heat *= k
        t_star_max = t_vent * gamma
        x = 1.0 if regime == "ventilation" else t_lim * gamma / t_star_max
        peak_c = float(self._heating_c(t_max * gamma_heat))
        return {"gamma": gamma, "gamma_heat": gamma_heat, "t_max_h": t_max, "t_lim_h": t_lim,
                "t_star_max": t_star_max, "x": x, "regime": regime, "peak_C": peak_c}

    @staticmethod
    def _heating_c(t_star):
        return 20.0 + 1325.0 * (1.0 - 0.324 * np.exp(-0.2 * t_star)
                                - 0.204 * np.exp(-1.7 * t_star) - 0.472 * np.exp(-19.0 * t_star))

    @property
    def t_max_seconds(self) -> float:
        return self._derived["t_max_h"] * 3600.0

    @property
    def peak_temperature(self) -> float:
        return self._derived["peak_C"] + 273.15

    def gas_temperature(self, t):
        a = _check_time(t)
        d = self._derived
        t_h = a / 3600.0
        heat = self._heating_c(t_h * d["gamma_heat"]) + 273.15
        tsm = d["t_star_max"]
        if tsm <= 0.5:
            rate = 625.0
        elif tsm < 2.0:
            rate = 250.0 * (3.0 - tsm)
        else:
            rate = 250.0
        t_star = t_h * d["gamma"]
        cool = d["peak_C"] + 273.15 - rate * (t_star - tsm * d["x"])
        out = np.where(t_h <= d["t_max_h"], heat, np.maximum(cool, T_AMBIENT))
        return _ret(out, t)

    def describe(self) -> dict:
        d = super().describe()
        d.update(q_td=self.q_td, opening=self.opening, b=self.b, growth=self.growth,
                 t_max_s=self.t_max_seconds, regime=self._derived["regime"])
        return d


SCENARIOS = {"iso": ISO834, "hc": Hydrocarbon, "pm": Parametric, "constant": ConstantAmbient}


def make_scenario(kind: str, **kwargs) -> FireScenario:
    """Build a scenario by short name; unknown names raise DomainError."""
    try:
        cls = SCENARIOS[kind.lower()]
    except KeyError:
        raise DomainError(f"unknown fire scenario {kind!r}; choose from {sorted(SCENARIOS)}") from None
    return cls(**kwargs)


@dataclass(frozen=True)
class BoundaryParams:
    """Constants of the exposed-face heat and moisture exchange."""

    alpha_c: float = ALPHA_ISO
    beta_c: float = 0.019
    e: float = 0.7
    sigma: float = SIGMA
    P_inf: float = 1754.2

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (np.isfinite(v) and v > 0):
                raise DomainError(f"BoundaryParams.{f.name} must be positive, got {v!r}")

    @classmethod
    def for_scenario(cls, scenario: FireScenario, **overrides) -> "BoundaryParams":
        """Defaults with the film coefficient keyed to the scenario."""
        overrides.setdefault("alpha_c", scenario.default_alpha_c)
        return cls(**overrides)


def ambient_temperature(scenario: FireScenario, t):
    """Gas temperature theta_inf(t) in K; t in seconds, must be >= 0."""
    return scenario.gas_temperature(t)


def thermal_load(scenario: FireScenario, bp: BoundaryParams, t):
    """Radiative-convective forcing vartheta(t) in W/m^2."""
    th = scenario.gas_temperature(t)
    return bp.alpha_c * th + bp.e * bp.sigma * th**4


def heat_flux_out(theta_surf, bp: BoundaryParams, scenario: FireScenario, t):
    """Outward heat flux (W/m^2); negative while the gas heats the wall."""
    th = np.asarray(theta_surf, dtype=float)
    if not np.all(np.isfinite(th)):
        raise DomainError("surface temperature must be finite")
    out = (bp.alpha_c + bp.e * bp.sigma * np.abs(th) ** 3) * th - thermal_load(scenario, bp, t)
    return float(out) if np.ndim(theta_surf) == 0 and np.ndim(t) == 0 else out


def moisture_flux_out(theta_surf, w_surf, bp: BoundaryParams, mp: MaterialParams = DEFAULT_PARAMS):
    """Outward moisture flux beta_c (P - P_inf) in kg/(m^2 s)."""
    return bp.beta_c * (sorption_pressure(theta_surf, w_surf, mp) - bp.P_inf)


def max_thermal_load(scenario: FireScenario, bp: BoundaryParams, t_end: float, n: int = 2001) -> float:
    """Sampled maximum of vartheta over [0, t_end]."""
    ts = np.linspace(0.0, t_end, n)
    return float(np.max(thermal_load(scenario, bp, ts)))
