"""Independent reference computations used to check the production code."""
from __future__ import annotations

import numpy as np

from ..materials import DEFAULT_PARAMS, MaterialParams, dehydration_equilibrium

# Saturation pressure of water from the IAPWS-IF97 steam tables, (K, Pa).
STEAM_TABLE = (
    (283.15, 1228.2),
    (293.15, 2339.3),
    (303.15, 4246.9),
    (313.15, 7384.9),
    (323.15, 12352.0),
    (333.15, 19946.0),
    (343.15, 31201.0),
    (353.15, 47414.0),
    (363.15, 70182.0),
    (373.15, 101418.0),
    (423.15, 476160.0),
    (473.15, 1554900.0),
    (523.15, 3976200.0),
    (573.15, 8587900.0),
    (623.15, 16529000.0),
)


def dehydration_oracle(theta_of_t, t_end: float, tau: float, n_substeps: int = 100_000,
                       mp: MaterialParams = DEFAULT_PARAMS, d0: float = 0.0) -> float:
    """Classical RK4 integration of d' = -(d - d_eq(theta(t))) / tau."""
    if n_substeps < 10_000:
        raise ValueError("n_substeps must be at least 1e4")
    h = t_end / n_substeps
    # d_eq along the trajectory at every half step, evaluated in one call
    ts = np.linspace(0.0, t_end, 2 * n_substeps + 1)
    forcing = np.asarray(dehydration_equilibrium(np.asarray(theta_of_t(ts), dtype=float), mp))
    d = float(d0)
    inv = 1.0 / tau
    for i in range(n_substeps):
        f0, fm, f1 = forcing[2 * i], forcing[2 * i + 1], forcing[2 * i + 2]
        k1 = -(d - f0) * inv
        k2 = -(d + 0.5 * h * k1 - fm) * inv
        k3 = -(d + 0.5 * h * k2 - fm) * inv
        k4 = -(d + h * k3 - f1) * inv
        d += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return d


def central_difference(f, x, step):
    """Second-order central difference of a scalar function."""
    return (f(x + step) - f(x - step)) / (2.0 * step)
