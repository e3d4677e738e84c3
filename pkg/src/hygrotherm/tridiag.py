"""Tridiagonal systems and their direct solution.

``thomas`` is the textbook forward-elimination/back-substitution sweep.
``solve_tridiagonal`` hands the same elimination to LAPACK's ``gtsv``, which
performs no row exchanges on the diagonally dominant systems the solver
assembles, and adds the pivot and residual checks.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg.lapack import dgtsv

from .errors import SolverError


@dataclass
class TridiagonalSystem:
    """Bands of ``A x = rhs``: ``lower[i] = A[i, i-1]``, ``upper[i] = A[i, i+1]``.

    ``lower[0]`` and ``upper[-1]`` are ignored.
    """

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray
    last_residual: float = float("nan")

    @classmethod
    def zeros(cls, n: int) -> "TridiagonalSystem":
        return cls(np.zeros(n), np.zeros(n), np.zeros(n), np.zeros(n))

    @property
    def size(self) -> int:
        return self.diag.size

    def matvec(self, x):
        y = self.diag * x
        y[1:] += self.lower[1:] * x[:-1]
        y[:-1] += self.upper[:-1] * x[1:]
        return y

    def residual(self, x) -> float:
        return float(np.max(np.abs(self.matvec(x) - self.rhs)))

    def to_dense(self):
        n = self.size
        a = np.diag(self.diag)
        a[np.arange(1, n), np.arange(n - 1)] = self.lower[1:]
        a[np.arange(n - 1), np.arange(1, n)] = self.upper[:-1]
        return a

    def is_diagonally_dominant(self) -> bool:
        off = np.abs(self.lower) + np.abs(self.upper)
        off[0] -= abs(self.lower[0])
        off[-1] -= abs(self.upper[-1])
        return bool(np.all(np.abs(self.diag) >= off))


def solve_tridiagonal(system: TridiagonalSystem, check: bool = True) -> np.ndarray:
    """Solve ``A x = rhs``.

    Raises SolverError on a zero pivot, or when ``check`` is set and the
    residual exceeds ``1e-10 (|rhs|_inf + 1)``.
    """
    if system.size == 1:
        return thomas(system, check)
    _, _, _, x, info = dgtsv(system.lower[1:], system.diag, system.upper[:-1], system.rhs)
    if info != 0:
        raise SolverError(f"zero pivot in row {info - 1}", report={"system": _dump(system)})
    if check:
        _check_residual(system, x)
    return x


def _check_residual(system, x):
    res = system.residual(x)
    system.last_residual = res
    bound = 1e-10 * (float(np.max(np.abs(system.rhs))) + 1.0)
    if not res <= bound:
        raise SolverError(f"tridiagonal residual {res:.3e} exceeds {bound:.3e}",
                          report={"system": _dump(system), "residual": res})


def thomas(system: TridiagonalSystem, check: bool = True) -> np.ndarray:
    """Thomas algorithm without pivoting (reference implementation)."""
    a = system.lower.tolist()
    b = system.diag.tolist()
    c = system.upper.tolist()
    r = system.rhs.tolist()
    n = len(b)
    cp = [0.0] * n
    rp = [0.0] * n
    pivot = b[0]
    if pivot == 0.0:
        raise SolverError("zero pivot in row 0", report={"system": _dump(system)})
    cp[0] = c[0] / pivot
    rp[0] = r[0] / pivot
    for i in range(1, n):
        pivot = b[i] - a[i] * cp[i - 1]
        if pivot == 0.0:
            raise SolverError(f"zero pivot in row {i}", report={"system": _dump(system)})
        cp[i] = c[i] / pivot
        rp[i] = (r[i] - a[i] * rp[i - 1]) / pivot
    x = [0.0] * n
    x[-1] = rp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = rp[i] - cp[i] * x[i + 1]
    out = np.array(x)
    if check:
        _check_residual(system, out)
    return out


def _dump(system):
    return {k: getattr(system, k).tolist() for k in ("lower", "diag", "upper", "rhs")}
