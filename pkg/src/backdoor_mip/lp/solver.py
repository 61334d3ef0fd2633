"""Public LP interface on top of the simplex kernels."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..mip import SENSE_EQ, SENSE_GE, SENSE_LE, MipInstance, validate
from . import kernel_py

_FORCE_PY = os.environ.get("BACKDOOR_MIP_PURE_PYTHON", "") not in ("", "0")

if not _FORCE_PY:
    try:
        from . import _simplex_core as _kernel  # type: ignore[attr-defined]

        _KERNEL_NAME = "cython"
    except ImportError:
        _kernel = kernel_py
        _KERNEL_NAME = "python"
else:
    _kernel = kernel_py
    _KERNEL_NAME = "python"


def kernel_name() -> str:
    """Which simplex kernel is active: 'cython' or 'python'."""
    return _KERNEL_NAME


class LpStatus(Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


class IterationLimitError(RuntimeError):
    """The simplex hit its iteration cap before reaching a conclusive status."""

    def __init__(self, iterations: int):
        super().__init__(f"simplex iteration limit reached after {iterations} iterations")
        self.iterations = iterations


BASIS_BASIC = 0
BASIS_AT_LOWER = 1
BASIS_AT_UPPER = 2


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    x: np.ndarray | None
    duals: np.ndarray | None
    basis_status: np.ndarray | None
    objective: float | None
    iterations: int


_SENSE_CODE = {SENSE_LE: 0, SENSE_GE: 1, SENSE_EQ: 2}


class DenseLp:
    """Dense snapshot of an instance's LP relaxation, reusable across bound overrides.

    Branch and bound solves the same matrix thousands of times with tightened
    bounds; building the dense form once is the point of this class.
    """

    def __init__(self, instance: MipInstance):
        m, n = instance.num_rows, instance.n
        self.A = np.zeros((m, n))
        self.senses = np.empty(m, dtype=np.int8)
        self.b = np.empty(m)
        for j, row in enumerate(instance.rows):
            for var, coef in row.coeffs:
                self.A[j, var] = coef
            self.senses[j] = _SENSE_CODE[row.sense]
            self.b[j] = row.rhs
        self.c = instance.c.copy()
        self.lower = instance.lower.copy()
        self.upper = instance.upper.copy()
        self.n = n
        self.m = m

    def solve(self, lower=None, upper=None, max_iter: int | None = None) -> LpSolution:
        lo = self.lower if lower is None else lower
        up = self.upper if upper is None else upper
        if max_iter is None:
            max_iter = 200 * (self.n + self.m) + 2000
        status, x, duals, basis_status, objective, iters = _kernel.solve_kernel(
            self.A, self.senses, self.b, self.c, np.asarray(lo, float), np.asarray(up, float), max_iter
        )
        if status == kernel_py.STATUS_ITERATION_LIMIT:
            raise IterationLimitError(iters)
        if status == kernel_py.STATUS_OPTIMAL:
            return LpSolution(
                status=LpStatus.OPTIMAL,
                x=np.asarray(x),
                duals=np.asarray(duals),
                basis_status=np.asarray(basis_status),
                objective=float(objective),
                iterations=iters,
            )
        st = LpStatus.INFEASIBLE if status == kernel_py.STATUS_INFEASIBLE else LpStatus.UNBOUNDED
        return LpSolution(status=st, x=None, duals=None, basis_status=None, objective=None, iterations=iters)


def solve_lp(
    instance: MipInstance,
    extra_bounds: dict[int, tuple[float, float]] | None = None,
    max_iter: int | None = None,
) -> LpSolution:
    """Solve the LP relaxation, optionally overriding per-variable bounds.

    Overrides must lie within the instance's original bounds (tightenings).
    """
    problems = validate(instance)
    if problems:
        raise ValueError("invalid instance: " + "; ".join(problems))
    lp = DenseLp(instance)
    lo, up = lp.lower.copy(), lp.upper.copy()
    if extra_bounds:
        for var, (vlo, vhi) in extra_bounds.items():
            if vlo < lp.lower[var] - 1e-12 or vhi > lp.upper[var] + 1e-12:
                raise ValueError(f"override for variable {var} widens the original bounds")
            lo[var], up[var] = vlo, vhi
    return lp.solve(lo, up, max_iter=max_iter)


def fractionality(value: float) -> float:
    """Distance to the nearest integer, in [0, 0.5]."""
    if not math.isfinite(value):
        raise ValueError("fractionality needs a finite value")
    frac = value - math.floor(value)
    return min(frac, 1.0 - frac)
