"""LP relaxation solving.

Exposes :func:`solve_lp`, :func:`fractionality`, and :class:`LpSolution`.
The simplex inner loop runs on the compiled Cython kernel when available,
else on the pure NumPy kernel; set ``BACKDOOR_MIP_PURE_PYTHON=1`` to force
the fallback.
"""

from .solver import (
    BASIS_AT_LOWER,
    BASIS_AT_UPPER,
    BASIS_BASIC,
    DenseLp,
    IterationLimitError,
    LpSolution,
    LpStatus,
    fractionality,
    kernel_name,
    solve_lp,
)

__all__ = [
    "BASIS_AT_LOWER",
    "BASIS_AT_UPPER",
    "BASIS_BASIC",
    "DenseLp",
    "IterationLimitError",
    "LpSolution",
    "LpStatus",
    "fractionality",
    "kernel_name",
    "solve_lp",
]
