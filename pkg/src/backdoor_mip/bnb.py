"""Branch-and-bound MIP solver honoring per-variable branching priorities.

Best-bound node selection, ties by node id; branching picks the fractional
integer variable maximal under (priority, fractionality, -index). No cuts,
presolve, or heuristics, so node counts are a pure function of the
branching order.
"""

from __future__ import annotations

import heapq
import json
import math
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .lp import DenseLp, LpStatus, fractionality
from .mip import MipInstance, validate


@dataclass(frozen=True)
class PriorityMap:
    """Per-variable branching priorities; candidate-set members get 1, rest 0."""

    priority: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "priority", np.asarray(self.priority, dtype=np.int64))

    @classmethod
    def zeros(cls, n: int) -> "PriorityMap":
        return cls(np.zeros(n, dtype=np.int64))


class BnbStatus(Enum):
    OPTIMAL = "Optimal"
    NODE_LIMIT = "NodeLimit"
    TIME_LIMIT = "TimeLimit"
    INFEASIBLE = "Infeasible"


class Measure(Enum):
    NODE_COUNT = "NodeCount"
    WALL_SECONDS = "WallSeconds"


@dataclass(frozen=True)
class BnbConfig:
    integrality_tolerance: float = 1e-6
    node_limit: int = 1_000_000
    wall_time_limit: float | None = None
    measure: Measure = Measure.NODE_COUNT

    def __post_init__(self):
        if self.node_limit < 1:
            raise ValueError("node_limit must be >= 1")


@dataclass(frozen=True)
class BranchLogEntry:
    node_id: int
    var: int
    lp_value: float
    #: fractional integer variables at the node, as (index, fractionality)
    candidates: tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class BnbResult:
    status: BnbStatus
    x: np.ndarray | None
    objective: float | None
    best_bound: float
    node_count: int
    measure_value: float
    branch_log: tuple[BranchLogEntry, ...]


def select_branch_var(x, integer_set, priorities: PriorityMap, tolerance: float) -> int | None:
    """Branching variable: None iff integral; else max (priority, fractionality, -index)."""
    best = None
    best_key = None
    for i in integer_set:
        frac = fractionality(float(x[i]))
        if frac <= tolerance:
            continue
        key = (priorities.priority[i], frac, -i)
        if best_key is None or key > best_key:
            best_key = key
            best = i
    return best


def _fractional_candidates(x, integer_set, tolerance):
    return tuple((i, fractionality(float(x[i]))) for i in integer_set if fractionality(float(x[i])) > tolerance)


def solve_mip(
    instance: MipInstance,
    priorities: PriorityMap | None = None,
    config: BnbConfig = BnbConfig(),
    log_path=None,
) -> BnbResult:
    """Solve the MIP to optimality (or a limit status) by branch and bound.

    Deterministic for fixed inputs: best-bound node selection with ties by
    node id, up-branch children created first.
    """
    problems = validate(instance)
    if problems:
        raise ValueError("invalid instance: " + "; ".join(problems))
    if priorities is None:
        priorities = PriorityMap.zeros(instance.n)
    if priorities.priority.shape != (instance.n,):
        raise ValueError("priority vector length mismatch")

    t0 = time.perf_counter()
    lp = DenseLp(instance)
    tol = config.integrality_tolerance
    integer_set = instance.integer_set

    incumbent_x = None
    incumbent_obj = -math.inf
    node_count = 0
    branch_log: list[BranchLogEntry] = []
    next_id = 1
    log_file = open(log_path, "w") if log_path is not None else None

    # heap entries: (-parent_bound, node_id, lower, upper)
    heap = [(-math.inf, 0, lp.lower.copy(), lp.upper.copy())]
    status = BnbStatus.OPTIMAL
    try:
        while heap:
            neg_bound, node_id, lo, up = heapq.heappop(heap)
            if -neg_bound <= incumbent_obj + 1e-9:
                continue
            if node_count >= config.node_limit:
                status = BnbStatus.NODE_LIMIT
                break
            if config.wall_time_limit is not None and time.perf_counter() - t0 > config.wall_time_limit:
                status = BnbStatus.TIME_LIMIT
                break

            node_count += 1
            sol = lp.solve(lo, up)
            if sol.status is not LpStatus.OPTIMAL:
                continue
            bound = sol.objective
            if bound <= incumbent_obj + 1e-9:
                continue
            branch = select_branch_var(sol.x, integer_set, priorities, tol)
            if branch is None:
                xr = sol.x.copy()
                xr[list(integer_set)] = np.round(xr[list(integer_set)])
                incumbent_x = xr
                incumbent_obj = float(instance.c @ xr)
                continue

            v = float(sol.x[branch])
            entry = BranchLogEntry(
                node_id=node_id,
                var=branch,
                lp_value=v,
                candidates=_fractional_candidates(sol.x, integer_set, tol),
            )
            branch_log.append(entry)
            if log_file is not None:
                log_file.write(
                    json.dumps(
                        {
                            "node": node_id,
                            "var": branch,
                            "lp_value": v,
                            "bound": bound,
                            "candidates": [[i, f] for i, f in entry.candidates],
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )

            # up branch first: lower ids are explored first on bound ties
            up_lo = lo.copy()
            up_lo[branch] = math.ceil(v)
            heapq.heappush(heap, (-bound, next_id, up_lo, up))
            next_id += 1
            dn_up = up.copy()
            dn_up[branch] = math.floor(v)
            heapq.heappush(heap, (-bound, next_id, lo, dn_up))
            next_id += 1
    finally:
        if log_file is not None:
            log_file.close()

    if status is BnbStatus.OPTIMAL:
        if incumbent_x is None:
            status = BnbStatus.INFEASIBLE
            best_bound = -math.inf
        else:
            best_bound = incumbent_obj
    else:
        open_bounds = [-nb for nb, *_ in heap]
        best_bound = max([incumbent_obj] + open_bounds) if (incumbent_x is not None or open_bounds) else -math.inf

    elapsed = time.perf_counter() - t0
    measure_value = float(node_count) if config.measure is Measure.NODE_COUNT else elapsed
    return BnbResult(
        status=status,
        x=incumbent_x,
        objective=incumbent_obj if incumbent_x is not None else None,
        best_bound=best_bound,
        node_count=node_count,
        measure_value=measure_value,
        branch_log=tuple(branch_log),
    )
