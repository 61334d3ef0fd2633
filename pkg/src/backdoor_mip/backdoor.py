"""Candidate pseudo-backdoor sampling and priority translation.

Candidates are drawn without replacement, with per-variable probability
proportional to root-LP fractionality (epsilon-smoothed so all-integral
roots degrade to uniform sampling).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .bnb import PriorityMap
from .lp import LpSolution, LpStatus, fractionality
from .mip import MipInstance

_EPS = 1e-6


@dataclass(frozen=True)
class CandidateSet:
    instance_id: str
    vars: tuple[int, ...]
    source_seed: int

    def __post_init__(self):
        if len(self.vars) == 0:
            raise ValueError("a candidate set must contain at least one variable")
        if len(set(self.vars)) != len(self.vars):
            raise ValueError("candidate set contains duplicates")
        object.__setattr__(self, "vars", tuple(sorted(self.vars)))


def candidate_size(num_integer: int, size_fraction: float) -> int:
    """ceil(size_fraction * |I|), at least 1."""
    return max(1, math.ceil(size_fraction * num_integer))


def sample_candidates(
    instance: MipInstance,
    root_lp: LpSolution,
    count: int,
    size_fraction: float,
    rng_seed: int,
) -> list[CandidateSet]:
    """Sample `count` candidate sets of size ceil(size_fraction*|I|).

    Each set is built by successive draws without replacement with
    probability proportional to fractionality(x_i) + eps. Deterministic for
    a fixed seed; distinct sets may coincide.
    """
    if root_lp.status is not LpStatus.OPTIMAL:
        raise ValueError("candidate sampling needs an Optimal root LP")
    if not 0 < size_fraction <= 1:
        raise ValueError("size_fraction must lie in (0, 1]")
    members = np.array(instance.integer_set, dtype=np.int64)
    if members.size == 0:
        raise ValueError("instance has no integer variables to sample from")
    weights = np.array([fractionality(float(root_lp.x[i])) for i in members]) + _EPS
    size = min(candidate_size(members.size, size_fraction), members.size)

    rng = np.random.default_rng(rng_seed)
    out = []
    for _ in range(count):
        w = weights.copy()
        chosen = []
        for _ in range(size):
            p = w / w.sum()
            pick = int(rng.choice(members.size, p=p))
            chosen.append(int(members[pick]))
            w[pick] = 0.0
        out.append(CandidateSet(instance_id=instance.id, vars=tuple(chosen), source_seed=rng_seed))
    return out


def priorities_from(candidate: CandidateSet, n: int) -> PriorityMap:
    """Priority 1 on candidate members, 0 elsewhere."""
    p = np.zeros(n, dtype=np.int64)
    for i in candidate.vars:
        if not 0 <= i < n:
            raise ValueError(f"candidate variable {i} outside [0, {n})")
        p[i] = 1
    return PriorityMap(p)


def write_candidates(instance_id: str, seed: int, sets: list[CandidateSet]) -> bytes:
    doc = {"instance_id": instance_id, "seed": seed, "sets": [list(s.vars) for s in sets]}
    return (json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n").encode()


def read_candidates(data: bytes) -> list[CandidateSet]:
    try:
        doc = json.loads(data.decode("utf-8"))
        return [
            CandidateSet(instance_id=doc["instance_id"], vars=tuple(s), source_seed=doc["seed"])
            for s in doc["sets"]
        ]
    except (json.JSONDecodeError, UnicodeDecodeError, KeyError, TypeError) as exc:
        raise ValueError(f"malformed candidate file: {exc!r}") from exc
