"""Bipartite variable/constraint graph encoding of (instance, candidate set).

Variable features (7): normalized objective coefficient, root-LP value,
fractionality, basis one-hot (basic / at-lower / at-upper), candidate flag.
Constraint features (5): normalized rhs, normalized dual, sense one-hot
(<=, >=, =). Edges carry the constraint coefficient normalized by the
instance-wide max |A_ij|.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backdoor import CandidateSet
from .lp import BASIS_AT_LOWER, BASIS_AT_UPPER, BASIS_BASIC, LpSolution, LpStatus, fractionality
from .mip import SENSE_EQ, SENSE_GE, SENSE_LE, MipInstance

FEATURE_SCHEMA_VERSION = 1

NUM_VAR_FEATURES = 7
NUM_CONS_FEATURES = 5
VAR_FEAT_BACKDOOR = 6  # candidate-flag column


@dataclass(frozen=True)
class BipartiteGraph:
    var_features: np.ndarray  # [n, 7]
    cons_features: np.ndarray  # [m, 5]
    edges: np.ndarray  # [num_edges, 3]: var index, cons index, normalized coefficient
    feature_schema_version: int = FEATURE_SCHEMA_VERSION

    @property
    def num_vars(self) -> int:
        return self.var_features.shape[0]

    @property
    def num_cons(self) -> int:
        return self.cons_features.shape[0]


def _max_abs(values: np.ndarray) -> float:
    m = float(np.max(np.abs(values))) if values.size else 0.0
    return m if m > 0 else 1.0


_SENSE_ONEHOT = {SENSE_LE: (1.0, 0.0, 0.0), SENSE_GE: (0.0, 1.0, 0.0), SENSE_EQ: (0.0, 0.0, 1.0)}


def encode(instance: MipInstance, root_lp: LpSolution, candidate: CandidateSet) -> BipartiteGraph:
    """Encode (instance, root LP, candidate) as a featurized bipartite graph."""
    if root_lp.status is not LpStatus.OPTIMAL:
        raise ValueError("encoding needs an Optimal root LP")
    if candidate.instance_id != instance.id:
        raise ValueError(
            f"candidate belongs to instance {candidate.instance_id!r}, not {instance.id!r}"
        )
    n, m = instance.n, instance.num_rows

    c_scale = _max_abs(instance.c)
    in_set = np.zeros(n)
    in_set[list(candidate.vars)] = 1.0
    vf = np.zeros((n, NUM_VAR_FEATURES))
    vf[:, 0] = instance.c / c_scale
    vf[:, 1] = root_lp.x
    vf[:, 2] = [fractionality(float(v)) for v in root_lp.x]
    vf[np.arange(n), 3 + np.where(
        root_lp.basis_status == BASIS_BASIC, 0, np.where(root_lp.basis_status == BASIS_AT_LOWER, 1, 2)
    )] = 1.0
    vf[:, VAR_FEAT_BACKDOOR] = in_set

    rhs = np.array([row.rhs for row in instance.rows])
    rhs_scale = _max_abs(rhs)
    dual_scale = _max_abs(root_lp.duals)
    cf = np.zeros((m, NUM_CONS_FEATURES))
    if m:
        cf[:, 0] = rhs / rhs_scale
        cf[:, 1] = root_lp.duals / dual_scale
        for j, row in enumerate(instance.rows):
            cf[j, 2:5] = _SENSE_ONEHOT[row.sense]

    all_coefs = np.array([a for row in instance.rows for _, a in row.coeffs])
    a_scale = _max_abs(all_coefs)
    edges = np.array(
        [[float(i), float(j), a / a_scale] for j, row in enumerate(instance.rows) for i, a in row.coeffs]
    ).reshape(-1, 3)

    return BipartiteGraph(var_features=vf, cons_features=cf, edges=edges)
