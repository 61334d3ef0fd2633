"""MIP data model, validation, GISP instance generation, and instance file I/O.

Instances are always stored in maximization form. The instance file format
is a versioned JSON schema (see :func:`write_instance`).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

SCHEMA_VERSION = 1

SENSE_LE = "<="
SENSE_GE = ">="
SENSE_EQ = "="
SENSES = (SENSE_LE, SENSE_GE, SENSE_EQ)


class InstanceFormatError(ValueError):
    """Raised when an instance file cannot be parsed or fails schema checks."""


@dataclass(frozen=True)
class Row:
    """One linear constraint: sparse coefficients, a sense, and a right-hand side."""

    coeffs: tuple[tuple[int, float], ...]
    sense: str
    rhs: float


@dataclass(frozen=True, eq=False)
class MipInstance:
    """A maximization MIP: max c'x s.t. rows, bounds, integrality on `integer_set`."""

    id: str
    n: int
    c: np.ndarray
    rows: tuple[Row, ...]
    lower: np.ndarray
    upper: np.ndarray
    integer_set: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float))
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float))
        object.__setattr__(self, "integer_set", tuple(sorted(self.integer_set)))

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MipInstance):
            return NotImplemented
        return (
            self.id == other.id
            and self.n == other.n
            and np.array_equal(self.c, other.c)
            and self.rows == other.rows
            and np.array_equal(self.lower, other.lower)
            and np.array_equal(self.upper, other.upper)
            and self.integer_set == other.integer_set
        )

    def __hash__(self):
        return hash((self.id, self.n, self.rows, self.integer_set))


def validate(instance: MipInstance) -> list[str]:
    """Return a list of invariant violations; empty iff the instance is well formed."""
    problems: list[str] = []
    n = instance.n
    for name, vec in (("c", instance.c), ("lower", instance.lower), ("upper", instance.upper)):
        if vec.shape != (n,):
            problems.append(f"{name} has shape {vec.shape}, expected ({n},)")
    for j, row in enumerate(instance.rows):
        seen: set[int] = set()
        for var, coef in row.coeffs:
            if not 0 <= var < n:
                problems.append(f"row {j} references variable {var} outside [0, {n})")
            if var in seen:
                problems.append(f"row {j} has duplicate coefficient for variable {var}")
            seen.add(var)
            if not math.isfinite(coef):
                problems.append(f"row {j} has non-finite coefficient for variable {var}")
        if row.sense not in SENSES:
            problems.append(f"row {j} has unknown sense {row.sense!r}")
        if not math.isfinite(row.rhs):
            problems.append(f"row {j} has non-finite rhs")
    for i in instance.integer_set:
        if not 0 <= i < n:
            problems.append(f"integer set references variable {i} outside [0, {n})")
    if len(set(instance.integer_set)) != len(instance.integer_set):
        problems.append("integer set contains duplicates")
    if instance.lower.shape == (n,) and instance.upper.shape == (n,):
        bad = np.nonzero(instance.lower > instance.upper)[0]
        for i in bad:
            problems.append(f"variable {i} has lower bound above upper bound")
    return problems


@dataclass(frozen=True)
class GispConfig:
    """Generator settings for a generalized-independent-set instance.

    ``removable_fraction`` is the share of edges that receive a removal
    variable; the rest become hard conflict constraints. With 1.0 every edge
    is removable and the LP relaxation of the result is integral, so presets
    use 0.25 to obtain instances that actually branch.
    """

    num_vertices: int
    edge_probability: float
    vertex_revenue: float = 100.0
    edge_cost: float = 1.0
    seed: int = 0
    removable_fraction: float = 1.0

    def check(self) -> None:
        if self.num_vertices < 1:
            raise ValueError("num_vertices must be >= 1")
        if not 0.0 <= self.edge_probability <= 1.0:
            raise ValueError("edge_probability must lie in [0, 1]")
        if self.vertex_revenue <= 0 or self.edge_cost <= 0:
            raise ValueError("vertex_revenue and edge_cost must be positive")
        if not 0.0 <= self.removable_fraction <= 1.0:
            raise ValueError("removable_fraction must lie in [0, 1]")


#: Desk-scale hardness presets. Sizes are small enough that a full data
#: collection run finishes in minutes with the built-in solver.
GISP_PRESETS: dict[str, dict] = {
    "toy": dict(num_vertices=14, edge_probability=0.45, removable_fraction=0.25),
    "easy": dict(num_vertices=22, edge_probability=0.35, removable_fraction=0.25),
    "hard": dict(num_vertices=32, edge_probability=0.30, removable_fraction=0.25),
}


def preset_config(preset: str, seed: int) -> GispConfig:
    if preset not in GISP_PRESETS:
        raise ValueError(f"unknown preset {preset!r}; choose from {sorted(GISP_PRESETS)}")
    return GispConfig(seed=seed, **GISP_PRESETS[preset])


def generate_gisp(config: GispConfig) -> MipInstance:
    """Generate a GISP instance from a seeded Erdős–Rényi graph.

    One binary x_v per vertex (objective +revenue). Each edge either gets a
    binary removal variable y_e (objective -cost) and constraint
    x_u + x_v - y_e <= 1, or, if not removable, the hard constraint
    x_u + x_v <= 1. Deterministic for a fixed config.
    """
    config.check()
    rng = np.random.default_rng(config.seed)
    nv = config.num_vertices
    edges = [(u, v) for u in range(nv) for v in range(u + 1, nv) if rng.random() < config.edge_probability]
    removable = [rng.random() < config.removable_fraction for _ in edges]

    ne_rem = sum(removable)
    n = nv + ne_rem
    c = np.concatenate([np.full(nv, config.vertex_revenue), np.full(ne_rem, -config.edge_cost)])
    rows = []
    y_index = nv
    for (u, v), rem in zip(edges, removable):
        if rem:
            coeffs = ((u, 1.0), (v, 1.0), (y_index, -1.0))
            y_index += 1
        else:
            coeffs = ((u, 1.0), (v, 1.0))
        rows.append(Row(coeffs=coeffs, sense=SENSE_LE, rhs=1.0))
    return MipInstance(
        id=f"gisp-v{nv}-p{config.edge_probability:g}-s{config.seed}",
        n=n,
        c=c,
        rows=tuple(rows),
        lower=np.zeros(n),
        upper=np.ones(n),
        integer_set=tuple(range(n)),
    )


def _num_out(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _num_in(x, where: str) -> float:
    if x in ("inf", "-inf"):
        return float(x)
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return float(x)
    raise InstanceFormatError(f"{where}: expected a number, got {x!r}")


def write_instance(instance: MipInstance) -> bytes:
    """Serialize to the version-1 JSON schema. Round-trips exactly."""
    doc = {
        "version": SCHEMA_VERSION,
        "id": instance.id,
        "n": instance.n,
        "c": [_num_out(v) for v in instance.c.tolist()],
        "bounds": [[_num_out(lo), _num_out(hi)] for lo, hi in zip(instance.lower.tolist(), instance.upper.tolist())],
        "integer": list(instance.integer_set),
        "rows": [
            {"coeffs": [[var, coef] for var, coef in row.coeffs], "sense": row.sense, "rhs": row.rhs}
            for row in instance.rows
        ],
    }
    return (json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n").encode()


def read_instance(data: bytes) -> MipInstance:
    """Parse the version-1 JSON schema; raises InstanceFormatError with diagnostics."""
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InstanceFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InstanceFormatError("top level must be a JSON object")
    version = doc.get("version")
    if version != SCHEMA_VERSION:
        raise InstanceFormatError(f"unsupported schema version {version!r}, expected {SCHEMA_VERSION}")
    try:
        n = int(doc["n"])
        rows = tuple(
            Row(
                coeffs=tuple((int(var), _num_in(a, f"rows[{j}].coeffs")) for var, a in row["coeffs"]),
                sense=str(row["sense"]),
                rhs=_num_in(row["rhs"], f"rows[{j}].rhs"),
            )
            for j, row in enumerate(doc["rows"])
        )
        instance = MipInstance(
            id=str(doc["id"]),
            n=n,
            c=np.array([_num_in(v, "c") for v in doc["c"]]),
            rows=rows,
            lower=np.array([_num_in(b[0], "bounds") for b in doc["bounds"]]),
            upper=np.array([_num_in(b[1], "bounds") for b in doc["bounds"]]),
            integer_set=tuple(int(i) for i in doc["integer"]),
        )
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        if isinstance(exc, InstanceFormatError):
            raise
        raise InstanceFormatError(f"malformed instance document: {exc!r}") from exc
    problems = validate(instance)
    if problems:
        raise InstanceFormatError("instance fails validation: " + "; ".join(problems))
    return instance
