"""Data collection, label construction, test-time selection, and evaluation.

Solve records live in an append-only JSON-lines store keyed by
(instance id, setting, seed); collection is resumable and byte-identical
under rerun with the same seeds.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from itertools import combinations

import numpy as np

from .backdoor import CandidateSet, priorities_from
from .bnb import BnbConfig, BnbStatus, solve_mip
from .encode import encode
from .lp import solve_lp
from .mip import MipInstance
from .neural import ModelParams, forward

DEFAULT_SETTING = "default"


@dataclass(frozen=True)
class SolveRecord:
    instance_id: str
    setting: str  # "default" or "candidate:<k>"
    measure_value: float
    status: str
    objective: float | None
    seed: int

    @property
    def key(self) -> tuple:
        return (self.instance_id, self.setting, self.seed)

    def to_line(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_line(cls, line: str) -> "SolveRecord":
        return cls(**json.loads(line))


@dataclass(frozen=True)
class RankingPair:
    instance_id: str
    set_id_1: int
    set_id_2: int
    y: int  # -1 iff candidate 1 had the smaller measure


@dataclass(frozen=True)
class ClassifierExample:
    instance_id: str
    set_id: int
    label: int  # 1 iff the candidate beat the default run


def candidate_setting(set_id: int) -> str:
    return f"candidate:{set_id}"


class RecordStore:
    """Append-only JSON-lines record file with in-memory key index."""

    def __init__(self, path: str):
        self.path = path
        self.records: dict[tuple, SolveRecord] = {}
        if os.path.exists(path):
            with open(path) as f:
                for line in f:
                    line = line.strip()
                    if line:
                        rec = SolveRecord.from_line(line)
                        self.records[rec.key] = rec

    def __contains__(self, key: tuple) -> bool:
        return key in self.records

    def append(self, record: SolveRecord):
        if record.key in self.records:
            return
        os.makedirs(os.path.dirname(self.path) or ".", exist_ok=True)
        with open(self.path, "a") as f:
            f.write(record.to_line() + "\n")
        self.records[record.key] = record

    def for_instance(self, instance_id: str) -> dict[str, SolveRecord]:
        return {r.setting: r for r in self.records.values() if r.instance_id == instance_id}


def _run_one(args):
    instance, setting, candidate, config, seed = args
    priorities = priorities_from(candidate, instance.n) if candidate is not None else None
    result = solve_mip(instance, priorities, config)
    return SolveRecord(
        instance_id=instance.id,
        setting=setting,
        measure_value=result.measure_value,
        status=result.status.value,
        objective=result.objective,
        seed=seed,
    )


def collect_runs(
    instances: list[MipInstance],
    candidates: dict[str, list[CandidateSet]],
    store: RecordStore,
    config: BnbConfig = BnbConfig(),
    seed: int = 0,
    jobs: int = 1,
) -> list[SolveRecord]:
    """One default run plus one run per candidate per instance.

    Existing records are skipped by key; results are appended in a fixed
    order so a fresh rerun reproduces the file byte for byte.
    """
    tasks = []
    for instance in instances:
        if (instance.id, DEFAULT_SETTING, seed) not in store:
            tasks.append((instance, DEFAULT_SETTING, None, config, seed))
        for k, cand in enumerate(candidates.get(instance.id, [])):
            if (instance.id, candidate_setting(k), seed) not in store:
                tasks.append((instance, candidate_setting(k), cand, config, seed))

    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, tasks, chunksize=4))
    else:
        results = [_run_one(t) for t in tasks]
    for rec in results:
        store.append(rec)
    return results


def usable_candidate_records(store: RecordStore, instance_id: str) -> dict[int, SolveRecord]:
    """Optimal candidate records by set id; limit-status runs are excluded."""
    out = {}
    for setting, rec in store.for_instance(instance_id).items():
        if setting.startswith("candidate:") and rec.status == BnbStatus.OPTIMAL.value:
            out[int(setting.split(":")[1])] = rec
    return out


def build_ranking_pairs(
    store: RecordStore,
    instance_ids: list[str],
    per_instance_cap: int = 300,
    seed: int = 0,
) -> list[RankingPair]:
    """All unordered candidate pairs with distinct measures, capped per instance."""
    rng = np.random.default_rng(seed)
    pairs: list[RankingPair] = []
    for iid in instance_ids:
        recs = usable_candidate_records(store, iid)
        if len(recs) < 2:
            continue
        ids = sorted(recs)
        inst_pairs = [
            RankingPair(iid, a, b, -1 if recs[a].measure_value < recs[b].measure_value else 1)
            for a, b in combinations(ids, 2)
            if recs[a].measure_value != recs[b].measure_value
        ]
        if len(inst_pairs) > per_instance_cap:
            pick = rng.choice(len(inst_pairs), size=per_instance_cap, replace=False)
            inst_pairs = [inst_pairs[i] for i in sorted(pick)]
        pairs.extend(inst_pairs)
    return pairs


def build_classifier_examples(
    scorer: ModelParams,
    instances: list[MipInstance],
    candidates: dict[str, list[CandidateSet]],
    store: RecordStore,
) -> list[ClassifierExample]:
    """Best-scored candidate per instance, labeled against the default run."""
    out = []
    for instance in instances:
        default = store.for_instance(instance.id).get(DEFAULT_SETTING)
        if default is None or default.status != BnbStatus.OPTIMAL.value:
            continue
        best_id, _ = select_best(scorer, instance, candidates[instance.id])
        rec = usable_candidate_records(store, instance.id).get(best_id)
        if rec is None:
            continue
        out.append(
            ClassifierExample(
                instance_id=instance.id,
                set_id=best_id,
                label=1 if rec.measure_value < default.measure_value else 0,
            )
        )
    return out


def select_best(
    scorer: ModelParams, instance: MipInstance, candidates: list[CandidateSet]
) -> tuple[int, CandidateSet]:
    """Candidate with the lowest score (lower = predicted faster); ties by id."""
    root = solve_lp(instance)
    best_id = None
    best_score = math.inf
    for k, cand in enumerate(candidates):
        s = forward(scorer, encode(instance, root, cand)).item()
        if s < best_score:
            best_score = s
            best_id = k
    return best_id, candidates[best_id]


def classifier_accepts(classifier: ModelParams, instance: MipInstance, candidate: CandidateSet) -> bool:
    root = solve_lp(instance)
    return forward(classifier, encode(instance, root, candidate)).item() > 0.0


def summarize(values) -> tuple[float, float, float, float, float]:
    """(mean, sample stdev, 25th pct, median, 75th pct); linear interpolation."""
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise ValueError("summarize needs at least one value")
    stdev = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    p25, med, p75 = np.percentile(arr, [25, 50, 75], method="linear")
    return (float(np.mean(arr)), stdev, float(p25), float(med), float(p75))


@dataclass(frozen=True)
class SolverRow:
    name: str
    mean: float
    stdev: float
    p25: float
    median: float
    p75: float
    win: int
    tie: int
    loss: int


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[SolverRow, ...]
    per_instance: dict  # instance id -> {"default": m, "scorer": m, "scorer+cls": m, ...}

    def to_json(self) -> bytes:
        doc = {
            "rows": [asdict(r) for r in self.rows],
            "per_instance": self.per_instance,
        }
        return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode()

    def to_text(self) -> str:
        header = f"{'solver':>12} {'mean':>10} {'stdev':>10} {'25 pct':>10} {'median':>10} {'75 pct':>10}  win / tie / loss"
        lines = [header, "-" * len(header)]
        for r in self.rows:
            lines.append(
                f"{r.name:>12} {r.mean:>10.1f} {r.stdev:>10.1f} {r.p25:>10.1f} {r.median:>10.1f} {r.p75:>10.1f}  "
                f"{r.win} / {r.tie} / {r.loss}"
            )
        return "\n".join(lines) + "\n"


def _wtl(measures, defaults, ties_forced):
    win = tie = loss = 0
    for iid in measures:
        if ties_forced.get(iid, False) or measures[iid] == defaults[iid]:
            tie += 1
        elif measures[iid] < defaults[iid]:
            win += 1
        else:
            loss += 1
    return win, tie, loss


def evaluate(
    instances: list[MipInstance],
    candidates: dict[str, list[CandidateSet]],
    store: RecordStore,
    scorer: ModelParams,
    classifier: ModelParams,
) -> EvalReport:
    """Table-style comparison of default, scorer, and scorer+cls.

    An instance counts as a tie when the method fell back to the default run
    (classifier declined) or the measures are exactly equal.
    """
    defaults: dict[str, float] = {}
    scorer_m: dict[str, float] = {}
    cls_m: dict[str, float] = {}
    declined: dict[str, bool] = {}
    per_instance = {}
    for instance in instances:
        recs = store.for_instance(instance.id)
        default = recs.get(DEFAULT_SETTING)
        if default is None:
            raise ValueError(f"instance {instance.id}: no default record in store")
        best_id, best = select_best(scorer, instance, candidates[instance.id])
        cand_rec = recs.get(candidate_setting(best_id))
        if cand_rec is None:
            raise ValueError(f"instance {instance.id}: no record for selected candidate {best_id}")
        accept = classifier_accepts(classifier, instance, best)
        defaults[instance.id] = default.measure_value
        scorer_m[instance.id] = cand_rec.measure_value
        cls_m[instance.id] = cand_rec.measure_value if accept else default.measure_value
        declined[instance.id] = not accept
        per_instance[instance.id] = {
            "default": default.measure_value,
            "scorer": cand_rec.measure_value,
            "scorer+cls": cls_m[instance.id],
            "selected_candidate": best_id,
            "classifier_accepted": accept,
        }

    rows = []
    for name, meas, forced in (
        ("default", defaults, {}),
        ("scorer", scorer_m, {}),
        ("scorer+cls", cls_m, declined),
    ):
        stats = summarize(meas.values())
        win, tie, loss = _wtl(meas, defaults, forced)
        rows.append(SolverRow(name, *stats, win, tie, loss))
    return EvalReport(rows=tuple(rows), per_instance=per_instance)
