"""Command-line entry point for the full experiment lifecycle.

Every subcommand is idempotent for identical flags: outputs that already
exist are skipped. All randomness flows from explicit --seed flags.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import backdoor, pipeline
from .bnb import BnbConfig, PriorityMap, solve_mip
from .lp import solve_lp
from .mip import GISP_PRESETS, GispConfig, InstanceFormatError, generate_gisp, preset_config, read_instance, write_instance
from .neural import ModelParams, SchemaMismatchError, TrainConfig, train_classifier, train_scorer

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MISSING_FILE = 3
EXIT_SCHEMA = 4
EXIT_INVALID = 5


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_ERROR):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class RunManifest:
    """Resolved paths and seeds for one experiment tree."""

    name: str
    data_root: str
    seed: int = 0
    preset: str = "toy"

    def path(self, *parts: str) -> str:
        return os.path.join(self.data_root, *parts)


def data_root(args) -> str:
    return args.data_root or os.environ.get("BACKDOOR_MIP_DATA", "data")


def _load_instances(directory: str):
    if not os.path.isdir(directory):
        raise CliError(f"instance directory not found: {directory}", EXIT_MISSING_FILE)
    out = []
    for name in sorted(os.listdir(directory)):
        if name.endswith(".json"):
            with open(os.path.join(directory, name), "rb") as f:
                out.append(read_instance(f.read()))
    if not out:
        raise CliError(f"no instance files in {directory}", EXIT_MISSING_FILE)
    return out


def _load_candidates(directory: str, instances):
    cands = {}
    for inst in instances:
        path = os.path.join(directory, f"{inst.id}.json")
        if not os.path.exists(path):
            raise CliError(f"candidate file not found: {path}", EXIT_MISSING_FILE)
        with open(path, "rb") as f:
            cands[inst.id] = backdoor.read_candidates(f.read())
    return cands


def _load_model(path: str) -> ModelParams:
    if not os.path.exists(path):
        raise CliError(f"model file not found: {path}", EXIT_MISSING_FILE)
    with open(path, "rb") as f:
        return ModelParams.from_json(f.read())


def cmd_gen_instances(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    made = skipped = 0
    for k in range(args.count):
        if args.preset:
            config = preset_config(args.preset, seed=args.seed + k)
        else:
            config = GispConfig(
                num_vertices=args.num_vertices,
                edge_probability=args.edge_probability,
                removable_fraction=args.removable_fraction,
                seed=args.seed + k,
            )
        instance = generate_gisp(config)
        path = os.path.join(args.out, f"{instance.id}.json")
        if os.path.exists(path):
            skipped += 1
            continue
        with open(path, "wb") as f:
            f.write(write_instance(instance))
        made += 1
    print(f"generated {made} instances in {args.out} ({skipped} already present)")
    return EXIT_OK


def cmd_solve(args) -> int:
    with open(args.instance, "rb") as f:
        instance = read_instance(f.read())
    priorities = None
    if args.priorities:
        with open(args.priorities) as f:
            doc = json.load(f)
        priorities = PriorityMap(np.asarray(doc["priority"], dtype=np.int64))
    config = BnbConfig(node_limit=args.node_limit)
    result = solve_mip(instance, priorities, config, log_path=args.log)
    print(json.dumps({
        "instance": instance.id,
        "status": result.status.value,
        "objective": result.objective,
        "best_bound": result.best_bound,
        "node_count": result.node_count,
    }, sort_keys=True))
    return EXIT_OK


def cmd_sample(args) -> int:
    with open(args.instance, "rb") as f:
        instance = read_instance(f.read())
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"{instance.id}.json")
    if os.path.exists(path):
        print(f"skip existing {path}")
        return EXIT_OK
    root = solve_lp(instance)
    sets = backdoor.sample_candidates(instance, root, args.count, args.fraction, args.seed)
    with open(path, "wb") as f:
        f.write(backdoor.write_candidates(instance.id, args.seed, sets))
    print(f"wrote {len(sets)} candidate sets to {path}")
    return EXIT_OK


def _sample_all(instances, out_dir, count, fraction, seed):
    os.makedirs(out_dir, exist_ok=True)
    for inst in instances:
        path = os.path.join(out_dir, f"{inst.id}.json")
        if os.path.exists(path):
            continue
        root = solve_lp(inst)
        sets = backdoor.sample_candidates(inst, root, count, fraction, seed)
        with open(path, "wb") as f:
            f.write(backdoor.write_candidates(inst.id, seed, sets))


def cmd_sample_all(args) -> int:
    instances = _load_instances(args.instances)
    _sample_all(instances, args.out, args.count, args.fraction, args.seed)
    print(f"candidates ready in {args.out}")
    return EXIT_OK


def cmd_collect(args) -> int:
    instances = _load_instances(args.instances)
    candidates = _load_candidates(args.candidates, instances)
    store = pipeline.RecordStore(args.records)
    config = BnbConfig(node_limit=args.node_limit)
    fresh = pipeline.collect_runs(instances, candidates, store, config, seed=args.seed, jobs=args.jobs)
    print(f"collected {len(fresh)} new records into {args.records} ({len(store.records)} total)")
    return EXIT_OK


def cmd_train_scorer(args) -> int:
    if os.path.exists(args.out):
        print(f"skip existing {args.out}")
        return EXIT_OK
    instances = _load_instances(args.instances)
    candidates = _load_candidates(args.candidates, instances)
    store = pipeline.RecordStore(args.records)
    pairs_meta = pipeline.build_ranking_pairs(store, [i.id for i in instances], args.pair_cap, seed=args.seed)
    by_id = {i.id: i for i in instances}
    graphs = {}

    def graph(iid, set_id):
        if (iid, set_id) not in graphs:
            inst = by_id[iid]
            graphs[(iid, set_id)] = pipeline.encode(inst, solve_lp(inst), candidates[iid][set_id])
        return graphs[(iid, set_id)]

    pairs = [(graph(p.instance_id, p.set_id_1), graph(p.instance_id, p.set_id_2), p.y) for p in pairs_meta]
    if not pairs:
        raise CliError("no usable ranking pairs (all candidate measures equal?)", EXIT_ERROR)
    config = TrainConfig(seed=args.seed, epochs=args.epochs, learning_rate=args.lr, margin=args.margin)
    params, history = train_scorer(pairs, config)
    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    with open(args.out, "wb") as f:
        f.write(params.to_json())
    print(f"trained scorer on {len(pairs)} pairs; final loss {history[-1]:.4f}; wrote {args.out}")
    return EXIT_OK


def cmd_train_classifier(args) -> int:
    if os.path.exists(args.out):
        print(f"skip existing {args.out}")
        return EXIT_OK
    scorer = _load_model(args.scorer)
    instances = _load_instances(args.instances)
    candidates = _load_candidates(args.candidates, instances)
    store = pipeline.RecordStore(args.records)
    examples_meta = pipeline.build_classifier_examples(scorer, instances, candidates, store)
    by_id = {i.id: i for i in instances}
    examples = []
    for ex in examples_meta:
        inst = by_id[ex.instance_id]
        examples.append((pipeline.encode(inst, solve_lp(inst), candidates[ex.instance_id][ex.set_id]), ex.label))
    config = TrainConfig(seed=args.seed, epochs=args.epochs, learning_rate=args.lr)
    params, history = train_classifier(examples, config)
    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    with open(args.out, "wb") as f:
        f.write(params.to_json())
    print(f"trained classifier on {len(examples)} examples; final loss {history[-1]:.4f}; wrote {args.out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    instances = _load_instances(args.instances)
    candidates = _load_candidates(args.candidates, instances)
    store = pipeline.RecordStore(args.records)
    scorer = _load_model(args.scorer)
    classifier = _load_model(args.classifier)
    report = pipeline.evaluate(instances, candidates, store, scorer, classifier)
    if args.out_json:
        os.makedirs(os.path.dirname(args.out_json) or ".", exist_ok=True)
        with open(args.out_json, "wb") as f:
            f.write(report.to_json())
    text = report.to_text()
    if args.out_text:
        os.makedirs(os.path.dirname(args.out_text) or ".", exist_ok=True)
        with open(args.out_text, "w") as f:
            f.write(text)
    print(text, end="")
    return EXIT_OK


def cmd_report(args) -> int:
    if not os.path.exists(args.eval):
        raise CliError(f"report file not found: {args.eval}", EXIT_MISSING_FILE)
    with open(args.eval) as f:
        doc = json.load(f)
    rows = tuple(pipeline.SolverRow(**r) for r in doc["rows"])
    print(pipeline.EvalReport(rows=rows, per_instance=doc["per_instance"]).to_text(), end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="backdoor-mip", description=__doc__)
    parser.add_argument("--data-root", default=None, help="data directory (or env BACKDOOR_MIP_DATA)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-instances", help="generate GISP instance files")
    p.add_argument("--preset", choices=sorted(GISP_PRESETS), default=None)
    p.add_argument("--num-vertices", type=int, default=20)
    p.add_argument("--edge-probability", type=float, default=0.3)
    p.add_argument("--removable-fraction", type=float, default=0.25)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_instances)

    p = sub.add_parser("solve", help="solve one instance by branch and bound")
    p.add_argument("--instance", required=True)
    p.add_argument("--priorities", default=None, help="JSON file {'priority': [...]}")
    p.add_argument("--node-limit", type=int, default=1_000_000)
    p.add_argument("--log", default=None, help="per-node JSON-lines run log")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sample", help="sample candidate sets for one instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--fraction", type=float, default=0.01)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="candidate directory")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("sample-all", help="sample candidate sets for a directory of instances")
    p.add_argument("--instances", required=True)
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--fraction", type=float, default=0.01)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample_all)

    p = sub.add_parser("collect", help="run default + candidate solves into the record store")
    p.add_argument("--instances", required=True)
    p.add_argument("--candidates", required=True)
    p.add_argument("--records", required=True)
    p.add_argument("--node-limit", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_collect)

    p = sub.add_parser("train-scorer", help="fit the ranking scorer")
    p.add_argument("--instances", required=True)
    p.add_argument("--candidates", required=True)
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--margin", type=float, default=0.1)
    p.add_argument("--pair-cap", type=int, default=300)
    p.set_defaults(func=cmd_train_scorer)

    p = sub.add_parser("train-classifier", help="fit the accept/decline classifier")
    p.add_argument("--scorer", required=True)
    p.add_argument("--instances", required=True)
    p.add_argument("--candidates", required=True)
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--lr", type=float, default=1e-3)
    p.set_defaults(func=cmd_train_classifier)

    p = sub.add_parser("evaluate", help="compare default, scorer, scorer+cls on a test split")
    p.add_argument("--instances", required=True)
    p.add_argument("--candidates", required=True)
    p.add_argument("--records", required=True)
    p.add_argument("--scorer", required=True)
    p.add_argument("--classifier", required=True)
    p.add_argument("--out-json", default=None)
    p.add_argument("--out-text", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="print the text table for a saved evaluation")
    p.add_argument("--eval", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(json.dumps({"error": str(exc), "code": exc.code}), file=sys.stderr)
        return exc.code
    except FileNotFoundError as exc:
        print(json.dumps({"error": str(exc), "code": EXIT_MISSING_FILE}), file=sys.stderr)
        return EXIT_MISSING_FILE
    except (SchemaMismatchError,) as exc:
        print(json.dumps({"error": str(exc), "code": EXIT_SCHEMA}), file=sys.stderr)
        return EXIT_SCHEMA
    except InstanceFormatError as exc:
        print(json.dumps({"error": str(exc), "code": EXIT_INVALID}), file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(json.dumps({"error": str(exc), "code": EXIT_INVALID}), file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
