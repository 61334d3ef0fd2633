"""Acceptance suite: one test per release criterion.

Each criterion checks the system against an independent oracle (enumeration,
finite differences, closed-form statistics) or a hard end-to-end bar, and
prints a single PASS line on success (visible with pytest -s).

The learnability and generalization criteria (7 and 8) share one trained
model pair via a module-scoped fixture so the suite trains only once.
"""

import filecmp
import json
import os
import time

import numpy as np
import pytest
from scipy.stats import chi2

from backdoor_mip.backdoor import CandidateSet, sample_candidates
from backdoor_mip.bnb import BnbStatus, PriorityMap, solve_mip
from backdoor_mip.cli import main as cli_main
from backdoor_mip.encode import BipartiteGraph, encode
from backdoor_mip.lp import LpSolution, LpStatus, solve_lp
from backdoor_mip.mip import MipInstance, Row, SENSE_LE, generate_gisp, preset_config
from backdoor_mip.neural import autograd as ag
from backdoor_mip.neural.losses import margin_ranking_loss
from backdoor_mip.neural.model import HyperParams, forward, init_params
from backdoor_mip.neural.training import (
    TrainConfig,
    classify_accuracy,
    rank_accuracy,
    train_classifier,
    train_scorer,
)
from backdoor_mip.pipeline import (
    RecordStore,
    build_classifier_examples,
    build_ranking_pairs,
    collect_runs,
    evaluate,
)

from _oracles import brute_force_binary_mip, lp_by_vertex_enumeration, random_bounded_lp

HP = HyperParams(hidden=16, heads=2, rounds=2)
TRAIN_BUDGET_SECONDS = 600.0


# --------------------------------------------------------------------------
# criterion 1: MIP solver exactness on 200 random binary MIPs


def _random_binary_mip(rng):
    n = int(rng.integers(2, 9))  # at most 8 binary variables
    m = int(rng.integers(1, 7))
    rows = []
    for _ in range(m):
        coefs = rng.integers(-3, 4, size=n)
        sense = SENSE_LE if rng.random() < 0.7 else ">="
        rows.append(
            Row(
                coeffs=tuple((i, float(a)) for i, a in enumerate(coefs) if a != 0),
                sense=sense,
                rhs=float(rng.integers(-2, 5)),
            )
        )
    return MipInstance(
        id="accept-mip", n=n, c=rng.integers(-6, 7, size=n).astype(float), rows=tuple(rows),
        lower=np.zeros(n), upper=np.ones(n), integer_set=tuple(range(n)),
    )


def test_criterion_1_mip_matches_enumeration():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    feasible = 0
    for _ in range(200):
        inst = _random_binary_mip(rng)
        oracle_obj, _ = brute_force_binary_mip(inst)
        result = solve_mip(inst)
        if oracle_obj is None:
            assert result.status is BnbStatus.INFEASIBLE
        else:
            assert result.status is BnbStatus.OPTIMAL
            assert abs(result.objective - oracle_obj) <= 1e-6
            feasible += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    assert feasible >= 100  # the oracle must actually get exercised
    print(f"\n[criterion 1] PASS: 200 random MIPs match enumeration ({feasible} feasible, {elapsed:.1f}s)")


# --------------------------------------------------------------------------
# criterion 2: LP solver exactness and strong duality on 200 random LPs


def _instance_from_dense(A, senses, b, c, lower, upper):
    rows = tuple(
        Row(
            coeffs=tuple((i, float(A[j, i])) for i in range(A.shape[1]) if A[j, i] != 0.0),
            sense=senses[j],
            rhs=float(b[j]),
        )
        for j in range(A.shape[0])
    )
    return MipInstance(
        id="accept-lp", n=A.shape[1], c=np.asarray(c, float), rows=rows,
        lower=np.asarray(lower, float), upper=np.asarray(upper, float), integer_set=(),
    )


def test_criterion_2_lp_matches_vertex_enumeration():
    rng = np.random.default_rng(77)
    optimal = 0
    for _ in range(200):
        A, senses, b, c, lower, upper = random_bounded_lp(rng, max_vars=5, max_rows=6)
        status, oracle_obj, _ = lp_by_vertex_enumeration(A, senses, b, c, lower, upper)
        sol = solve_lp(_instance_from_dense(A, senses, b, c, lower, upper))
        if status == "Infeasible":
            assert sol.status is LpStatus.INFEASIBLE
            continue
        assert sol.status is LpStatus.OPTIMAL
        assert abs(sol.objective - oracle_obj) <= 1e-7
        # strong duality: c'x = b'y + sum_j max(d,0) up + min(d,0) lo
        d = c - A.T @ sol.duals
        dual_obj = float(b @ sol.duals + np.maximum(d, 0) @ upper + np.minimum(d, 0) @ lower)
        assert abs(sol.objective - dual_obj) <= 1e-7
        optimal += 1
    assert optimal >= 100
    print(f"\n[criterion 2] PASS: 200 random LPs match vertex enumeration with strong duality ({optimal} optimal)")


# --------------------------------------------------------------------------
# criterion 3: branching priorities are always honored


def test_criterion_3_branch_log_priority_audit():
    violations = 0
    audited = 0
    for seed in range(15):
        inst = generate_gisp(preset_config("toy", seed=seed))
        rng = np.random.default_rng(seed)
        prio = (rng.random(inst.n) < 0.3).astype(np.int64)
        result = solve_mip(inst, PriorityMap(prio))
        for entry in result.branch_log:
            audited += 1
            # replay the branching rule from the logged candidate list
            best = max(
                entry.candidates,
                key=lambda item: (prio[item[0]], item[1], -item[0]),
            )
            if entry.var != best[0]:
                violations += 1
            prioritized = [i for i, _ in entry.candidates if prio[i] == 1]
            if prioritized and prio[entry.var] != 1:
                violations += 1
    assert audited > 50
    assert violations == 0
    print(f"\n[criterion 3] PASS: {audited} branch decisions audited, zero priority violations")


# --------------------------------------------------------------------------
# criterion 4: margin ranking loss on a 1000-case grid


def test_criterion_4_margin_loss_grid():
    s1_grid = np.linspace(-2.0, 2.0, 10)
    s2_grid = np.linspace(-2.0, 2.0, 10)
    margins = (0.01, 0.1, 0.5, 1.0, 2.0)
    cases = 0
    for s1 in s1_grid:
        for s2 in s2_grid:
            for y in (-1, 1):
                for m in margins:
                    want = max(0.0, -y * (s1 - s2) + m)
                    assert margin_ranking_loss(float(s1), float(s2), y, m) == pytest.approx(want, abs=1e-12)
                    got = margin_ranking_loss(
                        ag.Tensor(np.array(s1)), ag.Tensor(np.array(s2)), y, m
                    ).item()
                    assert got == pytest.approx(want, abs=1e-12)
                    cases += 1
    assert cases == 1000
    print(f"\n[criterion 4] PASS: margin ranking loss exact on {cases} grid cases")


# --------------------------------------------------------------------------
# criterion 5: finite-difference gradient check on every parameter tensor


def _random_graph(rng):
    """A random schema-conformant bipartite graph with 5..15 total nodes."""
    total = int(rng.integers(5, 16))
    n_vars = int(rng.integers(2, total - 1))
    n_cons = total - n_vars
    var_features = rng.normal(size=(n_vars, 7))
    var_features[:, 6] = (rng.random(n_vars) < 0.3).astype(float)
    cons_features = rng.normal(size=(n_cons, 5))
    num_edges = int(rng.integers(n_vars, 3 * total))
    edges = np.column_stack(
        [
            rng.integers(0, n_vars, size=num_edges).astype(float),
            rng.integers(0, n_cons, size=num_edges).astype(float),
            rng.normal(size=num_edges),
        ]
    )
    return BipartiteGraph(var_features=var_features, cons_features=cons_features, edges=edges)


def test_criterion_5_gradient_check_every_tensor():
    rng = np.random.default_rng(5)
    worst = 0.0
    eps = 1e-6
    for g_idx in range(20):
        graph = _random_graph(rng)
        params = init_params(g_idx, HP)

        def loss():
            return forward(params, graph)

        value = loss()
        params.zero_grad()
        value.backward()
        for name, t in params.items():
            grad = t.grad if t.grad is not None else np.zeros_like(t.data)
            flat, gflat = t.data.ravel(), grad.ravel()
            picks = rng.choice(flat.size, size=min(3, flat.size), replace=False)
            for i in picks:
                old = flat[i]
                flat[i] = old + eps
                up = loss().item()
                flat[i] = old - eps
                down = loss().item()
                flat[i] = old
                fd = (up - down) / (2 * eps)
                rel = abs(fd - gflat[i]) / max(1.0, abs(fd), abs(gflat[i]))
                worst = max(worst, rel)
                assert rel < 1e-4, f"graph {g_idx}, tensor {name}[{i}]: fd={fd}, grad={gflat[i]}"
    print(f"\n[criterion 5] PASS: gradients match finite differences on 20 graphs (worst rel err {worst:.2e})")


# --------------------------------------------------------------------------
# criterion 6: sampling distribution of size-1 candidate draws


def test_criterion_6_sampling_distribution():
    # 10-variable instance with a fixed fractionality profile
    n = 10
    # all weights well away from zero so the 3-sigma normal approximation holds
    fracs = np.array([0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5])
    inst = MipInstance(
        id="profile", n=n, c=np.ones(n),
        rows=(Row(coeffs=tuple((i, 1.0) for i in range(n)), sense=SENSE_LE, rhs=float(n)),),
        lower=np.zeros(n), upper=np.ones(n), integer_set=tuple(range(n)),
    )
    root = LpSolution(
        status=LpStatus.OPTIMAL, x=fracs.copy(), duals=np.zeros(1),
        basis_status=np.zeros(n, dtype=np.int64), objective=float(fracs.sum()), iterations=0,
    )
    draws = 100_000
    sets = sample_candidates(inst, root, count=draws, size_fraction=1e-9, rng_seed=606)
    counts = np.zeros(n)
    for cs in sets:
        assert len(cs.vars) == 1
        counts[cs.vars[0]] += 1

    weights = fracs + 1e-6
    p = weights / weights.sum()
    expected = draws * p
    sigma = np.sqrt(draws * p * (1 - p))
    assert np.all(np.abs(counts - expected) <= 3.0 * sigma)

    chi_stat = float(((counts - expected) ** 2 / expected).sum())
    critical = float(chi2.ppf(0.99, df=n - 1))
    assert chi_stat <= critical
    print(f"\n[criterion 6] PASS: 100k draws within 3 sigma per bin, chi2 {chi_stat:.1f} <= {critical:.1f}")


# --------------------------------------------------------------------------
# criteria 7 and 8: learnability and held-out generalization


def _prepare_split(store_path, seeds, sampling_seed):
    instances = [generate_gisp(preset_config("toy", seed=s)) for s in seeds]
    candidates, graphs = {}, {}
    for inst in instances:
        root = solve_lp(inst)
        sets = sample_candidates(inst, root, count=10, size_fraction=0.05, rng_seed=sampling_seed)
        candidates[inst.id] = sets
        for k, cand in enumerate(sets):
            graphs[(inst.id, k)] = encode(inst, root, cand)
    store = RecordStore(store_path)
    collect_runs(instances, candidates, store, jobs=4)
    return instances, candidates, graphs, store


@pytest.fixture(scope="module")
def trained_models(tmp_path_factory):
    root = tmp_path_factory.mktemp("accept-train")

    t0 = time.perf_counter()
    s_inst, s_cand, s_graphs, s_store = _prepare_split(str(root / "scorer.jsonl"), range(20), 17)
    pair_meta = build_ranking_pairs(s_store, [i.id for i in s_inst], per_instance_cap=20, seed=0)
    pairs = [
        (s_graphs[(p.instance_id, p.set_id_1)], s_graphs[(p.instance_id, p.set_id_2)], p.y)
        for p in pair_meta
    ]
    scorer, _ = train_scorer(
        pairs,
        TrainConfig(margin=0.1, learning_rate=1e-3, epochs=150, batch_size=32, seed=0, hyperparams=HP),
    )
    scorer_seconds = time.perf_counter() - t0
    scorer_acc = rank_accuracy(scorer, pairs)

    t1 = time.perf_counter()
    c_inst, c_cand, c_graphs, c_store = _prepare_split(str(root / "cls.jsonl"), range(100, 115), 17)
    example_meta = build_classifier_examples(scorer, c_inst, c_cand, c_store)
    examples = [(c_graphs[(e.instance_id, e.set_id)], e.label) for e in example_meta]
    classifier, _ = train_classifier(
        examples,
        TrainConfig(margin=0.1, learning_rate=3e-3, epochs=200, batch_size=8, seed=0, hyperparams=HP),
    )
    classifier_seconds = time.perf_counter() - t1
    classifier_acc = classify_accuracy(classifier, examples)

    return {
        "scorer": scorer,
        "classifier": classifier,
        "scorer_acc": scorer_acc,
        "classifier_acc": classifier_acc,
        "scorer_seconds": scorer_seconds,
        "classifier_seconds": classifier_seconds,
        "num_pairs": len(pairs),
        "num_examples": len(examples),
    }


def test_criterion_7_learnability(trained_models):
    tm = trained_models
    assert tm["scorer_acc"] >= 0.95, f"scorer train rank accuracy {tm['scorer_acc']:.3f}"
    assert tm["scorer_seconds"] < TRAIN_BUDGET_SECONDS
    assert tm["classifier_acc"] >= 0.90, f"classifier train accuracy {tm['classifier_acc']:.3f}"
    assert tm["classifier_seconds"] < TRAIN_BUDGET_SECONDS
    print(
        f"\n[criterion 7] PASS: scorer {tm['scorer_acc']:.1%} on {tm['num_pairs']} pairs "
        f"({tm['scorer_seconds']:.0f}s), classifier {tm['classifier_acc']:.1%} on "
        f"{tm['num_examples']} examples ({tm['classifier_seconds']:.0f}s)"
    )


def test_criterion_8_held_out_evaluation(trained_models, tmp_path):
    # 30 instances and a sampling seed never seen during training
    instances, candidates, _, store = _prepare_split(str(tmp_path / "test.jsonl"), range(200, 230), 91)
    report = evaluate(instances, candidates, store, trained_models["scorer"], trained_models["classifier"])

    rows = {r.name: r for r in report.rows}
    assert set(rows) == {"default", "scorer", "scorer+cls"}
    for row in report.rows:
        for col in ("mean", "stdev", "p25", "median", "p75"):
            assert np.isfinite(getattr(row, col))
        assert row.win + row.tie + row.loss == 30

    default = rows["default"]
    assert (default.win, default.tie, default.loss) == (0, 30, 0)

    combined = rows["scorer+cls"]
    assert combined.mean <= default.mean  # total measure no worse than default
    assert combined.win >= combined.loss
    print(
        f"\n[criterion 8] PASS: scorer+cls mean {combined.mean:.1f} <= default {default.mean:.1f}, "
        f"record {combined.win}W/{combined.tie}T/{combined.loss}L on 30 held-out instances"
    )


# --------------------------------------------------------------------------
# criterion 9: the full pipeline is byte-identical under rerun


def _run_mini_pipeline(root: str):
    instances = os.path.join(root, "instances")
    cands = os.path.join(root, "candidates")
    records = os.path.join(root, "records.jsonl")
    scorer = os.path.join(root, "scorer.json")
    classifier = os.path.join(root, "classifier.json")
    eval_json = os.path.join(root, "eval.json")
    steps = [
        ["gen-instances", "--count", "3", "--seed", "0", "--num-vertices", "12",
         "--edge-probability", "0.45", "--removable-fraction", "0.25", "--out", instances],
        ["sample-all", "--instances", instances, "--out", cands,
         "--count", "4", "--fraction", "0.1", "--seed", "7"],
        ["collect", "--instances", instances, "--candidates", cands,
         "--records", records, "--seed", "0"],
        ["train-scorer", "--instances", instances, "--candidates", cands, "--records", records,
         "--out", scorer, "--seed", "0", "--epochs", "2"],
        ["train-classifier", "--scorer", scorer, "--instances", instances, "--candidates", cands,
         "--records", records, "--out", classifier, "--seed", "0", "--epochs", "2"],
        ["evaluate", "--instances", instances, "--candidates", cands, "--records", records,
         "--scorer", scorer, "--classifier", classifier, "--out-json", eval_json],
    ]
    for argv in steps:
        assert cli_main(argv) == 0, argv


def test_criterion_9_reproducibility(tmp_path, capsys):
    dir_a = str(tmp_path / "run_a")
    dir_b = str(tmp_path / "run_b")
    os.makedirs(dir_a)
    os.makedirs(dir_b)
    _run_mini_pipeline(dir_a)
    _run_mini_pipeline(dir_b)
    capsys.readouterr()  # drop CLI chatter

    compared = 0
    for sub, _, files in os.walk(dir_a):
        rel = os.path.relpath(sub, dir_a)
        for name in sorted(files):
            a = os.path.join(sub, name)
            b = os.path.join(dir_b, rel, name)
            assert os.path.exists(b), f"missing {b}"
            assert filecmp.cmp(a, b, shallow=False), f"byte mismatch in {rel}/{name}"
            compared += 1
    assert compared >= 10  # instances + candidates + records + models + eval
    print(f"\n[criterion 9] PASS: {compared} pipeline artifacts byte-identical across reruns")
