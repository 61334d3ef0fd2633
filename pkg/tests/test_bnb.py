"""Branch-and-bound tests: oracle comparison, priorities, limits, determinism."""

import numpy as np
import pytest

from backdoor_mip.bnb import (
    BnbConfig,
    BnbStatus,
    BranchLogEntry,
    Measure,
    PriorityMap,
    select_branch_var,
    solve_mip,
)
from backdoor_mip.mip import SENSE_GE, SENSE_LE, GispConfig, MipInstance, Row, generate_gisp

from _oracles import brute_force_binary_mip


def random_binary_mip(rng, max_vars=6, max_rows=5):
    n = int(rng.integers(2, max_vars + 1))
    m = int(rng.integers(1, max_rows + 1))
    rows = []
    for _ in range(m):
        coefs = rng.integers(-3, 4, size=n)
        sense = SENSE_LE if rng.random() < 0.7 else SENSE_GE
        rhs = float(rng.integers(-2, 4))
        rows.append(
            Row(coeffs=tuple((i, float(a)) for i, a in enumerate(coefs) if a != 0), sense=sense, rhs=rhs)
        )
    return MipInstance(
        id="rand", n=n, c=rng.integers(-5, 6, size=n).astype(float), rows=tuple(rows),
        lower=np.zeros(n), upper=np.ones(n), integer_set=tuple(range(n)),
    )


class TestCorrectness:
    def test_random_binary_mips_match_enumeration(self):
        rng = np.random.default_rng(3)
        for _ in range(60):
            inst = random_binary_mip(rng)
            oracle_obj, _ = brute_force_binary_mip(inst)
            result = solve_mip(inst)
            if oracle_obj is None:
                assert result.status is BnbStatus.INFEASIBLE
            else:
                assert result.status is BnbStatus.OPTIMAL
                assert result.objective == pytest.approx(oracle_obj, abs=1e-6)
                # reported solution must actually achieve the objective
                assert float(inst.c @ result.x) == pytest.approx(result.objective, abs=1e-9)

    def test_gisp_solution_is_integral_and_feasible(self):
        inst = generate_gisp(GispConfig(num_vertices=12, edge_probability=0.4, seed=4, removable_fraction=0.25))
        result = solve_mip(inst)
        assert result.status is BnbStatus.OPTIMAL
        x = result.x
        assert np.allclose(x, np.round(x))
        for row in inst.rows:
            assert sum(a * x[i] for i, a in row.coeffs) <= row.rhs + 1e-9

    def test_best_bound_equals_objective_at_optimality(self):
        inst = generate_gisp(GispConfig(num_vertices=10, edge_probability=0.4, seed=2, removable_fraction=0.25))
        result = solve_mip(inst)
        assert result.best_bound == pytest.approx(result.objective)


class TestBranchSelection:
    def test_returns_none_when_integral(self):
        x = np.array([0.0, 1.0, 1.0])
        assert select_branch_var(x, (0, 1, 2), PriorityMap.zeros(3), 1e-6) is None

    def test_most_fractional_wins_without_priorities(self):
        x = np.array([0.2, 0.45, 0.9])
        assert select_branch_var(x, (0, 1, 2), PriorityMap.zeros(3), 1e-6) == 1

    def test_priority_beats_fractionality(self):
        x = np.array([0.45, 0.1])
        p = PriorityMap(np.array([0, 1]))
        assert select_branch_var(x, (0, 1), p, 1e-6) == 1

    def test_index_breaks_exact_ties(self):
        x = np.array([0.25, 0.25])
        assert select_branch_var(x, (0, 1), PriorityMap.zeros(2), 1e-6) == 0

    def test_respects_tolerance(self):
        x = np.array([1.0 + 1e-8])
        assert select_branch_var(x, (0,), PriorityMap.zeros(1), 1e-6) is None


class TestPrioritiesChangeSearch:
    def test_node_count_depends_on_priorities(self):
        inst = generate_gisp(GispConfig(num_vertices=14, edge_probability=0.45, seed=0, removable_fraction=0.25))
        base = solve_mip(inst)
        counts = {base.node_count}
        for k in range(min(6, inst.n)):
            p = np.zeros(inst.n, dtype=np.int64)
            p[k] = 1
            r = solve_mip(inst, PriorityMap(p))
            assert r.objective == pytest.approx(base.objective, abs=1e-6)
            counts.add(r.node_count)
        assert len(counts) > 1  # at least one prioritization changed the tree

    def test_branch_log_never_skips_a_priority_variable(self):
        inst = generate_gisp(GispConfig(num_vertices=14, edge_probability=0.45, seed=1, removable_fraction=0.25))
        p = np.zeros(inst.n, dtype=np.int64)
        p[: inst.n // 3] = 1
        result = solve_mip(inst, PriorityMap(p))
        for entry in result.branch_log:
            prioritized = [i for i, _ in entry.candidates if p[i] == 1]
            if prioritized:
                assert p[entry.var] == 1


class TestMechanics:
    def test_deterministic(self):
        inst = generate_gisp(GispConfig(num_vertices=12, edge_probability=0.45, seed=9, removable_fraction=0.25))
        a = solve_mip(inst)
        b = solve_mip(inst)
        assert a.node_count == b.node_count
        assert a.objective == b.objective
        assert a.branch_log == b.branch_log

    def test_node_limit(self):
        inst = generate_gisp(GispConfig(num_vertices=14, edge_probability=0.45, seed=0, removable_fraction=0.25))
        result = solve_mip(inst, config=BnbConfig(node_limit=2))
        assert result.status is BnbStatus.NODE_LIMIT
        assert result.node_count <= 2
        assert result.best_bound >= (result.objective or -np.inf)

    def test_measure_selection(self):
        inst = generate_gisp(GispConfig(num_vertices=8, edge_probability=0.4, seed=0, removable_fraction=0.25))
        nodes = solve_mip(inst, config=BnbConfig(measure=Measure.NODE_COUNT))
        assert nodes.measure_value == float(nodes.node_count)
        walltime = solve_mip(inst, config=BnbConfig(measure=Measure.WALL_SECONDS))
        assert walltime.measure_value > 0.0

    def test_branch_log_written_to_file(self, tmp_path):
        import json

        inst = generate_gisp(GispConfig(num_vertices=12, edge_probability=0.45, seed=3, removable_fraction=0.25))
        path = tmp_path / "branches.jsonl"
        result = solve_mip(inst, log_path=str(path))
        lines = [json.loads(line) for line in path.read_text().splitlines()]
        assert len(lines) == len(result.branch_log)
        for line, entry in zip(lines, result.branch_log):
            assert line["var"] == entry.var
            assert line["node"] == entry.node_id

    def test_priority_length_mismatch(self):
        inst = generate_gisp(GispConfig(num_vertices=6, edge_probability=0.4, seed=0))
        with pytest.raises(ValueError, match="length"):
            solve_mip(inst, PriorityMap(np.zeros(3, dtype=np.int64)))

    def test_bad_config(self):
        with pytest.raises(ValueError):
            BnbConfig(node_limit=0)
