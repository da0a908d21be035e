import csv
import io

import numpy as np
import pytest

from qsetop.dataset import (
    DatasetError,
    Record,
    brute_force_intersection,
    from_values,
    marked_pairs,
    planted_pair,
    random_instance,
)
from qsetop.ledger import QueryLedger
from qsetop.qintersection import (
    FOUND,
    NO_OUTPUT,
    PREFILTER,
    REJECTED,
    RunConfig,
    dense_prefilter,
    q_intersection,
    q_union,
    results_csv,
)
from qsetop.rng import trial_rng

from conftest import INTRO_A, INTRO_B


def test_intro(intro_sets):
    res = q_intersection(*intro_sets, RunConfig(master_seed=3))
    assert res.elements == {Record((1, 2, 3, 4))}
    assert res.sorted_elements() == [(1, 2, 3, 4)]


def test_disjoint_runs_r_plus_one_empty_calls():
    A = from_values([(1,), (2,), (3,)])
    B = from_values([(4,), (5,)])
    for r in (1, 2, 3):
        res = q_intersection(A, B, RunConfig(master_seed=1, confirm_repeats=r))
        assert res.elements == set()
        assert res.rounds == r + 1
        assert [t.kind for t in res.trace] == [NO_OUTPUT] * (r + 1)


def test_dimension_mismatch():
    with pytest.raises(DatasetError):
        q_intersection(from_values([(1, 2)]), from_values([(1,)]))


def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig(confirm_repeats=0)
    with pytest.raises(ValueError):
        RunConfig(iteration_cap_factor=0.5)
    assert RunConfig().prefilter_samples(16) == 4 * 5


def test_trace_invariants_on_planted_instances():
    for seed in range(30):
        rng = trial_rng(seed)
        c = int(rng.integers(0, 9))
        A, B = planted_pair(16, 32, c, rng)
        res = q_intersection(A, B, RunConfig(), rng)
        assert res.elements == brute_force_intersection(A, B)
        kinds = [t.kind for t in res.trace]
        assert REJECTED not in kinds
        # every solution found exactly once, by the prefilter or a found round
        assert kinds.count(FOUND) + kinds.count(PREFILTER) == c
        assert res.rounds == kinds.count(FOUND) + kinds.count(NO_OUTPUT)
        # the last R+1 subroutine calls all came back empty
        assert kinds[-3:] == [NO_OUTPUT] * 3
        queries = [t.queries for t in res.trace]
        assert queries == sorted(queries)
        assert res.ledger.ggi_queries == queries[-1]


def test_monotone_progress_through_tombstones():
    rng = trial_rng(12)
    A, B = planted_pair(32, 32, 6, rng)
    res = q_intersection(A, B, RunConfig(), rng)
    remaining = len(marked_pairs(A, B))
    for t in res.trace:
        if t.kind in (FOUND, PREFILTER):
            i, j = t.pair
            assert Record(A[i].values) in res.elements
            remaining -= 1
    assert remaining == 0


def test_sweep_matches_brute_force():
    rng = np.random.default_rng(2)
    for seed in range(40):
        n_bits, m_bits = int(rng.integers(0, 6)), int(rng.integers(0, 6))
        A, B = random_instance(n_bits, m_bits, rng, dimension=2, value_bound=16, tombstones=False)
        res = q_intersection(A, B, RunConfig(master_seed=seed))
        assert res.elements == brute_force_intersection(A, B)


def test_full_engine_matches_brute_force():
    rng = np.random.default_rng(8)
    for seed in range(10):
        A, B = random_instance(2, 2, rng, dimension=2, value_bound=3)
        res = q_intersection(A, B, RunConfig(master_seed=seed, engine="full"))
        assert res.elements == brute_force_intersection(A, B)


def test_same_seed_same_result(intro_sets):
    r1 = q_intersection(*intro_sets, RunConfig(master_seed=44))
    r2 = q_intersection(*intro_sets, RunConfig(master_seed=44))
    assert r1.report() == r2.report()


def test_dense_prefilter_full_density():
    A = from_values([(9, 9)])
    B = from_values([(9, 9)])
    led = QueryLedger()
    assert dense_prefilter(A, B, np.random.default_rng(0), 1, led) == [(0, 0)]
    assert led.classical_checks == 1


def test_dense_prefilter_disjoint_and_bad_samples():
    A = from_values([(1,), (2,)])
    B = from_values([(3,), (4,)])
    assert dense_prefilter(A, B, np.random.default_rng(0), 20) == []
    with pytest.raises(ValueError):
        dense_prefilter(A, B, np.random.default_rng(0), 0)


@pytest.mark.parametrize("samples", [1, 2, 3])
def test_dense_prefilter_hit_rate_matches_bernoulli(samples):
    # density 1/2: A = {x}, B = {x, y}; P(hit) = 1 - (1/2)**samples
    A = from_values([(5,)])
    B = from_values([(5,), (6,)])
    trials = 4000
    hits = sum(bool(dense_prefilter(A, B, trial_rng(samples, s), samples)) for s in range(trials))
    p = 1 - 0.5**samples
    sd = (p * (1 - p) / trials) ** 0.5
    assert abs(hits / trials - p) < 4 * sd


def test_report_and_csv(intro_sets):
    res = q_intersection(*intro_sets, RunConfig(master_seed=0))
    text = res.report()
    assert text.splitlines()[0] == "C = {(1,2,3,4)}"
    assert f"ggi_queries: {res.ledger.ggi_queries}" in text
    rows = list(csv.DictReader(io.StringIO(results_csv([res.csv_row(seed=0)]))))
    assert rows[0]["size"] == "1" and int(rows[0]["ggi_queries"]) == res.ledger.ggi_queries
    assert results_csv([]) == ""


def test_union_intro():
    A, B = from_values(INTRO_A), from_values(INTRO_B)
    universe = from_values(INTRO_A + INTRO_B[:2])
    expected = {Record(v) for v in INTRO_A + INTRO_B}
    assert len(expected) == 5
    assert q_union(A, B, universe, RunConfig(master_seed=1)) == expected
    bigger = from_values(INTRO_A + INTRO_B[:2] + [(5, 5, 5, 5)])
    assert q_union(A, B, bigger, RunConfig(master_seed=2)) == expected


def test_union_trivial_cases():
    A = from_values([(1,), (2,), (3,)])
    U = from_values([(1,), (2,), (3,), (4,), (5,)])
    assert q_union(A, A, U) == set(A.live_records())
    assert q_union(U, A, U) == set(U.live_records())


def test_union_requires_subsets():
    A = from_values([(1,), (9,)])
    U = from_values([(1,), (2,)])
    with pytest.raises(DatasetError, match="outside the universe"):
        q_union(A, U, U)


def test_union_random_against_classical():
    rng = np.random.default_rng(6)
    for seed in range(15):
        universe_rows = [(int(v),) for v in rng.choice(50, size=20, replace=False)]
        pick_a = [r for r in universe_rows if rng.random() < 0.5] or universe_rows[:1]
        pick_b = [r for r in universe_rows if rng.random() < 0.5] or universe_rows[1:2]
        got = q_union(from_values(pick_a), from_values(pick_b), from_values(universe_rows),
                      RunConfig(master_seed=seed))
        assert got == {Record(v) for v in set(pick_a) | set(pick_b)}
