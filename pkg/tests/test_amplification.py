import math

import numpy as np
import pytest

from qsetop.amplification import (
    BbhtState,
    bbht_reference,
    choose_iterations,
    default_iteration_cap,
    grow_gamma,
    subroutine1,
)
from qsetop.analysis import fit_exponent
from qsetop.dataset import from_values, match_fn, planted_pair, random_instance
from qsetop.ledger import QueryLedger
from qsetop.rng import trial_rng


def test_choose_iterations_gamma_one_is_fair_coin():
    st = BbhtState(mn=64, rng=np.random.default_rng(0))
    draws = [choose_iterations(st) for _ in range(10_000)]
    assert set(draws) == {0, 1}
    assert abs(np.mean(draws) - 0.5) < 0.02


def test_choose_iterations_floor_rule():
    st = BbhtState(mn=64, rng=np.random.default_rng(1), gamma=2.5)
    assert {choose_iterations(st) for _ in range(500)} == {0, 1, 2}


def test_choose_iterations_reproducible():
    a = BbhtState(mn=1024, rng=np.random.default_rng(4), gamma=7.3)
    b = BbhtState(mn=1024, rng=np.random.default_rng(4), gamma=7.3)
    assert [choose_iterations(a) for _ in range(50)] == [choose_iterations(b) for _ in range(50)]


def test_grow_gamma():
    st = BbhtState(mn=64, rng=np.random.default_rng(0))
    assert grow_gamma(st).gamma == pytest.approx(1.2)
    assert grow_gamma(st).gamma == pytest.approx(1.44)
    st.gamma = 7.9
    assert grow_gamma(st).gamma == 8.0
    for _ in range(20):
        assert grow_gamma(st).gamma <= math.sqrt(64)


def test_bbht_state_validation():
    with pytest.raises(ValueError):
        BbhtState(mn=16, rng=np.random.default_rng(0), lambda_growth=4 / 3)
    with pytest.raises(ValueError):
        BbhtState(mn=16, rng=np.random.default_rng(0), gamma=5.0)


def test_default_cap():
    assert default_iteration_cap(16) == 12
    assert default_iteration_cap(1000) == 3 * 32
    assert default_iteration_cap(1) == 3


def test_subroutine1_intro_rate(intro_sets):
    A, B = intro_sets
    found = 0
    for seed in range(1000):
        out = subroutine1(A, B, trial_rng(seed))
        if out is not None:
            assert out == (2, 2)
            found += 1
    assert found / 1000 > 0.5


def test_subroutine1_disjoint_never_finds():
    A = from_values([(1, 1), (2, 2), (3, 3)])
    B = from_values([(4, 4), (5, 5)])
    for seed in range(300):
        led = QueryLedger()
        assert subroutine1(A, B, trial_rng(seed), led) is None
        cap = default_iteration_cap(8)
        assert cap < led.ggi_queries <= cap + math.floor(math.sqrt(8))
        assert led.classical_checks == led.measurements


def test_subroutine1_planted_mean_queries():
    total = 0
    for seed in range(1000):
        rng = trial_rng(77, seed)
        A, B = planted_pair(32, 32, 4, rng)
        led = QueryLedger()
        assert subroutine1(A, B, rng, led) is not None
        total += led.ggi_queries
    assert total / 1000 <= 4 * math.sqrt(1024 / 4)


def test_subroutine1_answers_are_verified_matches():
    rng = np.random.default_rng(3)
    for _ in range(50):
        A, B = planted_pair(8, 16, int(rng.integers(1, 9)), rng, dimension=1, value_bound=40)
        i, j = subroutine1(A, B, rng)
        assert match_fn(A[i], B[j])


def test_subroutine1_full_engine_agrees_with_reduced():
    # same seeds, same draws: the two engines must give the same outcomes
    for seed in range(40):
        rng = np.random.default_rng(seed)
        A, B = random_instance(2, 2, rng, dimension=2, value_bound=3)
        r1 = subroutine1(A, B, trial_rng(seed, 1), engine="reduced")
        r2 = subroutine1(A, B, trial_rng(seed, 1), engine="full")
        assert r1 == r2


def test_subroutine1_unknown_engine(intro_sets):
    with pytest.raises(ValueError):
        subroutine1(*intro_sets, np.random.default_rng(0), engine="gate")


def test_bbht_reference_single_marked_rate():
    flags = np.zeros(16, dtype=bool)
    flags[11] = True
    hits = [bbht_reference(flags, trial_rng(5, s)) for s in range(1000)]
    assert set(hits) <= {11, None}
    assert sum(h == 11 for h in hits) / 1000 > 0.5


def test_bbht_reference_all_and_none_marked():
    led = QueryLedger()
    assert bbht_reference(np.ones(8), np.random.default_rng(0), ledger=led) is not None
    assert led.measurements == 1
    for s in range(50):
        led = QueryLedger()
        assert bbht_reference(np.zeros(32), np.random.default_rng(s), ledger=led) is None
        assert led.ggi_queries > default_iteration_cap(32)
    with pytest.raises(ValueError):
        bbht_reference(np.zeros(6), np.random.default_rng(0))


@pytest.mark.parametrize("n, c", [(16, 1), (16, 3), (64, 1), (64, 0), (8, 8), (1, 1)])
def test_subroutine1_with_one_column_matches_reference(n, c):
    for seed in range(60):
        rng = trial_rng(seed, n, c)
        A, B = planted_pair(n, 1, min(c, 1), rng, dimension=1, value_bound=1000)
        flags = [match_fn(A[i], B[0]) for i in range(len(A))]
        out = subroutine1(A, B, trial_rng(seed, 0))
        ref = bbht_reference(flags, trial_rng(seed, 0))
        assert (None if out is None else out[0]) == ref


@pytest.mark.slow
def test_mean_cost_scales_as_inverse_sqrt_t():
    mn = 2**14
    points = []
    for t in (1, 2, 4, 8, 16):
        q = []
        for s in range(400):
            rng = trial_rng(99, t, s)
            A, B = planted_pair(128, 128, t, rng)
            led = QueryLedger()
            subroutine1(A, B, rng, led)
            q.append(led.ggi_queries)
        points.append((t, np.mean(q)))
    slope = fit_exponent(points).slope
    assert -0.6 <= slope <= -0.4, points
