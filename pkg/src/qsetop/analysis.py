"""Query-count model and empirical scaling runs.

The cost model: finding the next of t remaining solutions costs
``c * sqrt(MN / t)`` Grover iterations and succeeds with probability
``1/2 + eps``.  Starting from ``I_1 = c1 * sqrt(MN)`` this gives the
recursion in :func:`recursion_sequence`; :func:`closed_form_bound` is the
integral bound on its last term.
"""

from __future__ import annotations

import csv
import io
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .dataset import planted_pair
from .qintersection import FOUND, PREFILTER, RunConfig, q_intersection
from .rng import trial_rng
from .statevector import DEFAULT_MAX_BITS

MIN_TRIALS = 30
CSV_FIELDS = ("mn", "c_size", "trials", "mean_queries", "median_queries", "p_success_per_call", "seed")


@dataclass(frozen=True)
class RecursionParams:
    c: float
    c1: float
    epsilon: float
    mn: int
    t_max: int

    def __post_init__(self):
        if not 0 <= self.epsilon <= 0.5:
            raise ValueError(f"epsilon={self.epsilon} outside [0, 1/2]")
        if self.c <= 0 or self.c1 <= 0:
            raise ValueError("c and c1 must be positive")
        if self.t_max < 1:
            raise ValueError("t_max must be at least 1")


def recursion_sequence(p: RecursionParams) -> list[float]:
    """I_1..I_{t_max}, with I_t = I_{t-1} + 2c/(1+2eps) * sqrt(mn/t)."""
    step = 2 * p.c / (1 + 2 * p.epsilon)
    seq = [p.c1 * math.sqrt(p.mn)]
    for t in range(2, p.t_max + 1):
        seq.append(seq[-1] + step * math.sqrt(p.mn / t))
    return seq


def closed_form_bound(p: RecursionParams, c_size: int) -> float:
    if c_size < 1:
        raise ValueError("c_size must be at least 1")
    return 4 * p.c * math.sqrt(c_size * p.mn) + (p.c1 - 4 * p.c) * math.sqrt(p.mn)


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    stderr: float
    ci_low: float
    ci_high: float
    intercept: float


def fit_exponent(points: Iterable[tuple[float, float]], confidence: float = 0.95) -> ExponentFit:
    """Least-squares slope of log y against log x."""
    pts = list(points)
    if len(pts) < 3:
        raise ValueError("need at least 3 points")
    x = np.array([p[0] for p in pts], dtype=float)
    y = np.array([p[1] for p in pts], dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive data")
    res = stats.linregress(np.log(x), np.log(y))
    half = stats.t.ppf(0.5 + confidence / 2, len(pts) - 2) * res.stderr
    return ExponentFit(res.slope, res.stderr, res.slope - half, res.slope + half, res.intercept)


@dataclass(frozen=True)
class ScalingPoint:
    mn: int
    c_size: int
    mean_queries: float
    median_queries: float
    trials: int
    seed: int
    p_success_per_call: float
    mean_search_queries: float
    median_search_queries: float
    mismatches: int = 0

    def __post_init__(self):
        if self.trials < MIN_TRIALS:
            raise ValueError(f"a scaling point needs at least {MIN_TRIALS} trials")


def split_bits(mn: int) -> tuple[int, int]:
    if mn < 1 or mn & (mn - 1):
        raise ValueError(f"mn={mn} must be a power of two")
    e = mn.bit_length() - 1
    return (e + 1) // 2, e // 2


def _one_trial(job):
    mn, c_size, seed, grid_idx, trial_idx, config = job
    n_bits, m_bits = split_bits(mn)
    rng = trial_rng(seed, grid_idx, trial_idx)
    A, B = planted_pair(1 << n_bits, 1 << m_bits, c_size, rng)
    res = q_intersection(A, B, config, rng)
    calls = hits = 0
    remaining = c_size
    for r in res.trace:
        if r.kind == PREFILTER:
            remaining -= 1
            continue
        # one trace entry per subroutine call
        if remaining > 0:
            calls += 1
            hits += r.kind == FOUND
        if r.kind == FOUND:
            remaining -= 1
    mismatch = len(res.elements) != c_size
    return res.ledger.ggi_queries, res.search_queries, calls, hits, mismatch


def run_scaling_experiment(
    grid: Sequence[tuple[int, int]],
    trials: int,
    master_seed: int,
    config: RunConfig | None = None,
    threads: int = 1,
    max_bits: int = DEFAULT_MAX_BITS,
) -> list[ScalingPoint]:
    """Run ``trials`` planted instances per (mn, c_size) grid point.

    Instance ``(g, k)`` draws its data and all quantum randomness from
    ``trial_rng(master_seed, g, k)``, so the output is a pure function of
    ``(grid, trials, master_seed, config)``.
    """
    if config is None:
        config = RunConfig(master_seed=master_seed)
    if trials < MIN_TRIALS:
        raise ValueError(f"trials must be at least {MIN_TRIALS}")
    jobs = []
    for g, (mn, c_size) in enumerate(grid):
        if mn.bit_length() - 1 > max_bits:
            raise ValueError(f"mn={mn} exceeds the {max_bits}-bit simulator cap")
        if c_size > 0.75 * mn:
            raise ValueError(f"c_size={c_size} exceeds 3/4 of mn={mn}")
        jobs.extend((mn, c_size, master_seed, g, k, config) for k in range(trials))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(_one_trial, jobs, chunksize=4))
    else:
        out = [_one_trial(j) for j in jobs]

    points = []
    for g, (mn, c_size) in enumerate(grid):
        chunk = out[g * trials:(g + 1) * trials]
        total = [r[0] for r in chunk]
        search = [r[1] for r in chunk]
        calls = sum(r[2] for r in chunk)
        hits = sum(r[3] for r in chunk)
        points.append(
            ScalingPoint(
                mn=mn,
                c_size=c_size,
                mean_queries=statistics.fmean(total),
                median_queries=float(statistics.median(total)),
                trials=trials,
                seed=master_seed,
                p_success_per_call=hits / calls if calls else float("nan"),
                mean_search_queries=statistics.fmean(search),
                median_search_queries=float(statistics.median(search)),
                mismatches=sum(r[4] for r in chunk),
            )
        )
    return points


def scaling_csv(points: Sequence[ScalingPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for p in points:
        d = asdict(p)
        w.writerow(
            [d["mn"], d["c_size"], d["trials"], f"{d['mean_queries']:.4f}",
             f"{d['median_queries']:.1f}", f"{d['p_success_per_call']:.6f}", d["seed"]]
        )
    return buf.getvalue()


def summary_table(points: Sequence[ScalingPoint]) -> str:
    head = f"{'mn':>8} {'|C|':>5} {'trials':>6} {'mean_q':>10} {'median_q':>10} {'q/sqrt(mn|C|)':>14} {'p_call':>7}"
    lines = [head, "-" * len(head)]
    for p in points:
        ratio = p.median_queries / math.sqrt(p.mn * max(p.c_size, 1))
        lines.append(
            f"{p.mn:>8} {p.c_size:>5} {p.trials:>6} {p.mean_queries:>10.1f} "
            f"{p.median_queries:>10.1f} {ratio:>14.3f} {p.p_success_per_call:>7.3f}"
        )
    return "\n".join(lines)


def lambda_fit(points: Sequence[ScalingPoint], search_only: bool = False) -> tuple[float, float]:
    """Geometric-mean constant in ``median ~ lambda * sqrt(mn * |C|)`` and the worst relative deviation."""
    ratios = []
    for p in points:
        med = p.median_search_queries if search_only else p.median_queries
        ratios.append(med / math.sqrt(p.mn * p.c_size))
    lam = math.exp(statistics.fmean(math.log(r) for r in ratios))
    spread = max(abs(r / lam - 1) for r in ratios)
    return lam, spread
