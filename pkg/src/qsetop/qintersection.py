"""Hybrid intersection: repeated quantum search plus classical bookkeeping.

Every solution found by :func:`~qsetop.amplification.subroutine1` is added
to C and its two records are tombstoned in the classical store, so the next
search sees one solution fewer.  The loop stops after a "no output" call
followed by ``confirm_repeats`` more empty calls.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .amplification import default_iteration_cap, subroutine1
from .dataset import (
    Dataset,
    DatasetError,
    Record,
    complement,
    from_values,
    match_fn,
    tombstone_pair,
)
from .ledger import QueryLedger
from .rng import trial_rng

FOUND = "found"
NO_OUTPUT = "no-output"
REJECTED = "rejected-duplicate"
PREFILTER = "prefilter"


@dataclass(frozen=True)
class RunConfig:
    master_seed: int = 0
    iteration_cap_factor: float = 3
    confirm_repeats: int = 2
    dense_prefilter_samples: int | None = None
    engine: str = "reduced"

    def __post_init__(self):
        if self.confirm_repeats < 1:
            raise ValueError("confirm_repeats must be at least 1")
        if self.iteration_cap_factor < 1:
            raise ValueError("iteration_cap_factor must be at least 1")

    def prefilter_samples(self, mn: int) -> int:
        if self.dense_prefilter_samples is not None:
            return self.dense_prefilter_samples
        return 4 * math.ceil(math.log2(mn + 1))


@dataclass(frozen=True)
class Round:
    kind: str
    pair: tuple[int, int] | None
    queries: int  # ledger.ggi_queries after this round


@dataclass
class IntersectionResult:
    elements: set[Record]
    ledger: QueryLedger
    rounds: int = 0
    trace: list[Round] = field(default_factory=list)

    @property
    def search_queries(self) -> int:
        """Grover iterations spent up to and including the last found solution."""
        spent = 0
        for r in self.trace:
            if r.kind == FOUND:
                spent = r.queries
        return spent

    def sorted_elements(self) -> list[tuple[int, ...]]:
        return sorted(r.values for r in self.elements)

    def report(self) -> str:
        lines = [
            "C = {" + ",".join(str(Record(v)) for v in self.sorted_elements()) + "}",
            f"size: {len(self.elements)}",
            f"rounds: {self.rounds}",
            f"ggi_queries: {self.ledger.ggi_queries}",
            f"measurements: {self.ledger.measurements}",
            f"classical_checks: {self.ledger.classical_checks}",
            "trace:",
        ]
        for n, r in enumerate(self.trace):
            pair = "-" if r.pair is None else f"{r.pair[0]},{r.pair[1]}"
            lines.append(f"  {n} {r.kind} {pair} {r.queries}")
        return "\n".join(lines)

    def csv_row(self, **extra) -> dict:
        row = dict(extra)
        row.update(
            size=len(self.elements),
            rounds=self.rounds,
            ggi_queries=self.ledger.ggi_queries,
            search_queries=self.search_queries,
            measurements=self.ledger.measurements,
            classical_checks=self.ledger.classical_checks,
        )
        return row


def results_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def dense_prefilter(
    A: Dataset,
    B: Dataset,
    rng: np.random.Generator,
    samples: int,
    ledger: QueryLedger | None = None,
) -> list[tuple[int, int]]:
    """Classically probe uniform random (i, j) pairs; return the distinct hits.

    If more than 3/4 of all pairs match, at least one hit comes back with
    probability at least ``1 - 4**-samples``.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    ii = rng.integers(0, len(A), size=samples)
    jj = rng.integers(0, len(B), size=samples)
    hits = []
    for i, j in zip(ii.tolist(), jj.tolist()):
        if ledger is not None:
            ledger.classical_checks += 1
        if match_fn(A[i], B[j]) and (i, j) not in hits:
            hits.append((i, j))
    return hits


def q_intersection(
    A: Dataset,
    B: Dataset,
    config: RunConfig | None = None,
    rng: np.random.Generator | None = None,
) -> IntersectionResult:
    if config is None:
        config = RunConfig()
    if A.dimension != B.dimension:
        raise DatasetError(f"dimension mismatch: {A.dimension} vs {B.dimension}")
    if rng is None:
        rng = trial_rng(config.master_seed)
    mn = len(A) * len(B)
    cap = default_iteration_cap(mn, config.iteration_cap_factor)
    ledger = QueryLedger()
    result = IntersectionResult(set(), ledger)

    for i0, j0 in dense_prefilter(A, B, rng, config.prefilter_samples(mn), ledger):
        result.elements.add(Record(A[i0].values))
        A, B = tombstone_pair(A, i0, B, j0)
        result.trace.append(Round(PREFILTER, (i0, j0), ledger.ggi_queries))

    def call():
        result.rounds += 1
        return subroutine1(A, B, rng, ledger, iteration_cap=cap, engine=config.engine)

    def accept(pair):
        nonlocal A, B
        i0, j0 = pair
        value = Record(A[i0].values)
        if value in result.elements:
            # Cannot happen after tombstoning; kept visible in the trace.
            result.trace.append(Round(REJECTED, pair, ledger.ggi_queries))
        else:
            result.elements.add(value)
            result.trace.append(Round(FOUND, pair, ledger.ggi_queries))
        A, B = tombstone_pair(A, i0, B, j0)

    while True:
        # Step 2: search until a call comes back empty.
        while (pair := call()) is not None:
            accept(pair)
        result.trace.append(Round(NO_OUTPUT, None, ledger.ggi_queries))
        # Step 3: confirm emptiness; any hit resumes step 2.
        for _ in range(config.confirm_repeats):
            pair = call()
            if pair is not None:
                accept(pair)
                break
            result.trace.append(Round(NO_OUTPUT, None, ledger.ggi_queries))
        else:
            return result


def q_union(
    A: Dataset,
    B: Dataset,
    universe: Dataset,
    config: RunConfig | None = None,
    rng: np.random.Generator | None = None,
) -> set[Record]:
    """``universe \\ (A' & B')`` where ``'`` is complement within ``universe``."""
    have = universe.live_values()
    for name, ds in (("A", A), ("B", B)):
        stray = ds.live_values() - have
        if stray:
            raise DatasetError(f"{name} has {len(stray)} records outside the universe")
    comp_a = complement(universe, A)
    comp_b = complement(universe, B)
    both_out: set[tuple[int, ...]] = set()
    if comp_a and comp_b:
        res = q_intersection(
            from_values(comp_a, universe.dimension, universe.value_bound),
            from_values(comp_b, universe.dimension, universe.value_bound),
            config,
            rng,
        )
        both_out = {r.values for r in res.elements}
    return {Record(v) for v in have if v not in both_out}
