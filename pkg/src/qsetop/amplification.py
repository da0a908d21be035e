"""Randomised Grover search when the number of solutions is unknown.

:func:`subroutine1` searches the joint index space of two datasets with the
general Grover iteration; :func:`bbht_reference` is the plain single-register
loop over a flag table, kept as an independent implementation for
differential tests.  Both consume random numbers in the same order (one
``integers`` draw for k, one ``random`` draw per measurement), so with a
degenerate second register they agree outcome for outcome.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import full_circuit as fc
from .dataset import Dataset, marked_pairs, match_fn
from .ledger import QueryLedger
from .statevector import (
    DEFAULT_MAX_BITS,
    grover_power,
    measure_index,
    sample_index,
    uniform_init,
)

LAMBDA_GROWTH = 6 / 5
DEFAULT_CAP_FACTOR = 3
ENGINES = ("reduced", "full")

__all__ = [
    "BbhtState",
    "QueryLedger",
    "bbht_reference",
    "choose_iterations",
    "default_iteration_cap",
    "grow_gamma",
    "subroutine1",
]


@dataclass
class BbhtState:
    """Schedule state: ``gamma`` bounds the next iteration count."""

    mn: int
    rng: np.random.Generator
    gamma: float = 1.0
    lambda_growth: float = LAMBDA_GROWTH
    total_ggi: int = 0
    cap: float = field(init=False)

    def __post_init__(self):
        if not 1.0 < self.lambda_growth < 4.0 / 3.0:
            raise ValueError("growth factor must lie strictly between 1 and 4/3")
        self.cap = math.sqrt(self.mn)
        if not 1.0 <= self.gamma <= max(self.cap, 1.0):
            raise ValueError(f"gamma={self.gamma} outside [1, sqrt(MN)]")


def choose_iterations(state: BbhtState) -> int:
    """Uniform k over the integers 0..floor(gamma)."""
    if state.gamma < 1:
        raise ValueError("gamma must be at least 1")
    return int(state.rng.integers(0, math.floor(state.gamma) + 1))


def grow_gamma(state: BbhtState) -> BbhtState:
    state.gamma = min(state.lambda_growth * state.gamma, state.cap)
    return state


def default_iteration_cap(mn: int, cap_factor: float = DEFAULT_CAP_FACTOR) -> int:
    return max(1, math.ceil(cap_factor * math.ceil(math.sqrt(mn))))


def subroutine1(
    A: Dataset,
    B: Dataset,
    rng: np.random.Generator,
    ledger: QueryLedger | None = None,
    iteration_cap: int | None = None,
    engine: str = "reduced",
    lambda_growth: float = LAMBDA_GROWTH,
    max_bits: int = DEFAULT_MAX_BITS,
) -> tuple[int, int] | None:
    """Find one index pair (i0, j0) with ``A[i0] == B[j0]``, or give up.

    Each round draws k, runs k Grover iterations from the uniform state,
    measures both index registers and checks the candidate classically.
    The call returns ``None`` once the Grover iterations spent in this call
    exceed ``iteration_cap`` (default ``3 * ceil(sqrt(MN))``).

    Parameters
    ----------
    engine : {"reduced", "full"}
        ``reduced`` simulates only the index registers with a phase oracle
        on the marked pairs.  ``full`` runs the five-register circuit and
        is limited to tiny instances.
    """
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    if ledger is None:
        ledger = QueryLedger()
    mn = len(A) * len(B)
    if iteration_cap is None:
        iteration_cap = default_iteration_cap(mn)
    if iteration_cap < 1:
        raise ValueError("iteration_cap must be at least 1")

    state = BbhtState(mn=mn, rng=rng, lambda_growth=lambda_growth)
    if engine == "reduced":
        marked = marked_pairs(A, B)
        start = uniform_init(A.index_bits, B.index_bits, max_bits)
        run = lambda k: grover_power(start, marked, k, ledger)  # noqa: E731
    else:
        layout = fc.RegisterLayout.for_datasets(A, B)
        psi0 = fc.init_superposed(layout, A, B)

        def run(k):
            s = psi0
            for _ in range(k):
                s = fc.apply_ggi(s, A, B, ledger)
            return fc.reduce_to_index(s)

    spent = 0
    while True:
        k = choose_iterations(state)
        s = run(k)
        spent += k
        state.total_ggi = spent
        i0, j0 = measure_index(s, rng, ledger)
        ledger.classical_checks += 1
        if match_fn(A[i0], B[j0]):
            return i0, j0
        if spent > iteration_cap:
            return None
        grow_gamma(state)


def bbht_reference(
    marked_flags,
    rng: np.random.Generator,
    cap: int | None = None,
    ledger: QueryLedger | None = None,
    lambda_growth: float = LAMBDA_GROWTH,
) -> int | None:
    """Single-register BBHT search over a 0/1 table ``T``; returns an index or None."""
    flags = np.asarray(marked_flags, dtype=bool)
    n = flags.shape[0]
    if n < 1 or n & (n - 1):
        raise ValueError("table length must be a power of two")
    if cap is None:
        cap = default_iteration_cap(n)
    if ledger is None:
        ledger = QueryLedger()
    root = math.sqrt(n)
    gamma = 1.0
    signs = np.where(flags, -1.0, 1.0)
    spent = 0
    while True:
        j = int(rng.integers(0, math.floor(gamma) + 1))
        psi = np.full(n, 1 / root)
        for _ in range(j):
            psi *= signs
            psi = 2 * psi.mean() - psi
        spent += j
        ledger.ggi_queries += j
        i0 = sample_index(psi * psi, rng)
        ledger.measurements += 1
        ledger.classical_checks += 1
        if flags[i0]:
            return i0
        if spent > cap:
            return None
        gamma = min(lambda_growth * gamma, root)
