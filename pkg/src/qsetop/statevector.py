"""Reduced Grover dynamics over the joint (i, j) index space.

Basis index ``k = i * M + j`` with register 1 (index into A) as the high
bits.  The data registers are not simulated here; the phase oracle acts
directly on the marked index pairs.  ``full_circuit`` checks that this is
exactly what the five-register construction does.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .ledger import QueryLedger

DEFAULT_MAX_BITS = 26
NORM_TOL = 1e-9


class SimulationError(RuntimeError):
    pass


@dataclass
class StateVector:
    amps: np.ndarray
    n_bits: int
    m_bits: int

    @property
    def n(self) -> int:
        return 1 << self.n_bits

    @property
    def m(self) -> int:
        return 1 << self.m_bits

    @property
    def size(self) -> int:
        return self.amps.shape[0]

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amps, self.amps).real))

    def probabilities(self) -> np.ndarray:
        return self.amps.real**2 + self.amps.imag**2

    def copy(self) -> "StateVector":
        return StateVector(self.amps.copy(), self.n_bits, self.m_bits)

    def dump(self) -> str:
        """Plain-text amplitude listing, one basis state per line."""
        lines = []
        for k, a in enumerate(self.amps):
            i, j = divmod(k, self.m)
            lines.append(f"{i} {j} {a.real:+.17e} {a.imag:+.17e}")
        return "\n".join(lines)


def uniform_init(n_bits: int, m_bits: int, max_bits: int = DEFAULT_MAX_BITS) -> StateVector:
    if n_bits < 0 or m_bits < 0:
        raise ValueError("register widths must be non-negative")
    if n_bits + m_bits > max_bits:
        raise SimulationError(
            f"{n_bits + m_bits} index bits exceeds simulator cap of {max_bits}"
        )
    size = 1 << (n_bits + m_bits)
    amps = np.full(size, 1.0 / math.sqrt(size), dtype=np.complex128)
    return StateVector(amps, n_bits, m_bits)


def marked_indices(marked: Iterable[tuple[int, int]], n_bits: int, m_bits: int) -> np.ndarray:
    n, m = 1 << n_bits, 1 << m_bits
    flat = []
    for i, j in marked:
        if not (0 <= i < n and 0 <= j < m):
            raise ValueError(f"marked pair ({i}, {j}) outside {n} x {m} index space")
        flat.append(i * m + j)
    return np.array(sorted(flat), dtype=np.intp)


def apply_phase_oracle(s: StateVector, marked) -> StateVector:
    idx = marked_indices(marked, s.n_bits, s.m_bits)
    out = s.copy()
    out.amps[idx] *= -1
    return out


def apply_diffusion(s: StateVector) -> StateVector:
    out = s.copy()
    _diffuse_inplace(out.amps)
    return out


def _diffuse_inplace(amps: np.ndarray) -> None:
    mean = amps.mean()
    np.subtract(2 * mean, amps, out=amps)


def grover_power(
    s: StateVector,
    marked,
    k: int,
    ledger: QueryLedger | None = None,
) -> StateVector:
    """Apply ``(diffusion . oracle)`` k times; each round is one query."""
    if k < 0:
        raise ValueError("k must be non-negative")
    idx = marked_indices(marked, s.n_bits, s.m_bits)
    out = s.copy()
    amps = out.amps
    for _ in range(k):
        amps[idx] *= -1
        _diffuse_inplace(amps)
    if ledger is not None:
        ledger.ggi_queries += k
    return out


def success_probability(s: StateVector, marked) -> float:
    idx = marked_indices(marked, s.n_bits, s.m_bits)
    if idx.size == 0:
        return 0.0
    a = s.amps[idx]
    return float(np.sum(a.real**2 + a.imag**2))


def theoretical_success(k: int, t: int, mn: int) -> float:
    """Closed form ``sin^2((2k+1) * asin(sqrt(t/mn)))``."""
    if mn < 1 or t < 0 or t > mn:
        raise ValueError(f"need 0 <= t <= mn, got t={t}, mn={mn}")
    if t == 0:
        warnings.warn("success probability with no marked states is 0 by convention", stacklevel=2)
        return 0.0
    theta = math.asin(math.sqrt(t / mn))
    return math.sin((2 * k + 1) * theta) ** 2


def sample_index(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw using a single ``rng.random()`` call."""
    cdf = np.cumsum(probs)
    u = rng.random() * cdf[-1]
    k = int(np.searchsorted(cdf, u, side="right"))
    return min(k, probs.shape[0] - 1)


def measure_index(
    s: StateVector,
    rng: np.random.Generator,
    ledger: QueryLedger | None = None,
) -> tuple[int, int]:
    """Sample (i, j) with Born probabilities.  The state is left untouched."""
    probs = s.probabilities()
    total = float(probs.sum())
    if abs(total - 1.0) > NORM_TOL:
        raise SimulationError(f"state norm^2 {total!r} deviates from 1")
    k = sample_index(probs, rng)
    if ledger is not None:
        ledger.measurements += 1
    return divmod(k, s.m)
