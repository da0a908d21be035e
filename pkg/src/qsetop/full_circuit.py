"""Five-register model of the general Grover iteration.

Registers, most significant first::

    |i>_1 |j>_2 |x>_3 |y>_4 |f>_5

1 and 2 hold indices into A and B, 3 and 4 hold record encodings, 5 is the
match flag.  Amplitudes are stored as a flat array but handled as a tensor of
shape ``(N, M, X, X, 2)``.  Every operator is a basis permutation or a phase
map, applied with numpy fancy indexing; there is no gate decomposition.

Record encoding: each coordinate gets ``value_bound.bit_length()`` bits,
big-endian, so at least one code per field (``>= value_bound``) never belongs
to a live record.  Pad and tombstone records load such a reserved code, and
the compute oracle only fires on equal *live* codes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, Record, marked_pairs
from .ledger import QueryLedger
from .statevector import SimulationError, StateVector, grover_power, uniform_init

DEFAULT_MAX_TOTAL_BITS = 16
ANCILLA_TOL = 1e-9


@dataclass(frozen=True)
class RegisterLayout:
    n_bits: int
    m_bits: int
    dimension: int
    value_bound: int
    max_total_bits: int = DEFAULT_MAX_TOTAL_BITS

    def __post_init__(self):
        if self.total_bits > self.max_total_bits:
            raise SimulationError(
                f"layout needs {self.total_bits} qubits, cap is {self.max_total_bits}"
            )

    @property
    def value_bits(self) -> int:
        return self.value_bound.bit_length()

    @property
    def a_bits(self) -> int:
        return self.dimension * self.value_bits

    @property
    def b_bits(self) -> int:
        return self.a_bits

    @property
    def total_bits(self) -> int:
        return self.n_bits + self.m_bits + self.a_bits + self.b_bits + 1

    @property
    def shape(self) -> tuple[int, int, int, int, int]:
        x = 1 << self.a_bits
        return (1 << self.n_bits, 1 << self.m_bits, x, x, 2)

    @classmethod
    def for_datasets(cls, A: Dataset, B: Dataset, max_total_bits: int = DEFAULT_MAX_TOTAL_BITS):
        if A.dimension != B.dimension:
            raise SimulationError("datasets differ in dimension")
        bound = max(A.value_bound, B.value_bound)
        return cls(A.index_bits, B.index_bits, A.dimension, bound, max_total_bits)


@dataclass
class CircuitState:
    amps: np.ndarray
    layout: RegisterLayout

    def tensor(self) -> np.ndarray:
        return self.amps.reshape(self.layout.shape)

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amps, self.amps).real))

    def ancilla_mass(self) -> float:
        """Probability that registers 3-5 are not all zero."""
        t = self.tensor()
        p = self.amps.real**2 + self.amps.imag**2
        zero = t[:, :, 0, 0, 0]
        return float(max(p.sum() - np.sum(zero.real**2 + zero.imag**2), 0.0))


def encode(rec: Record, value_bound: int, value_bits: int) -> int:
    if rec.is_live:
        code = 0
        for v in rec.values:
            if v >= value_bound:
                raise SimulationError(f"value {v} does not fit below {value_bound}")
            code = (code << value_bits) | v
        return code
    spare = (1 << value_bits) - value_bound
    first = value_bound + (rec.uid or 0) % spare
    return first << (value_bits * (rec.dimension - 1))


def _codes(ds: Dataset, layout: RegisterLayout) -> np.ndarray:
    return np.array(
        [encode(r, layout.value_bound, layout.value_bits) for r in ds.records], dtype=np.intp
    )


def _live_mask(layout: RegisterLayout) -> np.ndarray:
    codes = np.arange(1 << layout.a_bits)
    field_mask = (1 << layout.value_bits) - 1
    live = np.ones(codes.shape, dtype=bool)
    for f in range(layout.dimension):
        live &= ((codes >> (f * layout.value_bits)) & field_mask) < layout.value_bound
    return live


def _check_fits(layout: RegisterLayout, A: Dataset, B: Dataset) -> None:
    if (len(A), len(B)) != layout.shape[:2]:
        raise SimulationError(
            f"index registers {layout.shape[:2]} do not fit datasets of size {(len(A), len(B))}"
        )
    if A.dimension != layout.dimension or B.dimension != layout.dimension:
        raise SimulationError("dataset dimension does not match layout")
    bound = max(A.value_bound, B.value_bound)
    if bound > layout.value_bound:
        raise SimulationError(f"value_bound {bound} exceeds layout bound {layout.value_bound}")


def init_superposed(layout: RegisterLayout, A: Dataset, B: Dataset) -> CircuitState:
    _check_fits(layout, A, B)
    t = np.zeros(layout.shape, dtype=np.complex128)
    t[:, :, 0, 0, 0] = 1.0 / np.sqrt(layout.shape[0] * layout.shape[1])
    return CircuitState(t.reshape(-1), layout)


def apply_load(s: CircuitState, A: Dataset, B: Dataset) -> CircuitState:
    """XOR the encodings of A[i] and B[j] into registers 3 and 4."""
    _check_fits(s.layout, A, B)
    n, m, x, y, _ = s.layout.shape
    ea = _codes(A, s.layout)
    eb = _codes(B, s.layout)
    xi = np.arange(x)[None, :] ^ ea[:, None]
    yj = np.arange(y)[None, :] ^ eb[:, None]
    t = s.tensor()
    new = t[
        np.arange(n)[:, None, None, None, None],
        np.arange(m)[None, :, None, None, None],
        xi[:, None, :, None, None],
        yj[None, :, None, :, None],
        np.arange(2)[None, None, None, None, :],
    ]
    return CircuitState(new.reshape(-1), s.layout)


def apply_compute(s: CircuitState) -> CircuitState:
    """Flip register 5 where registers 3 and 4 hold the same live code."""
    layout = s.layout
    hit = np.diag(_live_mask(layout))
    t = s.tensor()
    new = np.where(hit[None, None, :, :, None], t[..., ::-1], t)
    return CircuitState(new.reshape(-1), layout)


def apply_phase_flag(s: CircuitState) -> CircuitState:
    t = s.tensor().copy()
    t[..., 1] *= -1
    return CircuitState(t.reshape(-1), s.layout)


def apply_index_diffusion(s: CircuitState) -> CircuitState:
    """``2|xi><xi| - I`` on registers 1-2, identity on the rest."""
    n, m = s.layout.shape[:2]
    flat = s.amps.reshape(n * m, -1)
    new = 2 * flat.mean(axis=0, keepdims=True) - flat
    return CircuitState(new.reshape(-1), s.layout)


def apply_ggi(
    s: CircuitState,
    A: Dataset,
    B: Dataset,
    ledger: QueryLedger | None = None,
) -> CircuitState:
    """One general Grover iteration: load, compute, flip, uncompute, unload, diffuse."""
    if s.ancilla_mass() > ANCILLA_TOL:
        raise SimulationError("registers 3-5 must be zero before a Grover iteration")
    s = apply_load(s, A, B)
    s = apply_compute(s)
    s = apply_phase_flag(s)
    s = apply_compute(s)
    s = apply_load(s, A, B)
    s = apply_index_diffusion(s)
    if ledger is not None:
        ledger.ggi_queries += 1
    return s


def reduce_to_index(s: CircuitState) -> StateVector:
    mass = s.ancilla_mass()
    if mass > ANCILLA_TOL:
        raise SimulationError(f"state is entangled with ancillas (mass {mass:.3e})")
    block = s.tensor()[:, :, 0, 0, 0].reshape(-1).copy()
    block /= np.sqrt(np.vdot(block, block).real)
    return StateVector(block, s.layout.n_bits, s.layout.m_bits)


def compare_with_reduced(A: Dataset, B: Dataset, k_max: int) -> tuple[float, float]:
    """Run both models for k = 0..k_max; return (max amplitude delta, max ancilla mass).

    The ancilla mass is sampled after every general Grover iteration.
    """
    layout = RegisterLayout.for_datasets(A, B)
    marked = marked_pairs(A, B)
    s = init_superposed(layout, A, B)
    ref = uniform_init(layout.n_bits, layout.m_bits)
    worst_delta = float(np.max(np.abs(reduce_to_index(s).amps - ref.amps)))
    worst_mass = 0.0
    for _ in range(k_max):
        s = apply_ggi(s, A, B)
        worst_mass = max(worst_mass, s.ancilla_mass())
        ref = grover_power(ref, marked, 1)
        delta = float(np.max(np.abs(reduce_to_index(s).amps - ref.amps)))
        worst_delta = max(worst_delta, delta)
    return worst_delta, worst_mass
