"""Classical record store for the two input sets.

Records live in "electronic memory": an ordered, index-stable list of
fixed-dimension unsigned-integer vectors.  Padding records bring a set up to
a power-of-two size and tombstones overwrite found solutions; neither kind
ever matches anything, including each other.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

DEFAULT_VALUE_BOUND = 2**16

LIVE = "live"
PAD = "pad"
TOMBSTONE = "tombstone"

# Fresh serials for pad/tombstone records.  Only their distinctness matters.
_uid_counter = itertools.count(1)


class DatasetError(ValueError):
    """Raised for malformed record files or invalid dataset operations."""


@dataclass(frozen=True)
class Record:
    values: tuple[int, ...]
    kind: str = LIVE
    uid: int | None = None

    @property
    def is_live(self) -> bool:
        return self.kind == LIVE

    @property
    def dimension(self) -> int:
        return len(self.values)

    def __str__(self) -> str:
        if self.is_live:
            return "(" + ",".join(str(v) for v in self.values) + ")"
        return f"<{self.kind}#{self.uid}>"


def _filler(kind: str, dimension: int) -> Record:
    return Record(values=(0,) * dimension, kind=kind, uid=next(_uid_counter))


@dataclass(frozen=True)
class Dataset:
    """Ordered records; position in ``records`` is the quantum index."""

    records: tuple[Record, ...]
    dimension: int
    logical_size: int
    value_bound: int = DEFAULT_VALUE_BOUND
    _live_index: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        index = {}
        for pos, rec in enumerate(self.records):
            if rec.dimension != self.dimension:
                raise DatasetError(
                    f"record {pos} has dimension {rec.dimension}, expected {self.dimension}"
                )
            if rec.is_live:
                if rec.values in index:
                    raise DatasetError(f"duplicate live record {rec} at index {pos}")
                index[rec.values] = pos
        object.__setattr__(self, "_live_index", index)

    @property
    def padded_size(self) -> int:
        return len(self.records)

    @property
    def index_bits(self) -> int:
        """Register width; only meaningful once padded."""
        return max(self.padded_size - 1, 0).bit_length()

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, i: int) -> Record:
        return self.records[i]

    def live_records(self) -> list[Record]:
        return [r for r in self.records if r.is_live]

    def live_values(self) -> set[tuple[int, ...]]:
        return set(self._live_index)

    def position_of(self, values: Sequence[int]) -> int | None:
        return self._live_index.get(tuple(values))

    def manifest(self) -> dict:
        live = sorted(self._live_index)
        digest = hashlib.sha256(
            "\n".join(" ".join(map(str, v)) for v in live).encode()
        ).hexdigest()
        return {
            "logical_size": self.logical_size,
            "padded_size": self.padded_size,
            "dimension": self.dimension,
            "live_records": len(live),
            "checksum": digest,
        }

    def manifest_text(self) -> str:
        return json.dumps(self.manifest(), indent=2, sort_keys=True)


def from_values(
    rows: Iterable[Sequence[int]],
    dimension: int | None = None,
    value_bound: int = DEFAULT_VALUE_BOUND,
    dedup: bool = False,
    pad: bool = True,
) -> Dataset:
    """Build a dataset from in-memory vectors (validated like a file)."""
    rows = [tuple(int(v) for v in r) for r in rows]
    if not rows:
        raise DatasetError("empty set")
    if dimension is None:
        dimension = len(rows[0])
    lines = [" ".join(map(str, r)) for r in rows]
    return load_dataset("\n".join(lines), dimension, value_bound, dedup=dedup, pad=pad)


def load_dataset(
    source: str,
    dimension: int,
    value_bound: int = DEFAULT_VALUE_BOUND,
    dedup: bool = False,
    pad: bool = True,
) -> Dataset:
    """Parse record-file text: one record per line, space-separated integers.

    Blank lines and ``#`` comments are skipped.  Duplicate live records are
    rejected unless ``dedup`` is set, in which case later copies are dropped.
    """
    if dimension < 1:
        raise DatasetError("dimension must be at least 1")
    if value_bound < 1:
        raise DatasetError("value_bound must be positive")
    records: list[Record] = []
    seen: dict[tuple[int, ...], int] = {}
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        try:
            values = tuple(int(p) for p in parts)
        except ValueError:
            raise DatasetError(f"line {lineno}: not an integer vector: {raw.strip()!r}") from None
        if len(values) != dimension:
            raise DatasetError(
                f"line {lineno}: expected {dimension} values, got {len(values)}"
            )
        if any(v < 0 or v >= value_bound for v in values):
            raise DatasetError(f"line {lineno}: values must lie in [0, {value_bound})")
        if values in seen:
            if dedup:
                continue
            raise DatasetError(
                f"line {lineno}: duplicate record, first seen on line {seen[values]}"
            )
        seen[values] = lineno
        records.append(Record(values))
    if not records:
        raise DatasetError("empty set")
    ds = Dataset(tuple(records), dimension, len(records), value_bound)
    return pad_to_pow2(ds) if pad else ds


def read_dataset(path, dimension: int, value_bound: int = DEFAULT_VALUE_BOUND, dedup: bool = False) -> Dataset:
    with open(path) as fh:
        text = fh.read()
    try:
        return load_dataset(text, dimension, value_bound, dedup=dedup)
    except DatasetError as exc:
        raise DatasetError(f"{path}: {exc}") from None


def pad_to_pow2(ds: Dataset) -> Dataset:
    if ds.logical_size < 1:
        raise DatasetError("cannot pad an empty dataset")
    target = 1 << (len(ds.records) - 1).bit_length()
    if target == len(ds.records):
        return ds
    fillers = tuple(_filler(PAD, ds.dimension) for _ in range(target - len(ds.records)))
    return replace(ds, records=ds.records + fillers)


def match_fn(a: Record, b: Record) -> int:
    if a.dimension != b.dimension:
        raise DatasetError(f"dimension mismatch: {a.dimension} vs {b.dimension}")
    return int(a.is_live and b.is_live and a.values == b.values)


def _check_dims(A: Dataset, B: Dataset) -> None:
    if A.dimension != B.dimension:
        raise DatasetError(f"dimension mismatch: {A.dimension} vs {B.dimension}")


def brute_force_intersection(A: Dataset, B: Dataset) -> set[Record]:
    """Full double-loop search; the reference answer for everything else."""
    _check_dims(A, B)
    out = set()
    for a in A.records:
        for b in B.records:
            if match_fn(a, b):
                out.add(Record(a.values))
    return out


def marked_pairs(A: Dataset, B: Dataset) -> frozenset[tuple[int, int]]:
    """Index pairs (i, j) with ``match_fn(A[i], B[j]) == 1``.

    Uses the live-value index of each side instead of the double loop, so it
    stays an independent route from :func:`brute_force_intersection`.
    """
    _check_dims(A, B)
    small, large, swap = (A, B, False) if len(A._live_index) <= len(B._live_index) else (B, A, True)
    pairs = []
    for values, p in small._live_index.items():
        q = large._live_index.get(values)
        if q is not None:
            pairs.append((q, p) if swap else (p, q))
    return frozenset(pairs)


def tombstone_pair(A: Dataset, i0: int, B: Dataset, j0: int) -> tuple[Dataset, Dataset]:
    if not (0 <= i0 < len(A)) or not (0 <= j0 < len(B)):
        raise DatasetError(f"pair ({i0}, {j0}) out of range")
    if not match_fn(A[i0], B[j0]):
        raise DatasetError(f"pair ({i0}, {j0}) is not a current match")
    return _overwrite(A, i0), _overwrite(B, j0)


def _overwrite(ds: Dataset, pos: int) -> Dataset:
    recs = list(ds.records)
    recs[pos] = _filler(TOMBSTONE, ds.dimension)
    return replace(ds, records=tuple(recs))


def complement(universe: Dataset, subset: Dataset) -> list[tuple[int, ...]]:
    """Live values of ``universe`` not in ``subset``, in universe order."""
    keep = subset.live_values()
    return [r.values for r in universe.records if r.is_live and r.values not in keep]


def decode_values(code: int, dimension: int, value_bound: int) -> tuple[int, ...]:
    out = []
    for _ in range(dimension):
        code, digit = divmod(code, value_bound)
        out.append(digit)
    return tuple(reversed(out))


def planted_pair(
    n_a: int,
    n_b: int,
    c_size: int,
    rng: np.random.Generator,
    dimension: int = 2,
    value_bound: int = DEFAULT_VALUE_BOUND,
) -> tuple[Dataset, Dataset]:
    """Random distinct records with exactly ``c_size`` values in common.

    ``n_a + n_b - c_size`` vectors are drawn without replacement from the
    whole value space; the first ``c_size`` go to both sets, the rest are
    split between them, and each set is shuffled independently.
    """
    if not 0 <= c_size <= min(n_a, n_b):
        raise DatasetError(f"c_size={c_size} must lie in [0, min({n_a}, {n_b})]")
    if n_a < 1 or n_b < 1:
        raise DatasetError("planted sets must be non-empty")
    space = value_bound**dimension
    total = n_a + n_b - c_size
    if total > space:
        raise DatasetError(f"value space {space} too small for {total} distinct records")
    codes = rng.choice(space, size=total, replace=False)
    vecs = [decode_values(int(c), dimension, value_bound) for c in codes]
    common = vecs[:c_size]
    only_a = vecs[c_size:n_a]
    only_b = vecs[n_a:]
    rows_a = common + only_a
    rows_b = common + only_b
    rows_a = [rows_a[k] for k in rng.permutation(len(rows_a))]
    rows_b = [rows_b[k] for k in rng.permutation(len(rows_b))]
    return (
        from_values(rows_a, dimension, value_bound),
        from_values(rows_b, dimension, value_bound),
    )


def random_instance(
    n_bits: int,
    m_bits: int,
    rng: np.random.Generator,
    dimension: int = 1,
    value_bound: int = 8,
    tombstones: bool = True,
) -> tuple[Dataset, Dataset]:
    """Small random pair of datasets with padded sizes ``2**n_bits`` x ``2**m_bits``.

    Logical sizes vary so padding shows up, and a random subset of the common
    records may be tombstoned.
    """
    n, m = 1 << n_bits, 1 << m_bits
    n_a = int(rng.integers(n // 2 + 1, n + 1)) if n > 1 else 1
    n_b = int(rng.integers(m // 2 + 1, m + 1)) if m > 1 else 1
    space = value_bound**dimension
    lo = max(0, n_a + n_b - space)
    c = int(rng.integers(lo, min(n_a, n_b) + 1))
    A, B = planted_pair(n_a, n_b, c, rng, dimension, value_bound)
    if tombstones:
        for i, j in sorted(marked_pairs(A, B)):
            if rng.random() < 0.3:
                A, B = tombstone_pair(A, i, B, j)
    return A, B
