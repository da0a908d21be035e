"""Seeded random streams.

All randomness goes through numpy's PCG64 bit generator seeded by a
``SeedSequence``.  A trial's stream is keyed by ``(master_seed, *ids)`` via
``spawn_key``, so results do not depend on execution order or thread count.
"""

from __future__ import annotations

import secrets

import numpy as np


def trial_rng(master_seed: int, *ids: int) -> np.random.Generator:
    seq = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(i) for i in ids))
    return np.random.Generator(np.random.PCG64(seq))


def resolve_seed(seed: int | None) -> int:
    """Return ``seed`` or a fresh 64-bit seed from OS entropy."""
    if seed is None:
        return secrets.randbits(64)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return int(seed)
