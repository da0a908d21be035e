"""Exact simulation of Grover-based set intersection with a classical store."""

from .dataset import (
    Dataset,
    DatasetError,
    Record,
    brute_force_intersection,
    from_values,
    load_dataset,
    marked_pairs,
    match_fn,
    pad_to_pow2,
    planted_pair,
    tombstone_pair,
)
from .ledger import QueryLedger
from .qintersection import IntersectionResult, RunConfig, q_intersection, q_union

__version__ = "0.1.0"
