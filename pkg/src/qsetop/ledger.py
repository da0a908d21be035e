"""Query accounting shared by the engines and the outer loop."""

from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass
class QueryLedger:
    ggi_queries: int = 0
    measurements: int = 0
    classical_checks: int = 0

    def add(self, other: "QueryLedger") -> None:
        self.ggi_queries += other.ggi_queries
        self.measurements += other.measurements
        self.classical_checks += other.classical_checks

    def as_dict(self) -> dict:
        return asdict(self)
