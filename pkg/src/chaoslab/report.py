"""Outcome records for budgeted searches."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

FOUND = "FOUND"
CERTIFIED_BOUND = "CERTIFIED_BOUND"
EXHAUSTED = "EXHAUSTED"


@dataclass
class WitnessReport:
    status: str
    witness: Any = None
    certificate: Any = None
    budget_used: dict = field(default_factory=dict)
    seed: int | None = None
    # non-serialized payload, e.g. the orbit found by is_finite_orbit
    payload: Any = field(default=None, repr=False, compare=False)

    @property
    def ok(self) -> bool:
        return self.status in (FOUND, CERTIFIED_BOUND)

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "witness": None if self.witness is None else str(self.witness),
            "certificate": self.certificate,
            "budget_used": dict(self.budget_used),
            "seed": self.seed,
        }
