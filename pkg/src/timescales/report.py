"""Outcome of checking one identity on one instance."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

REPORT_FIELDS = ("identity_name", "scale_id", "points_checked", "max_residual", "tolerance", "passed")


@dataclass
class IdentityReport:
    identity_name: str
    scale_id: str
    points_checked: int
    max_residual: float
    tolerance: float
    passed: bool = field(init=False)
    # diagnostics kept off the wire format
    skipped: int = field(default=0, compare=False)
    witness: dict[str, Any] | None = field(default=None, compare=False)
    error: str | None = field(default=None, compare=False)

    def __post_init__(self):
        self.passed = bool(self.max_residual <= self.tolerance)

    @classmethod
    def failure(cls, identity_name: str, scale_id: str, error: str) -> "IdentityReport":
        """A report for a cell that raised instead of producing a residual."""
        return cls(identity_name, scale_id, 0, math.inf, 0.0, error=error)

    def to_dict(self) -> dict[str, Any]:
        return {name: getattr(self, name) for name in REPORT_FIELDS}
