"""Verification report records and their JSON form."""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class VerificationReport:
    """Outcome of one named check.

    `passed` must equal |residual| <= tolerance whenever both are set;
    checks with several sub-results (per-component, per-assumption) store
    them under `details` and report the worst case in residual/tolerance.
    """

    check: str
    kind: str
    passed: bool
    lhs: float | None = None
    rhs: float | None = None
    residual: float | None = None
    tolerance: float | None = None
    error_estimates: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    model: str | None = None
    moment: str | None = None
    quadrature: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        out = {
            "check": self.check,
            "kind": self.kind,
            "passed": bool(self.passed),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "error_estimates": _plain(self.error_estimates),
            "details": _plain(self.details),
            "model": self.model,
            "moment": self.moment,
            "quadrature": _plain(self.quadrature),
            "wall_time": self.wall_time,
        }
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, allow_nan=True)


def _plain(obj):
    """Recursively convert numpy scalars/arrays to JSON-friendly types."""
    import numpy as np

    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj
