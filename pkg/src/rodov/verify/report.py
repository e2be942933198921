"""Check reports."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any


@dataclass
class CheckReport:
    """Outcome of one inequality check.

    ``passed`` is true exactly when ``worst_slack >= -tol``.  ``hypothesis``
    maps each required derivative order to its measured norm, bound and status.
    """

    name: str
    passed: bool
    worst_slack: float
    tol: float
    witness: dict[str, Any] = field(default_factory=dict)
    hypothesis: dict[int, dict[str, Any]] = field(default_factory=dict)
    case: str | None = None
    notes: str = ""
    values: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_slack(cls, name: str, slack: float, tol: float, **kw) -> "CheckReport":
        return cls(name=name, passed=bool(slack >= -tol), worst_slack=float(slack), tol=float(tol), **kw)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hypothesis"] = {str(k): v for k, v in self.hypothesis.items()}
        return _clean(d)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item"):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj
