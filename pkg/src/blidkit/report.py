"""Criterion reports and JSON-safe conversion."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

PASS, FAIL, INDETERMINATE = "pass", "fail", "indeterminate"


def jsonable(obj: Any) -> Any:
    """Recursively convert numpy scalars/arrays and complex numbers for json.dumps."""
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        return [_num(obj.real), _num(obj.imag)]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _num(x) -> Any:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


@dataclass
class CriterionReport:
    criterion: str
    verdict: str
    constant: float
    witness: dict[str, Any] = field(default_factory=dict)
    sample_size: int = 0
    params: dict[str, Any] = field(default_factory=dict)
    details: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    # per-sample (witness, value) rows for CSV export; not part of the JSON payload
    samples: list[tuple[dict[str, Any], float]] = field(default_factory=list, repr=False)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_dict(self) -> dict[str, Any]:
        return jsonable({
            "criterion": self.criterion,
            "verdict": self.verdict,
            "constant": self.constant,
            "witness": self.witness,
            "sample_size": self.sample_size,
            "params": self.params,
            "details": self.details,
            "notes": self.notes,
        })


def relative_change(a: float, b: float, tiny: float = 1e-12) -> float:
    """|b - a| / max(|a|, |b|), with 0 when both are below ``tiny``."""
    scale = max(abs(a), abs(b))
    if scale <= tiny:
        return 0.0
    if math.isinf(scale):
        return 0.0 if a == b else math.inf
    return abs(b - a) / scale


def classify_trend(small: float, large: float, factor: float = 2.0, tiny: float = 1e-12) -> str:
    """'growing' when the constant on the doubled grid exceeds ``factor`` times the original."""
    if max(abs(small), abs(large)) <= tiny:
        return "stable"
    if math.isinf(large) and not math.isinf(small):
        return "growing"
    if small <= tiny:
        return "growing"
    return "growing" if large > factor * small else "stable"
