"""Decision records shared by every classifier."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np


class GammaError(ValueError):
    """Input violates a documented precondition."""


class ConvergenceError(RuntimeError):
    """An iterative routine ran out of retries."""


@dataclass
class Verdict:
    """Boolean decision with a numeric defect and an optional witness.

    ``holds`` is always ``defect <= tol`` for the tolerance that produced the
    verdict; ``certificate`` carries whatever explains a failure (an offending
    root, a violating polynomial, a named identity) and ``diagnostics`` any
    extra per-check detail.
    """

    holds: bool
    defect: float
    tol: float
    certificate: Any = None
    diagnostics: dict = field(default_factory=dict)

    @classmethod
    def from_defect(cls, defect: float, tol: float, certificate=None, **diagnostics) -> "Verdict":
        defect = float(max(defect, 0.0))
        return cls(bool(defect <= tol), defect, float(tol), certificate, dict(diagnostics))

    def __bool__(self) -> bool:
        return self.holds

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "defect": self.defect,
            "tol": self.tol,
            "certificate": to_jsonable(self.certificate),
            "diagnostics": to_jsonable(self.diagnostics),
        }


def to_jsonable(obj):
    """Recursively turn numpy / complex payloads into plain JSON values."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if np.isfinite(x) else str(x)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()] if obj.ndim else to_jsonable(obj.item())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return str(obj)


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True)
