from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

EPS = 1e-8

OBJECTIVES = ("coverage", "ordering", "adjacency", "factuality")


def clamped_log(x: float) -> float:
    """``ln`` of ``x`` clamped to ``[EPS, 1]``."""
    return math.log(min(1.0, max(EPS, float(x))))


@dataclass(frozen=True)
class DiscriminatorScore:
    objective: str
    value: float
    detail: dict[str, Any] = field(default_factory=dict)
    flags: frozenset[str] = frozenset()


class ScoringError(ValueError):
    pass


class EmptyRoles(ScoringError):
    pass


class MissingRoles(ScoringError):
    pass


class MissingExternalProbs(ScoringError):
    pass


class MissingSaliency(ScoringError):
    pass


class FeatureMismatch(ScoringError):
    pass


class DegenerateData(ValueError):
    pass
