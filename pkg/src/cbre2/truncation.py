"""Truncation predicates: rules that zero out disallowed jumps.

The branching rule keeps a jump z iff |z| <= k (norm_cap), iff z lies in
the unit square (unit_square), or always (none).  The environment rule
clips positive environment jumps above a level; `inf` means no clipping.
Predicates compose with a spec's own trunc_level by taking the minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NONE = "none"
NORM_CAP = "norm_cap"
UNIT_SQUARE = "unit_square"


@dataclass(frozen=True)
class BranchingRule:
    kind: str = NONE
    k: float = math.inf

    def __post_init__(self):
        if self.kind not in (NONE, NORM_CAP, UNIT_SQUARE):
            raise ValueError(f"unknown branching rule {self.kind!r}")
        if self.kind == NORM_CAP and not (self.k > 0):
            raise ValueError("norm_cap level must be > 0")

    @property
    def cap(self) -> float:
        return self.k if self.kind == NORM_CAP else math.inf

    @property
    def square(self) -> bool:
        return self.kind == UNIT_SQUARE

    def keep(self, z: np.ndarray) -> np.ndarray:
        """Boolean mask of kept jumps for an (n, 2) array."""
        z = np.atleast_2d(z)
        if self.kind == NORM_CAP and math.isfinite(self.k):
            return np.hypot(z[:, 0], z[:, 1]) <= self.k
        if self.kind == UNIT_SQUARE:
            return (z[:, 0] <= 1.0) & (z[:, 1] <= 1.0)
        return np.ones(len(z), dtype=bool)

    def at_most_as_permissive_as(self, other: "BranchingRule") -> bool:
        """True when every jump this rule keeps, `other` keeps too."""
        if self.kind == UNIT_SQUARE:
            return other.kind == UNIT_SQUARE or other.cap >= math.sqrt(2.0)
        if other.kind == UNIT_SQUARE:
            return False
        return self.cap <= other.cap


KEEP_ALL = BranchingRule(NONE)


@dataclass(frozen=True)
class TruncationPredicate:
    """Pair of rules applied to branching jumps and environment jumps."""

    branching: BranchingRule = KEEP_ALL
    env_clip: float = math.inf

    def __post_init__(self):
        if not (self.env_clip >= 1.0):
            raise ValueError("env clip level must be >= 1 (or inf)")

    def effective_env_clip(self, spec_trunc_level: float) -> float:
        return min(self.env_clip, spec_trunc_level)

    def at_most_as_permissive_as(self, other: "TruncationPredicate") -> bool:
        return (
            self.branching.at_most_as_permissive_as(other.branching)
            and self.env_clip <= other.env_clip
        )


IDENTITY = TruncationPredicate()


def norm_cap(k: float) -> TruncationPredicate:
    return TruncationPredicate(branching=BranchingRule(NORM_CAP, k))


def unit_square() -> TruncationPredicate:
    return TruncationPredicate(branching=BranchingRule(UNIT_SQUARE))
