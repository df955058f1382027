"""Precision/recall/F1 triple shared by the tagging and classification harnesses."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class PRFScore:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "PRFScore":
        p = tp / (tp + fp) if tp + fp > 0 else 0.0
        r = tp / (tp + fn) if tp + fn > 0 else 0.0
        f = 2 * p * r / (p + r) if p + r > 0 else 0.0
        return cls(p, r, f)

    @classmethod
    def mean(cls, scores: list["PRFScore"]) -> "PRFScore":
        if not scores:
            return cls(0.0, 0.0, 0.0)
        n = len(scores)
        return cls(
            sum(s.precision for s in scores) / n,
            sum(s.recall for s in scores) / n,
            sum(s.f1 for s in scores) / n,
        )
