"""Colored points, colour-count vectors and Betti tables."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, NamedTuple

from .errors import WrongArity


class Point(NamedTuple):
    """The ``index``-th point of colour ``color`` (both 1-based)."""

    color: int
    index: int

    def __str__(self):
        return f"x[{self.color},{self.index}]"


def all_points(nvec) -> list:
    """Every point of the colour vector, colour-major."""
    return [Point(c + 1, i + 1) for c, n in enumerate(nvec) for i in range(n)]


def check_nvec(spec, nvec) -> tuple:
    nvec = tuple(int(x) for x in nvec)
    if len(nvec) != spec.m:
        raise WrongArity(f"colour vector {nvec} does not have {spec.m} entries")
    if any(x < 0 for x in nvec):
        raise WrongArity(f"negative colour count in {nvec}")
    return nvec


def count_colors(points, m) -> tuple:
    out = [0] * m
    for p in points:
        out[p.color - 1] += 1
    return tuple(out)


@dataclass
class BettiTable:
    ranks: Dict[int, int]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.ranks = {int(k): int(v) for k, v in sorted(self.ranks.items()) if v}

    def __getitem__(self, k):
        return self.ranks.get(k, 0)

    def __eq__(self, other):
        if isinstance(other, BettiTable):
            return self.ranks == other.ranks
        if isinstance(other, dict):
            return self.ranks == {k: v for k, v in other.items() if v}
        return NotImplemented

    def total(self) -> int:
        return sum(self.ranks.values())

    def euler(self) -> int:
        return sum((-1) ** k * v for k, v in self.ranks.items())

    def to_json(self) -> dict:
        return {str(k): v for k, v in self.ranks.items()}
