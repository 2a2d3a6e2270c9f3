"""Exact sparse row reduction over Q and GF(2).

Rows are dicts ``{column: value}`` (Q) or Python ints used as bit sets
(GF(2)).  Pivots are keyed by the smallest column of a row, so the set of
non-pivot columns is a complement of the row space whenever columns are
ordered with the preferred complement last.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Optional


def _lead(row):
    return min(row)


class Echelon:
    """Incremental echelon form over Q with leading-column pivots."""

    def __init__(self):
        self.pivots: Dict[int, dict] = {}

    def __len__(self):
        return len(self.pivots)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def _reduce_lead(self, row: dict) -> dict:
        row = {c: Fraction(v) for c, v in row.items() if v}
        while row:
            c = _lead(row)
            p = self.pivots.get(c)
            if p is None:
                return row
            f = row[c]
            for k, v in p.items():
                nv = row.get(k, 0) - f * v
                if nv:
                    row[k] = nv
                else:
                    row.pop(k, None)
        return row

    def add(self, row: dict) -> bool:
        """Insert a row; returns True when it raised the rank."""
        row = self._reduce_lead(row)
        if not row:
            return False
        c = _lead(row)
        inv = 1 / row[c]
        self.pivots[c] = {k: v * inv for k, v in row.items()}
        return True

    def reduce(self, vec: dict) -> dict:
        """Fully reduce ``vec`` against the pivots (remainder on free columns)."""
        vec = {c: Fraction(v) for c, v in vec.items() if v}
        done = {}
        while vec:
            c = min(vec)
            f = vec.pop(c)
            p = self.pivots.get(c)
            if p is None:
                done[c] = f
                continue
            for k, v in p.items():
                if k == c:
                    continue
                nv = vec.get(k, 0) - f * v
                if nv:
                    vec[k] = nv
                else:
                    vec.pop(k, None)
        return done

    def contains(self, vec: dict) -> bool:
        return not self.reduce(vec)


def rank_q(rows: Iterable[dict]) -> int:
    e = Echelon()
    for r in rows:
        e.add(r)
    return e.rank


def rank_gf2(rows: Iterable) -> int:
    """Rank over GF(2); rows are int bit sets or dicts (odd entries survive)."""
    pivots: Dict[int, int] = {}
    for r in rows:
        if isinstance(r, dict):
            bits = 0
            for c, v in r.items():
                if v % 2:
                    bits |= 1 << c
            r = bits
        while r:
            low = r & -r
            p = pivots.get(low)
            if p is None:
                pivots[low] = r
                break
            r ^= p
    return len(pivots)


def rank(rows: Iterable, field: str = "Q") -> int:
    if field == "Q":
        return rank_q(rows)
    if field == "GF2":
        return rank_gf2(rows)
    raise ValueError(f"unknown field {field!r}")


def as_int(x: Fraction) -> Optional[int]:
    return x.numerator if x.denominator == 1 else None
