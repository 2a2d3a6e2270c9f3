"""Finite presentations of ideals in N^m and the corner sets derived from them.

An ideal is stored as the set of its members inside a bounding box.  Every
query outside the box raises :class:`OutOfBox` instead of guessing how the
ideal continues.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Optional, Sequence

from .errors import (InvalidIdeal, NotAntichain, OutOfBox, WeightsNotSorted,
                     WrongArity)

Tuple = tuple  # m-tuple of non-negative ints


def _le(a, b):
    return all(x <= y for x, y in zip(a, b))


def unit(m: int, i: int) -> tuple:
    """The tuple with a one in (0-based) coordinate ``i``."""
    return tuple(1 if j == i else 0 for j in range(m))


def add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def box_tuples(box: Sequence[int]):
    """All tuples ``t <= box`` in lexicographic order."""
    return itertools.product(*(range(b + 1) for b in box))


@dataclass(frozen=True)
class IdealSpec:
    m: int
    box: tuple
    members: frozenset
    relax_small: bool = False
    open_column: bool = False

    def __post_init__(self):
        object.__setattr__(self, "box", tuple(int(b) for b in self.box))
        object.__setattr__(self, "members", frozenset(tuple(t) for t in self.members))
        if self.m < 1 or len(self.box) != self.m:
            raise WrongArity(f"box {self.box} does not have {self.m} coordinates")

    def in_box(self, t) -> bool:
        return all(0 <= x <= b for x, b in zip(t, self.box))

    def contains(self, t) -> bool:
        """Membership; tuples with a negative coordinate are simply not in N^m."""
        t = tuple(t)
        if len(t) != self.m:
            raise WrongArity(f"tuple {t} is not an {self.m}-tuple")
        if any(x < 0 for x in t):
            return False
        if not _le(t, self.box):
            raise OutOfBox(f"{t} lies outside the box {self.box}")
        return t in self.members

    __contains__ = contains

    def sorted_members(self):
        return sorted(self.members)

    def to_json(self) -> dict:
        d = {"m": self.m, "box": list(self.box),
             "members": [list(t) for t in self.sorted_members()]}
        if self.relax_small:
            d["relax_small"] = True
        if self.open_column:
            d["open_column"] = True
        return d


class Validation(NamedTuple):
    ok: bool
    witness: Optional[tuple] = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def validate(spec: IdealSpec) -> Validation:
    """Check downward closure, the origin, and (unless relaxed) the small-sum rule."""
    zero = (0,) * spec.m
    if zero not in spec.members:
        return Validation(False, zero, "origin missing")
    for t in sorted(spec.members):
        if not spec.in_box(t):
            return Validation(False, t, "member outside box")
    missing = [sub(t, unit(spec.m, i)) for t in spec.members for i in range(spec.m) if t[i] > 0]
    missing = [s for s in missing if s not in spec.members]
    if missing:
        # report the lexicographically smallest missing tuple
        return Validation(False, min(missing), "downward closure violated")
    if not spec.relax_small:
        for t in box_tuples(spec.box):
            if sum(t) <= 2 and t not in spec.members:
                return Validation(False, t, "tuple with coordinate sum <= 2 missing")
    return Validation(True)


def require_valid(spec: IdealSpec) -> IdealSpec:
    v = validate(spec)
    if not v:
        raise InvalidIdeal(f"{v.reason}: {v.witness}")
    return spec


def membership(spec: IdealSpec, t) -> bool:
    return spec.contains(t)


def from_members(m, box, members, relax_small=False, open_column=False) -> IdealSpec:
    return IdealSpec(m, tuple(box), frozenset(tuple(t) for t in members),
                     relax_small=relax_small, open_column=open_column)


def from_forbidden(m: int, box, min_forbidden: Iterable, relax_small=False,
                   open_column=False) -> IdealSpec:
    forb = [tuple(f) for f in min_forbidden]
    for f in forb:
        if len(f) != m:
            raise WrongArity(f"{f} is not an {m}-tuple")
    for a, b in itertools.permutations(forb, 2):
        if _le(a, b):
            raise NotAntichain(f"{a} <= {b}")
    members = [t for t in box_tuples(box) if not any(_le(f, t) for f in forb)]
    return from_members(m, box, members, relax_small, open_column)


def from_weighted(weights, M, box, relax_small=False) -> IdealSpec:
    """Tuples whose weighted point count stays strictly below ``M``."""
    w = [Fraction(x) for x in weights]
    if any(x <= 0 for x in w):
        raise WeightsNotSorted("weights must be positive")
    if any(w[j - 1] < w[j] for j in range(1, len(w))):
        raise WeightsNotSorted(f"weights {weights} are not nonincreasing")
    M = Fraction(M)
    members = [t for t in box_tuples(box) if sum(a * b for a, b in zip(t, w)) < M]
    return from_members(len(w), box, members, relax_small)


def from_json(d: dict) -> IdealSpec:
    keys = [k for k in ("members", "min_forbidden", "weighted") if k in d]
    if len(keys) != 1:
        raise InvalidIdeal("exactly one of members|min_forbidden|weighted is required")
    m = int(d["m"])
    box = tuple(d["box"])
    relax = bool(d.get("relax_small", False))
    open_column = bool(d.get("open_column", False))
    if keys[0] == "members":
        spec = from_members(m, box, d["members"], relax, open_column)
    elif keys[0] == "min_forbidden":
        spec = from_forbidden(m, box, d["min_forbidden"], relax, open_column)
    else:
        w = d["weighted"]
        spec = from_weighted(w["weights"], Fraction(str(w["M"])), box, relax)
        if len(w["weights"]) != m:
            raise WrongArity("weights length differs from m")
    return spec


def minimal_forbidden(spec: IdealSpec, bound=None) -> list:
    """Minimal tuples outside the ideal, restricted to ``bound`` (default: the box)."""
    bound = spec.box if bound is None else tuple(bound)
    out = []
    for t in box_tuples(bound):
        if spec.contains(t):
            continue
        if all(spec.contains(sub(t, unit(spec.m, i))) for i in range(spec.m) if t[i] > 0):
            out.append(t)
    return out


def _last_nonzero(t):
    for i in range(len(t) - 1, -1, -1):
        if t[i] > 0:
            return i
    return -1


def is_critical(spec: IdealSpec, t) -> bool:
    t = tuple(t)
    if any(x < 0 for x in t) or spec.contains(t):
        return False
    i = _last_nonzero(t)
    if i < 0:
        return False
    return all(spec.contains(sub(t, unit(spec.m, j))) for j in range(i + 1) if t[j] > 0)


def is_decreasing(spec: IdealSpec) -> bool:
    m = spec.m
    for t in box_tuples(spec.box):
        i = _last_nonzero(t)
        if i < 0 or spec.contains(t):
            continue
        if not spec.contains(sub(t, unit(m, i))):
            continue
        for j in range(i):
            if t[j] > 0 and not spec.contains(sub(t, unit(m, j))):
                return False
    return True


def axis_bounds(spec: IdealSpec) -> list:
    """Largest multiple of each unit vector inside the ideal (box-limited)."""
    out = []
    for i in range(spec.m):
        k = 0
        while k + 1 <= spec.box[i] and spec.contains(tuple(k + 1 if j == i else 0
                                                           for j in range(spec.m))):
            k += 1
        out.append(k)
    return out


def is_axis_product(spec: IdealSpec) -> bool:
    """True when the members are exactly a product of intervals (any m)."""
    bounds = axis_bounds(spec)
    return all((t in spec.members) == _le(t, bounds) for t in box_tuples(spec.box))


def is_rectangular(spec: IdealSpec) -> bool:
    if spec.m != 2:
        raise WrongArity("rectangularity is defined for m = 2")
    return is_axis_product(spec)


def critical_set(spec: IdealSpec) -> list:
    """Critical tuples in the box, as ``(tuple, weight)`` in lexicographic order."""
    return [(t, sum(t)) for t in box_tuples(spec.box) if is_critical(spec, t)]


def _need2(spec):
    if spec.m != 2:
        raise WrongArity("this feature is defined for m = 2")


def d_set(spec: IdealSpec) -> list:
    _need2(spec)
    out = []
    for n, k in box_tuples((spec.box[0] - 1, spec.box[1] - 1)):
        if not spec.contains((n, k)):
            continue
        if all(not spec.contains(u) and not is_critical(spec, u)
               for u in ((n + 1, k), (n, k + 1))):
            out.append(((n, k), n + k))
    return out


def cprime_dprime(spec: IdealSpec):
    _need2(spec)
    cprime = [(n, k) for n, k in box_tuples((spec.box[0] - 1, spec.box[1] - 1))
              if spec.contains((n, k)) and not spec.contains((n + 1, k))
              and not spec.contains((n, k + 1))]
    dprime = []
    for n, k in box_tuples((spec.box[0] - 1, spec.box[1] - 1)):
        if not is_critical(spec, (n, k)):
            continue
        nbrs = [u for u in ((n - 1, k + 1), (n + 1, k - 1)) if min(u) >= 0]
        if all(spec.contains(u) for u in nbrs):
            dprime.append((n, k))
    return cprime, dprime


class FValue(NamedTuple):
    value: float  # int, or +/- math.inf
    boxed: bool = False


def f_value(spec: IdealSpec, n: int) -> FValue:
    """sup{b : (n, b) in I}; -inf for an empty column."""
    _need2(spec)
    if n < 0 or n > spec.box[0]:
        raise OutOfBox(f"column {n} outside box {spec.box}")
    best = -math.inf
    for b in range(spec.box[1] + 1):
        if spec.contains((n, b)):
            best = b
    if best == spec.box[1]:
        return FValue(math.inf, False) if spec.open_column else FValue(best, True)
    return FValue(best, False)


def m_value(spec: IdealSpec, a: int) -> int:
    target = f_value(spec, a).value
    return min(k for k in range(a + 1) if f_value(spec, k).value == target)


@dataclass(frozen=True)
class FeatureReport:
    critical: list
    decreasing: bool
    dset: Optional[list] = None
    cprime: Optional[list] = None
    dprime: Optional[list] = None
    f_table: Optional[dict] = None
    rectangular: Optional[bool] = None
    minimal_forbidden: list = field(default_factory=list)

    def to_json(self) -> dict:
        def enc(v):
            if isinstance(v, float) and math.isinf(v):
                return "inf" if v > 0 else "-inf"
            return v

        d = {"critical": [[list(t), w] for t, w in self.critical],
             "decreasing": self.decreasing,
             "minimal_forbidden": [list(t) for t in self.minimal_forbidden]}
        if self.dset is not None:
            d["dset"] = [[list(t), w] for t, w in self.dset]
            d["cprime"] = [list(t) for t in self.cprime]
            d["dprime"] = [list(t) for t in self.dprime]
            d["f_table"] = {str(n): {"value": enc(f.value), "boxed": f.boxed}
                            for n, f in self.f_table.items()}
            d["rectangular"] = self.rectangular
        return d


def features(spec: IdealSpec) -> FeatureReport:
    crit = critical_set(spec)
    mf = minimal_forbidden(spec)
    if spec.m != 2:
        return FeatureReport(crit, is_decreasing(spec), minimal_forbidden=mf)
    cp, dp = cprime_dprime(spec)
    return FeatureReport(
        crit, is_decreasing(spec), dset=d_set(spec), cprime=cp, dprime=dp,
        f_table={n: f_value(spec, n) for n in range(spec.box[0] + 1)},
        rectangular=is_rectangular(spec), minimal_forbidden=mf)
