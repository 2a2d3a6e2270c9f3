"""Betti numbers of diagonal arrangement complements by brute force.

The intersection lattice of the arrangement is built as a join-closed family
of set partitions, and the Goresky-MacPherson formula turns reduced homology
of lower intervals into cohomology ranks of the complement.  Nothing here
depends on the homology basis or forest code, so it can serve as an
independent check on both.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, List, Optional

from .errors import BudgetExceeded
from .ideal import IdealSpec, minimal_forbidden
from .linalg import Echelon, rank_gf2
from .points import BettiTable, Point, all_points, check_nvec

DEFAULT_MAX_ELEMENTS = 2_000_000
DEFAULT_MAX_SIMPLICES = 10_000_000


@dataclass(frozen=True)
class DiagonalGenerator:
    """The subspace on which all points of ``block`` coincide."""

    block: frozenset

    def __str__(self):
        return "{" + ",".join(str(p) for p in sorted(self.block)) + "}"


def arrangement_generators(spec: IdealSpec, nvec) -> List[DiagonalGenerator]:
    nvec = check_nvec(spec, nvec)
    pts = all_points(nvec)
    by_color = [[p for p in pts if p.color == c + 1] for c in range(spec.m)]
    gens = []
    for t in minimal_forbidden(spec, nvec):
        choices = [itertools.combinations(by_color[c], t[c]) for c in range(spec.m)]
        for pick in itertools.product(*choices):
            gens.append(DiagonalGenerator(frozenset(p for grp in pick for p in grp)))
    return gens


def _canon(parent: list) -> tuple:
    """Label every point by the smallest point of its block."""
    n = len(parent)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    low = {}
    for i in range(n):
        r = find(i)
        if r not in low:
            low[r] = i
    return tuple(low[find(i)] for i in range(n))


def join(a: tuple, b: tuple) -> tuple:
    parent = list(range(len(a)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for lab in (a, b):
        for i, r in enumerate(lab):
            x, y = find(i), find(r)
            if x != y:
                parent[max(x, y)] = min(x, y)
    return _canon(parent)


def leq(a: tuple, b: tuple) -> bool:
    """Refinement order: every block of ``a`` sits inside a block of ``b``."""
    return all(b[a[i]] == b[i] for i in range(len(a)))


def n_blocks(a: tuple) -> int:
    return sum(1 for i, r in enumerate(a) if i == r)


@dataclass
class PartitionLattice:
    points: list
    elements: list  # canonical labellings, sorted by (merge count, labelling)
    d: int = 1

    @property
    def bottom(self) -> tuple:
        return tuple(range(len(self.points)))

    def codim(self, x: tuple) -> int:
        return self.d * (len(x) - n_blocks(x))

    def blocks(self, x: tuple) -> list:
        out: Dict[int, list] = {}
        for i, r in enumerate(x):
            out.setdefault(r, []).append(self.points[i])
        return [frozenset(b) for b in out.values() if len(b) > 1]

    def __len__(self):
        return len(self.elements)


def lattice_closure(generators, points, d=1,
                    max_elements=DEFAULT_MAX_ELEMENTS) -> PartitionLattice:
    index = {p: i for i, p in enumerate(points)}
    n = len(points)
    atoms = []
    for g in generators:
        lab = list(range(n))
        lo = min(index[p] for p in g.block)
        for p in g.block:
            lab[index[p]] = lo
        atoms.append(tuple(lab))
    atoms = sorted(set(atoms))
    bottom = tuple(range(n))
    seen = {bottom}
    frontier = list(atoms)
    seen.update(atoms)
    # every element is a join of atoms, so joining with atoms alone saturates
    while frontier:
        nxt = []
        for x in frontier:
            for a in atoms:
                y = join(x, a)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
                    if len(seen) > max_elements:
                        raise BudgetExceeded("lattice element cap exceeded",
                                             watermark=len(seen))
        frontier = nxt
    elements = sorted(seen, key=lambda x: (n - n_blocks(x), x))
    return PartitionLattice(list(points), elements, d)


def _open_interval(lattice: PartitionLattice, x: tuple) -> list:
    bottom = lattice.bottom
    return [y for y in lattice.elements if y != bottom and y != x and leq(y, x)]


def interval_betti(lattice: PartitionLattice, x: tuple, field: str = "Q",
                   max_simplices=DEFAULT_MAX_SIMPLICES) -> Dict[int, int]:
    """Reduced Betti numbers of the order complex of the open interval (0, x)."""
    elems = _open_interval(lattice, x)
    if not elems:
        return {-1: 1}
    k = len(elems)
    above = [[j for j in range(k) if j != i and leq(elems[i], elems[j])]
             for i in range(k)]
    # chains as increasing index tuples (elements are sorted by rank)
    simplices: List[List[tuple]] = [[(i,) for i in range(k)]]
    total = k
    while True:
        nxt = []
        for s in simplices[-1]:
            for j in above[s[-1]]:
                nxt.append(s + (j,))
        if not nxt:
            break
        total += len(nxt)
        if total > max_simplices:
            raise BudgetExceeded("simplex cap exceeded", watermark=total)
        simplices.append(nxt)
    top = len(simplices) - 1
    # ranks of boundary maps C_q -> C_{q-1}; q = 0 maps onto the empty simplex
    ranks = {0: 1}
    for q in range(1, top + 1):
        lower = {s: i for i, s in enumerate(simplices[q - 1])}
        rows = []
        for s in simplices[q]:
            row = {}
            for j in range(q + 1):
                row[lower[s[:j] + s[j + 1:]]] = -1 if j % 2 else 1
            rows.append(row)
        if field == "GF2":
            ranks[q] = rank_gf2(rows)
        else:
            e = Echelon()
            for r in rows:
                e.add(r)
            ranks[q] = e.rank
    out = {}
    for q in range(0, top + 1):
        b = len(simplices[q]) - ranks[q] - ranks.get(q + 1, 0)
        if b:
            out[q] = b
    return out


def mobius_from_bottom(lattice: PartitionLattice) -> Dict[tuple, int]:
    mu = {}
    for x in lattice.elements:
        if x == lattice.bottom:
            mu[x] = 1
        else:
            mu[x] = -sum(v for y, v in mu.items() if y != x and leq(y, x))
    return mu


def _lattice(spec, nvec, d, max_elements):
    nvec = check_nvec(spec, nvec)
    pts = all_points(nvec)
    return lattice_closure(arrangement_generators(spec, nvec), pts, d, max_elements)


def gm_betti(spec: IdealSpec, nvec, d: int, field: str = "Q",
             max_elements=DEFAULT_MAX_ELEMENTS,
             max_simplices=DEFAULT_MAX_SIMPLICES) -> BettiTable:
    lat = _lattice(spec, nvec, d, max_elements)
    ranks: Dict[int, int] = {0: 1}
    for x in lat.elements:
        if x == lat.bottom:
            continue
        c = lat.codim(x)
        for q, b in interval_betti(lat, x, field, max_simplices).items():
            i = c - 2 - q
            ranks[i] = ranks.get(i, 0) + b
    return BettiTable(ranks, {"method": "gm", "nvec": list(nvec), "d": d,
                              "field": field, "lattice_size": len(lat)})


def gm_euler_mobius(spec: IdealSpec, nvec, d: int,
                    max_elements=DEFAULT_MAX_ELEMENTS) -> int:
    """Euler characteristic of the complement from the Mobius function alone."""
    lat = _lattice(spec, nvec, d, max_elements)
    mu = mobius_from_bottom(lat)
    return sum((-1) ** lat.codim(x) * mu[x] for x in lat.elements)
