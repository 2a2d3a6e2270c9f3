"""Admissible forests: a combinatorial model of the cohomology ring.

A forest has rectangle vertices (points forced to coincide), circle vertices
(single free points) and, for two colours, diamond vertices.  Each forest
represents a cocycle, its orientation data fixes a sign, and relations between
forests are generated here as explicit relators.  Coordinates in the basis
of linear trees are obtained by exact row reduction of the relator matrix,
so no rewriting system is needed.

Conventions used throughout:

* a vertex is named by its smallest point (``vid``);
* the orientation is an ordered list of items ``("r", vid)`` for rectangles
  and ``("e", (src, dst))`` for edges;  a rectangle with ``s`` elements has
  grade ``(s - 1) d`` (plus one if diamonds hang off it) and an edge has
  grade ``d - 1``;
* the canonical form sorts rectangle elements, directs edges away from the
  smallest rectangle of each tree (``d > 1`` only) and lists rectangles
  before edges, each in sorted order.
"""
from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd as _gcd
from typing import Dict, Iterable, List, Optional, Tuple

from .errors import (InconsistentRelators, NotDecreasingNotBicolored, ParseError,
                     RectangularIdeal, UnsupportedCase_11_Dprime)
from .expr import Curly, Expr, Nested, Singleton, factors_of
from .homology import (BICOLORED, DECREASING, Diagnosis, choose_regime, enumerate_basis,
                       follower_violations, local_class_violations, nested_outer_color,
                       split_factor)
from .ideal import IdealSpec, cprime_dprime, is_axis_product, is_critical
from .linalg import Echelon
from .points import Point, all_points, check_nvec, count_colors

RECT, CIRCLE, DIAMOND, STAR = "rect", "circle", "diamond", "star"
_LEAVES = (CIRCLE, DIAMOND, STAR)


@dataclass(frozen=True)
class Vertex:
    kind: str
    elements: Tuple[Point, ...]

    @property
    def vid(self) -> Point:
        return min(self.elements)


@dataclass(frozen=True)
class AdmissibleForest:
    """A forest together with its orientation data.

    Equality and hashing ignore ``coeff``, so forests can key a cochain."""

    vertices: Tuple[Vertex, ...]
    edges: Tuple[Tuple[Point, Point], ...]
    order: Tuple[tuple, ...]
    coeff: int = field(default=1, compare=False)

    # -- lookups
    def vertex(self, vid) -> Vertex:
        for v in self.vertices:
            if v.vid == vid:
                return v
        raise KeyError(vid)

    def vmap(self) -> Dict[Point, Vertex]:
        return {v.vid: v for v in self.vertices}

    def home(self) -> Dict[Point, Point]:
        """Point -> vid of the vertex holding it."""
        return {p: v.vid for v in self.vertices for p in v.elements}

    def neighbours(self) -> Dict[Point, list]:
        nb = defaultdict(list)
        for a, b in self.edges:
            nb[a].append(b)
            nb[b].append(a)
        return nb

    def points(self) -> list:
        return sorted(p for v in self.vertices for p in v.elements)

    def rects(self) -> List[Vertex]:
        return [v for v in self.vertices if v.kind == RECT]

    def with_coeff(self, c: int) -> "AdmissibleForest":
        return AdmissibleForest(self.vertices, self.edges, self.order, c)

    # -- serialisation
    def to_json(self) -> dict:
        ids = {v.vid: i for i, v in enumerate(self.vertices)}
        verts = [{"id": ids[v.vid], "kind": v.kind,
                  "elements": [{"c": p.color, "i": p.index} for p in v.elements]}
                 for v in self.vertices]
        edges = [{"from": ids[a], "to": ids[b]} for a, b in self.edges]
        order = []
        for kind, key in self.order:
            if kind == "r":
                order.append(f"r{ids[key]}")
            else:
                order.append(f"e{ids[key[0]]}-{ids[key[1]]}")
        return {"vertices": verts, "edges": edges, "order": order, "coeff": self.coeff}

    def text(self) -> str:
        parts = []
        nb = self.neighbours()
        for v in self.vertices:
            els = ",".join(str(p) for p in v.elements)
            if v.kind == RECT:
                parts.append(f"[{els}]")
            elif not nb.get(v.vid):
                parts.append(f"({els})")
        arrows = []
        vm = self.vmap()
        for a, b in self.edges:
            arrows.append(f"{_short(vm[a])}->{_short(vm[b])}")
        return " ".join(parts) + (" | " + " ".join(arrows) if arrows else "")


def _short(v: Vertex) -> str:
    els = ",".join(str(p) for p in v.elements)
    return {RECT: f"[{els}]", CIRCLE: f"({els})", DIAMOND: f"<{els}>", STAR: f"*{els}*"}[v.kind]


def forest_from_json(obj: dict) -> AdmissibleForest:
    try:
        byid = {}
        verts = []
        for v in obj["vertices"]:
            kind = {"rect": RECT, "rectangle": RECT}.get(v["kind"], v["kind"])
            if kind not in (RECT,) + _LEAVES:
                raise ParseError(f"unknown vertex kind {v['kind']!r}")
            els = tuple(Point(int(e["c"]), int(e["i"])) for e in v["elements"])
            if not els:
                raise ParseError("vertex without elements")
            vx = Vertex(kind, els)
            byid[v["id"]] = vx.vid
            verts.append(vx)
        edges = tuple((byid[e["from"]], byid[e["to"]]) for e in obj.get("edges", []))
        order = []
        for item in obj.get("order", []):
            if item.startswith("r"):
                order.append(("r", byid[int(item[1:])]))
            elif item.startswith("e"):
                a, b = item[1:].split("-")
                order.append(("e", (byid[int(a)], byid[int(b)])))
            else:
                raise ParseError(f"bad orientation item {item!r}")
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed forest JSON: {exc}") from exc
    verts.sort(key=lambda v: v.vid)
    f = AdmissibleForest(tuple(verts), edges, tuple(order), int(obj.get("coeff", 1)))
    if not obj.get("order"):
        f = AdmissibleForest(f.vertices, f.edges, _default_order(f.vertices, f.edges), f.coeff)
    return f


def _default_order(vertices, edges) -> tuple:
    return tuple([("r", v.vid) for v in vertices if v.kind == RECT]
                 + [("e", e) for e in edges])


def make_forest(vertices: Iterable[Vertex], edges=(), order=None, coeff=1) -> AdmissibleForest:
    vertices = tuple(sorted(vertices, key=lambda v: v.vid))
    edges = tuple(edges)
    if order is None:
        order = _default_order(vertices, edges)
    return AdmissibleForest(vertices, edges, tuple(order), coeff)


def singletons(points) -> AdmissibleForest:
    return make_forest([Vertex(CIRCLE, (p,)) for p in points])


# -- grades and degree -------------------------------------------------------

def _has_diamond(f: AdmissibleForest, vid, vm=None, nb=None) -> bool:
    vm = vm or f.vmap()
    nb = nb if nb is not None else f.neighbours()
    return any(vm[u].kind == DIAMOND for u in nb.get(vid, ()))


def _grades(f: AdmissibleForest, d: int) -> dict:
    vm = f.vmap()
    nb = f.neighbours()
    g = {}
    for kind, key in f.order:
        if kind == "r":
            v = vm[key]
            g[(kind, key)] = (len(v.elements) - 1) * d + (1 if _has_diamond(f, key, vm, nb) else 0)
        else:
            g[(kind, key)] = d - 1
    return g


def forest_degree(forest: AdmissibleForest, d: int) -> int:
    vm = forest.vmap()
    nb = forest.neighbours()
    tot = 0
    for v in forest.rects():
        tot += (len(v.elements) - 1) * d + (1 if _has_diamond(forest, v.vid, vm, nb) else 0)
    return tot + len(forest.edges) * (d - 1)


# -- canonical form ----------------------------------------------------------

def _perm_parity(seq) -> int:
    inv = 0
    s = list(seq)
    for i in range(len(s)):
        for j in range(i + 1, len(s)):
            if s[i] > s[j]:
                inv += 1
    return inv % 2


def _koszul(items, grades, target_key) -> int:
    """Sign of sorting ``items`` by ``target_key`` with graded transpositions."""
    sign = 1
    keys = [target_key(it) for it in items]
    for i in range(len(items)):
        if grades[items[i]] % 2 == 0:
            continue
        for j in range(i + 1, len(items)):
            if keys[i] > keys[j] and grades[items[j]] % 2:
                sign = -sign
    return sign


def _components(vertices, edges) -> List[list]:
    parent = {v.vid: v.vid for v in vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    comps = defaultdict(list)
    for v in vertices:
        comps[find(v.vid)].append(v.vid)
    return [sorted(c) for c in comps.values()]


def _canonical_directions(f: AdmissibleForest) -> Dict[frozenset, Tuple[Point, Point]]:
    """Edge directions pointing away from the smallest rectangle of each tree."""
    vm = f.vmap()
    nb = f.neighbours()
    out = {}
    for comp in _components(f.vertices, f.edges):
        if len(comp) == 1:
            continue
        rects = [u for u in comp if vm[u].kind == RECT]
        root = min(rects) if rects else min(comp)
        seen = {root}
        stack = [root]
        while stack:
            u = stack.pop()
            for w in sorted(nb[u]):
                if w not in seen:
                    seen.add(w)
                    out[frozenset((u, w))] = (u, w)
                    stack.append(w)
    return out


def _order_key(item):
    kind, key = item
    return (0, key) if kind == "r" else (1, key)


def canonicalize(forest: AdmissibleForest, d: int,
                 orient_edges: bool = True) -> Tuple[AdmissibleForest, int]:
    """Canonical orientation of ``forest`` and the sign relating the two.

    For ``d = 1`` edge directions are part of the forest and are kept; with
    ``orient_edges=False`` they are kept for every ``d`` (reversing an edge
    is only a relation between cocycles, not between arbitrary chains)."""
    sign = 1
    verts = []
    for v in forest.vertices:
        if v.kind == RECT and len(v.elements) > 1:
            if d % 2 and _perm_parity(v.elements):
                sign = -sign
            v = Vertex(RECT, tuple(sorted(v.elements)))
        verts.append(v)
    verts.sort(key=lambda v: v.vid)
    grades = _grades(forest, d)
    items = list(forest.order)
    if d > 1 and orient_edges:
        dirs = _canonical_directions(forest)
        new_items = []
        new_grades = {}
        for it in items:
            if it[0] == "e":
                a, b = it[1]
                want = dirs[frozenset((a, b))]
                if want != (a, b) and d % 2:
                    sign = -sign
                nit = ("e", want)
            else:
                nit = it
            new_items.append(nit)
            new_grades[nit] = grades[it]
        items, grades = new_items, new_grades
    sign *= _koszul(items, grades, _order_key)
    items.sort(key=_order_key)
    edges = tuple(key for kind, key in items if kind == "e")
    return AdmissibleForest(tuple(verts), edges, tuple(items), forest.coeff), sign


# -- cochains ----------------------------------------------------------------

@dataclass
class Cochain:
    grade: Optional[int]
    terms: Dict[AdmissibleForest, int] = field(default_factory=dict)

    def add(self, forest: AdmissibleForest, coeff: int, d: int, canonical=False):
        if not coeff:
            return self
        if not canonical:
            forest, s = canonicalize(forest, d)
            coeff *= s
        forest = forest.with_coeff(1)
        c = self.terms.get(forest, 0) + coeff
        if c:
            self.terms[forest] = c
        else:
            self.terms.pop(forest, None)
        return self

    def __iadd__(self, other: "Cochain"):
        for f, c in other.terms.items():
            v = self.terms.get(f, 0) + c
            if v:
                self.terms[f] = v
            else:
                self.terms.pop(f, None)
        return self

    def scaled(self, k: int) -> "Cochain":
        return Cochain(self.grade, {f: c * k for f, c in self.terms.items() if c * k})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, Cochain):
            return NotImplemented
        return self.terms == other.terms

    def to_json(self) -> dict:
        terms = [f.with_coeff(c).to_json()
                 for f, c in sorted(self.terms.items(), key=lambda fc: _sort_key(fc[0]))]
        return {"grade": self.grade, "terms": terms}


def cochain_from_json(obj: dict, d: int) -> Cochain:
    """Parse ``{"grade": k, "terms": [forest, ...]}`` (coefficients in the terms)."""
    try:
        terms = [forest_from_json(t) for t in obj["terms"]]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed cochain JSON: {exc}") from exc
    c = Cochain(obj.get("grade"))
    for f in terms:
        c.add(f, f.coeff, d)
    if c.grade is None and c.terms:
        c.grade = forest_degree(next(iter(c.terms)), d)
    return c


def _sort_key(f: AdmissibleForest):
    return tuple((v.kind, v.elements) for v in f.vertices), f.edges


def cochain_of(forest: AdmissibleForest, d: int) -> Cochain:
    return Cochain(forest_degree(forest, d)).add(forest, forest.coeff, d)


# -- admissibility -----------------------------------------------------------

def _forest_regime(spec: IdealSpec, regime: str) -> str:
    regime = choose_regime(spec, regime)
    if regime == BICOLORED:
        if is_axis_product(spec):
            raise RectangularIdeal("the forest model needs a non-rectangular ideal")
        return regime
    if regime != DECREASING:
        raise NotDecreasingNotBicolored(
            f"no forest model for the {regime} regime")
    return regime


def has_small_gaps(spec: IdealSpec) -> bool:
    """Whether some tuple with coordinate sum <= 2 is forbidden."""
    return any(sum(t) <= 2 and not spec.contains(t)
               for t in itertools.product(*(range(min(3, b + 1)) for b in spec.box)))


def _check_small(spec: IdealSpec, regime: str):
    """The (1,1) in D'_I case of the weight-one construction is refused."""
    if regime == BICOLORED and has_small_gaps(spec):
        _, dprime = cprime_dprime(spec)
        if (1, 1) in dprime:
            raise UnsupportedCase_11_Dprime(
                "forests are not defined when (1, 1) lies in D'_I")


class _Rules:
    """Which rectangles exist and what may hang off them."""

    def __init__(self, spec: IdealSpec, regime: str):
        self.spec = spec
        self.regime = regime
        self.m = spec.m
        self.small = has_small_gaps(spec)
        self._modes = {}
        if regime == BICOLORED:
            cp, dp = cprime_dprime(spec)
            self.cprime = set(cp)
            self.dprime = set(dp)

    def modes(self, counts) -> list:
        """Attachment modes for a rectangle: (circle colours, diamond colours)."""
        got = self._modes.get(counts)
        if got is None:
            got = self._compute_modes(tuple(counts))
            self._modes[counts] = got
        return got

    def _compute_modes(self, counts) -> list:
        spec = self.spec
        if sum(counts) == 0:
            return []
        if self.regime == DECREASING:
            if sum(counts) == 1 and not self.small:
                return []
            last = max(j for j in range(self.m) if counts[j])
            tops = []
            for k in range(last, self.m):
                c = list(counts)
                c[k] += 1
                if is_critical(spec, tuple(c)):
                    tops.append(k)
            if not tops:
                return []
            return [(frozenset(range(1, max(tops) + 2)), frozenset())]
        n, m = counts
        out = []
        if (n, m) in self.cprime:
            out.append((frozenset((1, 2)), frozenset()))
        if (n + 1, m + 1) in self.dprime:
            out.append((frozenset((2,)), frozenset((1,))))
            out.append((frozenset((1,)), frozenset((2,))))
        if m == 0 and (n + 1, 0) in self.dprime:
            out.append((frozenset((1,)), frozenset()))
        if n == 0 and (0, m + 1) in self.dprime:
            out.append((frozenset((2,)), frozenset()))
        if n + m == 1 and not self.small:
            # a one-point rectangle only has weight two with diamonds
            out = [md for md in out if md[1]]
        return out

    def rect_ok(self, counts) -> bool:
        return bool(self.modes(tuple(counts)))

    def attachments_ok(self, counts, circles, diamonds) -> bool:
        cc = {p.color for p in circles}
        dc = {p.color for p in diamonds}
        for cmode, dmode in self.modes(tuple(counts)):
            if not cc <= cmode or not dc <= dmode:
                continue
            if dmode and not diamonds:
                continue
            if not circles and not (self.small and sum(counts) == 1):
                continue
            return True
        return False


def _acyclic(vertices, edges) -> bool:
    parent = {v.vid: v.vid for v in vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        if a not in parent or b not in parent:
            return False
        ra, rb = find(a), find(b)
        if ra == rb:
            return False
        parent[ra] = rb
    return True


def forest_violations(forest: AdmissibleForest, spec: IdealSpec, nvec=None,
                      regime: str = "auto", rules: Optional[_Rules] = None) -> list:
    regime = _forest_regime(spec, regime)
    rules = rules or _Rules(spec, regime)
    pts = forest.points()
    if len(set(pts)) != len(pts):
        return ["a point occurs in two vertices"]
    if nvec is not None and pts != all_points(check_nvec(spec, nvec)):
        return ["points do not match the colour vector"]
    if any(p.color > spec.m for p in pts):
        return ["colour out of range"]
    vids = {v.vid for v in forest.vertices}
    for a, b in forest.edges:
        if a not in vids or b not in vids or a == b:
            return [f"edge {a}->{b} does not join two vertices"]
    if len({frozenset(e) for e in forest.edges}) != len(forest.edges):
        return ["repeated edge"]
    if not _acyclic(forest.vertices, forest.edges):
        return ["the graph has a cycle"]
    want = sorted(_default_order(forest.vertices, forest.edges), key=_order_key)
    if sorted(forest.order, key=_order_key) != want:
        return ["orientation order must list every rectangle and edge once"]
    vm = forest.vmap()
    nb = forest.neighbours()
    out = []
    for v in forest.vertices:
        if v.kind == STAR:
            out.append(f"star vertex {v.vid} only exists inside products")
            continue
        if v.kind != RECT:
            if len(v.elements) != 1:
                out.append(f"{v.kind} {v.vid} must hold one point")
            ns = nb.get(v.vid, [])
            if len(ns) > 1:
                out.append(f"{v.kind} {v.elements[0]} is attached to more than one vertex")
            elif ns and vm[ns[0]].kind != RECT:
                out.append(f"{v.kind} {v.elements[0]} is attached to a non-rectangle")
            if v.kind == DIAMOND and not ns:
                out.append(f"diamond {v.elements[0]} is attached to nothing")
            if v.kind == DIAMOND and regime != BICOLORED:
                out.append("diamonds only occur for two colours")
            continue
        counts = count_colors(v.elements, spec.m)
        if not rules.rect_ok(counts):
            out.append(f"rectangle {_short(v)} has inadmissible colour counts {counts}")
            continue
        circles = [vm[u].elements[0] for u in nb.get(v.vid, []) if vm[u].kind == CIRCLE]
        diamonds = [vm[u].elements[0] for u in nb.get(v.vid, []) if vm[u].kind == DIAMOND]
        if not circles and not (rules.small and len(v.elements) == 1):
            out.append(f"rectangle {_short(v)} has no circle attached")
        elif not rules.attachments_ok(counts, circles, diamonds):
            out.append(f"rectangle {_short(v)} has inadmissible circles or diamonds")
    return out


def validate_forest(forest: AdmissibleForest, spec: IdealSpec, nvec=None,
                    regime: str = "auto") -> Diagnosis:
    regime = _forest_regime(spec, regime)
    _check_small(spec, regime)
    v = forest_violations(forest, spec, nvec, regime)
    return Diagnosis(not v, v, regime)


# -- enumeration -------------------------------------------------------------

def _rect_partitions(pts, rules: _Rules):
    """Split ``pts`` into rectangles and loose points (rectangles keyed by min)."""
    if not pts:
        yield [], []
        return
    p, rest = pts[0], pts[1:]
    for rects, loose in _rect_partitions(rest, rules):
        yield rects, [p] + loose
    for r in range(0, len(rest) + 1):
        for combo in itertools.combinations(rest, r):
            box = (p,) + combo
            if not rules.rect_ok(count_colors(box, rules.m)):
                continue
            left = tuple(q for q in rest if q not in combo)
            for rects, loose in _rect_partitions(left, rules):
                yield [box] + rects, loose


def _forests_on(k: int):
    """Edge sets of all forests on vertices 0..k-1."""
    pairs = list(itertools.combinations(range(k), 2))
    for r in range(0, max(k, 1)):
        for es in itertools.combinations(pairs, r):
            parent = list(range(k))

            def find(x):
                while parent[x] != x:
                    x = parent[x]
                return x

            ok = True
            for a, b in es:
                ra, rb = find(a), find(b)
                if ra == rb:
                    ok = False
                    break
                parent[ra] = rb
            if ok:
                yield es


def _attachment_choices(rects, loose, rules: _Rules):
    """Every way to hang loose points off rectangles as circles or diamonds."""
    options = []
    for p in loose:
        opts = [None]
        for i in range(len(rects)):
            opts.append((i, CIRCLE))
            if rules.regime == BICOLORED:
                opts.append((i, DIAMOND))
        options.append(opts)
    for pick in itertools.product(*options):
        circ = [[] for _ in rects]
        dia = [[] for _ in rects]
        for p, o in zip(loose, pick):
            if o is None:
                continue
            (circ if o[1] == CIRCLE else dia)[o[0]].append(p)
        if all(rules.attachments_ok(count_colors(r, rules.m), c, dd)
               for r, c, dd in zip(rects, circ, dia)):
            yield pick


def _all_forests(spec, d, nvec, regime):
    rules = _Rules(spec, regime)
    pts = tuple(all_points(nvec))
    for rects, loose in _rect_partitions(pts, rules):
        for pick in _attachment_choices(rects, loose, rules):
            verts = [Vertex(RECT, r) for r in rects]
            leaf_edges = []
            for p, o in zip(loose, pick):
                kind = CIRCLE if o is None or o[1] == CIRCLE else DIAMOND
                verts.append(Vertex(kind, (p,)))
                if o is not None:
                    leaf_edges.append((rects[o[0]][0], p))
            for es in _forests_on(len(rects)):
                redges = [(rects[a][0], rects[b][0]) for a, b in es]
                all_edges = leaf_edges + redges
                if d > 1:
                    f = make_forest(verts, all_edges)
                    yield canonicalize(f, d)[0]
                else:
                    for flips in itertools.product((False, True), repeat=len(all_edges)):
                        e2 = [(b, a) if fl else (a, b) for (a, b), fl in zip(all_edges, flips)]
                        yield canonicalize(make_forest(verts, e2), d)[0]


_CACHE: Dict[tuple, object] = {}


def _cached(key, build):
    got = _CACHE.get(key)
    if got is None:
        got = build()
        _CACHE[key] = got
    return got


def _forests_by_degree(spec, d, nvec, regime) -> Dict[int, list]:
    def build():
        out = defaultdict(list)
        for f in _all_forests(spec, d, nvec, regime):
            out[forest_degree(f, d)].append(f)
        for k in out:
            out[k].sort(key=_sort_key)
        return dict(out)
    return _cached(("forests", spec, d, nvec, regime), build)


def enumerate_forests(spec: IdealSpec, d: int, nvec, degree: Optional[int] = None,
                      regime: str = "auto", basis_only: bool = False) -> List[AdmissibleForest]:
    """Canonical admissible forests (or basis forests) on the colour vector."""
    nvec = check_nvec(spec, nvec)
    regime = _forest_regime(spec, regime)
    _check_small(spec, regime)
    if basis_only:
        table = _basis_by_degree(spec, d, nvec, regime)
    else:
        table = _forests_by_degree(spec, d, nvec, regime)
    if degree is None:
        return [f for k in sorted(table) for f in table[k]]
    return list(table.get(degree, []))


# -- the dual map and linear trees --------------------------------------------

def _block_vertices(core: Expr, followers, spec, rules: _Rules):
    """Rectangle contents and attached leaves for one block of a factor."""
    if isinstance(core, Nested):
        outer = list(core.outer)
        inner = list(core.inner.points())
        rect = outer[:-1] + inner[:-1]
        circles = [outer[-1], inner[-1]] + list(followers)
        return rect, circles, []
    pts = sorted(core.points())
    if rules.regime == DECREASING:
        k = max(p.color for p in pts)
        top = max(p for p in pts if p.color == k)
        return [p for p in pts if p != top], [top] + list(followers), []
    xs = [p for p in pts if p.color == 1]
    ys = [p for p in pts if p.color == 2]
    n, m = len(xs), len(ys)
    fx = [p for p in followers if p.color == 1]
    fy = [p for p in followers if p.color == 2]
    if m == 0 or n == 0:
        # one-colour sphere: drop its largest point into a circle
        return pts[:-1], [pts[-1]] + list(followers), []
    if (n, m) in rules.dprime:
        rect = xs[:-1] + ys[:-1]
        circles = xs[-1:] + fx
        diamonds = ys[-1:] + fy
        return rect, circles, diamonds
    x_wins = xs and (not fx or xs[-1] > max(fx))
    if (n - 1, m) in rules.cprime and x_wins:
        return xs[:-1] + ys, [xs[-1]] + list(followers), []
    if (n, m - 1) in rules.cprime:
        return xs + ys[:-1], [ys[-1]] + list(followers), []
    return None


def dual_of_generator(expr: Expr, spec: IdealSpec, d: int = 2,
                      regime: str = "auto") -> AdmissibleForest:
    """The basis forest paired with a homology basis element.

    For ``d > 1`` each factor ``[..[B1, B2]..Bl]`` becomes a path of
    rectangles A1 -> .. -> Al.  For ``d = 1`` the local classes of the
    ordered product become the path in their order of appearance and the
    points following a local class hang off its rectangle."""
    regime = _forest_regime(spec, regime)
    rules = _Rules(spec, regime)
    verts, edges = [], []

    def add_block(core, followers, prev):
        got = _block_vertices(core, followers, spec, rules)
        if got is None:
            raise ValueError(f"{core.text()} has no dual rectangle")
        rect, circles, diamonds = got
        rv = Vertex(RECT, tuple(rect))
        verts.append(rv)
        if prev is not None:
            edges.append((prev, rv.vid))
        for p in circles:
            verts.append(Vertex(CIRCLE, (p,)))
            edges.append((rv.vid, p))
        for p in diamonds:
            verts.append(Vertex(DIAMOND, (p,)))
            edges.append((rv.vid, p))
        return rv.vid

    items = factors_of(expr)
    if d == 1:
        prev = None
        core, run = None, []
        for it in items + [None]:
            if isinstance(it, Singleton):
                if core is None:
                    verts.append(Vertex(CIRCLE, (it.point,)))
                else:
                    run.append(it.point)
                continue
            if core is not None:
                prev = add_block(core, run, prev)
            core, run = it, []
    else:
        for it in items:
            if isinstance(it, Singleton):
                verts.append(Vertex(CIRCLE, (it.point,)))
                continue
            blocks = split_factor(it)
            if blocks is None:
                raise ValueError(f"{it.text()} is not a basis factor")
            prev = None
            for core, apps in blocks:
                prev = add_block(core, apps, prev)
    order = [("r", v.vid) for v in verts if v.kind == RECT] + [("e", e) for e in edges]
    return canonicalize(make_forest(verts, edges, order), d)[0]


def _tree_paths(f: AdmissibleForest):
    """Per tree: the rectangles in path order (None if not a path), leaves."""
    vm = f.vmap()
    nb = f.neighbours()
    out = []
    for comp in _components(f.vertices, f.edges):
        rects = [u for u in comp if vm[u].kind == RECT]
        if not rects:
            continue
        rnb = {u: [w for w in nb[u] if vm[w].kind == RECT] for u in rects}
        ends = [u for u in rects if len(rnb[u]) <= 1]
        if any(len(rnb[u]) > 2 for u in rects) or (len(rects) > 1 and len(ends) != 2):
            out.append((comp, None))
            continue
        out.append((comp, ends))
    return out


def _walk(start, rnb):
    path = [start]
    prev = None
    while True:
        nxt = [w for w in rnb[path[-1]] if w != prev]
        if not nxt:
            return path
        prev = path[-1]
        path.append(nxt[0])


def _block_core(rect, circles, diamonds, spec, rules: _Rules):
    """Invert :func:`_block_vertices`: the local class and its followers."""
    if rules.regime == DECREASING:
        allp = list(rect) + list(circles)
        k = max(p.color for p in allp)
        top = max(p for p in allp if p.color == k)
        if top in rect:
            return None
        core = Curly(tuple(rect) + (top,))
        return core, sorted(p for p in circles if p != top)
    xs = sorted(p for p in rect if p.color == 1)
    ys = sorted(p for p in rect if p.color == 2)
    n, m = len(xs), len(ys)
    cx = sorted(p for p in circles if p.color == 1)
    cy = sorted(p for p in circles if p.color == 2)
    if diamonds:
        if (n + 1, m + 1) not in rules.dprime or not cx or any(p.color != 2 for p in diamonds):
            return None
        dy = sorted(diamonds)
        core = Curly(tuple(sorted(xs + [cx[-1]] + ys + [dy[-1]])))
        fol = sorted(cx[:-1] + dy[:-1])
        if local_class_violations(core, spec, rules.regime):
            return None
        if follower_violations(core, fol, spec, rules.regime):
            return None
        got = _block_vertices(core, fol, spec, rules)
        if got is None or [sorted(x) for x in got] != [sorted(rect), cx, dy]:
            return None
        return core, fol
    cands = []
    if cx:
        cands.append(Curly(tuple(xs + ys + [cx[-1]])))
    if cy:
        cands.append(Curly(tuple(xs + ys + [cy[-1]])))
    if cx and cy:
        for outer_c in (1, 2):
            outer = (xs + [cx[-1]]) if outer_c == 1 else (ys + [cy[-1]])
            inner = (ys + [cy[-1]]) if outer_c == 1 else (xs + [cx[-1]])
            cands.append(Nested(tuple(outer), Curly(tuple(inner))))
    found = []
    for core in cands:
        fol = sorted(p for p in circles if p not in core.points())
        if local_class_violations(core, spec, rules.regime):
            continue
        if follower_violations(core, fol, spec, rules.regime):
            continue
        got = _block_vertices(core, fol, spec, rules)
        if got is None:
            continue
        r2, c2, d2 = got
        if sorted(r2) == sorted(rect) and sorted(c2) == sorted(circles) and not d2:
            found.append((core, fol))
    return found[0] if len(found) == 1 else None


def linear_tree_violations(forest: AdmissibleForest, spec: IdealSpec, d: int,
                           regime: str = "auto") -> list:
    regime = _forest_regime(spec, regime)
    rules = _Rules(spec, regime)
    bad = forest_violations(forest, spec, None, regime, rules)
    if bad:
        return bad
    vm = forest.vmap()
    nb = forest.neighbours()
    trees = _tree_paths(forest)
    if d == 1 and len(trees) > 1:
        return ["for d = 1 at most one tree may contain rectangles"]
    out = []
    for comp, ends in trees:
        if ends is None:
            out.append("a tree is not a path of rectangles")
            continue
        rects = [u for u in comp if vm[u].kind == RECT]
        rnb = {u: [w for w in nb[u] if vm[w].kind == RECT] for u in rects}
        lo = min(p for u in comp for p in vm[u].elements)

        def block(u):
            leaves = [w for w in nb[u] if vm[w].kind != RECT]
            circles = [vm[w].elements[0] for w in leaves if vm[w].kind == CIRCLE]
            diamonds = [vm[w].elements[0] for w in leaves if vm[w].kind == DIAMOND]
            return list(vm[u].elements), circles, diamonds

        def bset(u):
            r, c, dd = block(u)
            return set(r) | set(c) | set(dd)

        starts = [e for e in ends]
        if d == 1:
            # the direction of the path is read off the edges
            starts = [u for u in ends if all((w, u) not in forest.edges for w in rnb[u])]
            if len(rects) == 1:
                starts = ends
            if len(starts) != 1:
                out.append("rectangle path is not directed from one end")
                continue
            for a, b in forest.edges:
                if vm[a].kind != RECT and vm[b].kind == RECT:
                    out.append("edges must point from rectangles to their leaves")
                    break
        else:
            starts = [u for u in ends if lo in bset(u)]
            if len(starts) != 1:
                out.append(f"smallest point {lo} of the tree is not in the first block")
                continue
        path = _walk(starts[0], rnb)
        if d == 1:
            if any((path[i], path[i + 1]) not in forest.edges for i in range(len(path) - 1)):
                out.append("rectangle path is not directed from one end")
                continue
        for u in path:
            r, c, dd = block(u)
            if _block_core(r, c, dd, spec, rules) is None:
                out.append(f"block around {_short(vm[u])} does not come from a basis block")
    return out


def is_linear_tree(forest: AdmissibleForest, spec: IdealSpec, regime: str = "auto",
                   d: int = 2) -> bool:
    """Whether ``forest`` is a product of linear trees and singleton circles."""
    return not linear_tree_violations(forest, spec, d, regime)


def _basis_by_degree(spec, d, nvec, regime) -> Dict[int, list]:
    def build():
        out = defaultdict(list)
        for e in enumerate_basis(spec, d, nvec, regime=regime):
            f = dual_of_generator(e, spec, d, regime)
            out[forest_degree(f, d)].append(f)
        if not any(nvec):
            out[0] = [make_forest([])]
        for k in out:
            out[k].sort(key=_sort_key)
        return dict(out)
    return _cached(("basis", spec, d, nvec, regime), build)


# -- relators ----------------------------------------------------------------
#
# Relators come from boundaries of cells.  A face that is not an admissible
# forest is kept as an auxiliary column, keyed by its chain (edge directions
# are kept, since reversing an edge only relates cocycles).  Auxiliary
# columns are eliminated first, so only combinations free of them survive.
# A rectangle with diamonds stands for the signed sum of the chains in which
# one of its diamonds has joined the rectangle (see ``_expand``).

OK, AUX, BAD = "ok", "aux", "bad"


def _status(f: AdmissibleForest, rules: _Rules) -> str:
    """``ok`` if admissible, ``aux`` for other forest-shaped chains and
    ``bad`` for non-forests."""
    if not _acyclic(f.vertices, f.edges):
        return BAD
    vm = f.vmap()
    nb = f.neighbours()
    verdict = OK
    for v in f.vertices:
        ns = nb.get(v.vid, [])
        if v.kind != RECT:
            if v.kind == STAR:
                return BAD
            if v.kind == DIAMOND and (len(ns) != 1 or vm[ns[0]].kind != RECT):
                return BAD
            if len(ns) > 1 or (ns and vm[ns[0]].kind != RECT):
                verdict = AUX
            continue
        counts = count_colors(v.elements, rules.m)
        circles = [vm[u].elements[0] for u in ns if vm[u].kind == CIRCLE]
        diamonds = [vm[u].elements[0] for u in ns if vm[u].kind == DIAMOND]
        if not rules.attachments_ok(counts, circles, diamonds):
            verdict = AUX
    return verdict


def _edge_between(f, a, b):
    if (a, b) in f.edges:
        return (a, b)
    if (b, a) in f.edges:
        return (b, a)
    return None


def _without_edges(f: AdmissibleForest, drop) -> Tuple[list, list]:
    drop = set(drop)
    edges = [e for e in f.edges if e not in drop]
    order = [it for it in f.order if not (it[0] == "e" and it[1] in drop)]
    return edges, order


def _absorb(f: AdmissibleForest, rvid, u, e, demote=False) -> AdmissibleForest:
    """Move the leaf ``u`` into rectangle ``rvid`` (appended last), dropping
    edge ``e``; with ``demote`` the other diamonds of the rectangle become
    circles."""
    vm = f.vmap()
    nb = f.neighbours()
    newR = Vertex(RECT, vm[rvid].elements + vm[u].elements)
    nvid = newR.vid

    def rn(x):
        return nvid if x == rvid else x

    verts = [newR]
    for v in f.vertices:
        if v.vid in (rvid, u):
            continue
        if demote and v.kind == DIAMOND and rvid in nb.get(v.vid, []):
            v = Vertex(CIRCLE, v.elements)
        verts.append(v)
    edges = [(rn(a), rn(b)) for a, b in f.edges if (a, b) != e]
    order = []
    for kind, key in f.order:
        if kind == "r":
            order.append(("r", rn(key)))
        elif key != e:
            order.append(("e", (rn(key[0]), rn(key[1]))))
    return make_forest(verts, edges, order)


def _expand_at(f: AdmissibleForest, rvid, d: int):
    """Pieces of the diamond rectangle ``rvid``: (chain, new vid, sign)."""
    f, s0 = canonicalize(f, d, orient_edges=False)
    vm = f.vmap()
    nb = f.neighbours()
    grades = _grades(f, d)
    items = list(f.order)
    pos_r = items.index(("r", rvid))
    out = []
    for k in sorted(u for u in nb.get(rvid, []) if vm[u].kind == DIAMOND):
        e = _edge_between(f, rvid, k)
        between = sum(grades[it] for it in items[pos_r + 1:items.index(("e", e))])
        s = -s0 if ((d - 1) * between) % 2 else s0
        if e[0] == k and d % 2:
            s = -s
        piece = _absorb(f, rvid, k, e, demote=True)
        out.append((piece, min(rvid, k), s))
    return out


def _expand(f: AdmissibleForest, d: int) -> list:
    """Signed chains without diamonds whose sum is ``f``."""
    vm = f.vmap()
    for R in f.rects():
        if _has_diamond(f, R.vid, vm):
            return [(p2, s * s2) for piece, _, s in _expand_at(f, R.vid, d)
                    for p2, s2 in _expand(piece, d)]
    return [(f, 1)]


def _resolve(terms, d, rules, aux_ok=True) -> Optional[dict]:
    """Row ``{("f"|"a", canonical chain): coeff}`` from (forest, sign) terms,
    or None if a term cannot be expressed."""
    row: Dict[tuple, int] = defaultdict(int)
    stack = list(terms)
    while stack:
        f, c = stack.pop()
        st = _status(f, rules)
        if st == BAD:
            return None
        if st == OK:
            g, s = canonicalize(f, d)
            row[("f", g.with_coeff(1))] += c * s
            continue
        if not aux_ok:
            return None
        if any(v.kind == DIAMOND for v in f.vertices):
            stack.extend((p, c * s) for p, s in _expand(f, d))
            continue
        g, s = canonicalize(f, d, orient_edges=False)
        row[("a", g.with_coeff(1))] += c * s
    return {k: v for k, v in row.items() if v}


def _replace_edges(f: AdmissibleForest, swaps) -> AdmissibleForest:
    """Put new edges in the order slots of old ones: ``swaps`` maps old to new."""
    edges = [swaps.get(e, e) for e in f.edges]
    order = [("e", swaps.get(k, k)) if t == "e" else (t, k) for t, k in f.order]
    return make_forest(f.vertices, edges, order)


def _three_term(f: AdmissibleForest, d: int, rules: _Rules):
    """Two edges at a rectangle B pointing the same way: the chain splits by
    which far end comes first along the line."""
    vm = f.vmap()
    nb = f.neighbours()
    pos = {k: i for i, (t, k) in enumerate(f.order) if t == "e"}
    for B in f.rects():
        b = B.vid
        near = sorted((u for u in nb.get(b, []) if vm[u].kind != DIAMOND),
                      key=lambda u: pos[_edge_between(f, b, u)])
        for A, C in itertools.combinations(near, 2):
            eA, eC = _edge_between(f, A, b), _edge_between(f, b, C)
            sgn = 1
            if d > 1:
                if eA[0] != b and d % 2:
                    sgn = -sgn
                if eC[0] != b and d % 2:
                    sgn = -sgn
                out = True
            elif eA[0] == b and eC[0] == b:
                out = True
            elif eA[1] == b and eC[1] == b:
                out = False
            else:
                continue
            if out:
                t1 = _replace_edges(f, {eA: (b, A), eC: (A, C)})
                t2 = _replace_edges(f, {eA: (C, A), eC: (b, C)})
            else:
                t1 = _replace_edges(f, {eA: (A, C), eC: (C, b)})
                t2 = _replace_edges(f, {eA: (A, b), eC: (C, A)})
            yield "three-term", _resolve([(f, 1), (t1, -sgn), (t2, -sgn)], d, rules)


def _edge_split(f: AdmissibleForest, d: int, rules: _Rules):
    """d = 1: an edge plus its reverse equals the forest without it.  For a
    diamond the cut forest frees it as a circle, and is zero if that leaves
    the rectangle without diamonds."""
    vm = f.vmap()
    nb = f.neighbours()
    for e in f.edges:
        a, b = e
        if vm[a].kind != RECT and vm[b].kind != RECT:
            continue
        edges, order = _without_edges(f, [e])
        rev = make_forest(f.vertices, edges + [(b, a)], order + [("e", (b, a))])
        terms = [(f, 1), (rev, 1)]
        leaf = a if vm[a].kind != RECT else b
        rect = b if leaf == a else a
        if vm[leaf].kind == DIAMOND:
            if sum(1 for u in nb[rect] if vm[u].kind == DIAMOND) > 1:
                verts = [Vertex(CIRCLE, v.elements) if v.vid == leaf else v
                         for v in f.vertices]
                terms.append((make_forest(verts, edges, order), -1))
        else:
            terms.append((make_forest(f.vertices, edges, order), -1))
        yield "edge-split", _resolve(terms, d, rules)


def _weight_one(f: AdmissibleForest, d: int, rules: _Rules):
    """A one-point rectangle hanging off at most one rectangle is a circle."""
    vm = f.vmap()
    nb = f.neighbours()
    for R in f.rects():
        if len(R.elements) != 1:
            continue
        ns = nb.get(R.vid, [])
        if len(ns) > 1 or any(vm[u].kind != RECT for u in ns):
            continue
        verts = [v for v in f.vertices if v.vid != R.vid] + [Vertex(CIRCLE, R.elements)]
        order = [it for it in f.order if it != ("r", R.vid)]
        yield "weight-one", _resolve([(f, 1), (make_forest(verts, f.edges, order), -1)],
                                     d, rules)


def _diamond_sum(f: AdmissibleForest, d: int, rules: _Rules):
    """A forest with diamonds equals the sum of its pieces."""
    if any(v.kind == DIAMOND for v in f.vertices):
        yield "diamond-sum", _resolve([(f, 1)] + [(p, -s) for p, s in _expand(f, d)],
                                      d, rules)


def _merge(cell: AdmissibleForest, rvid, svid, e) -> AdmissibleForest:
    """Rectangle ``svid`` joins ``rvid`` (its points appended), edge ``e`` dropped."""
    vm = cell.vmap()
    newR = Vertex(RECT, vm[rvid].elements + vm[svid].elements)
    nvid = newR.vid

    def rn(x):
        return nvid if x in (rvid, svid) else x

    verts = [newR] + [v for v in cell.vertices if v.vid not in (rvid, svid)]
    edges = [(rn(a), rn(b)) for a, b in cell.edges if (a, b) != e]
    order = []
    for kind, key in cell.order:
        if kind == "r":
            if key != svid:
                order.append(("r", rn(key)))
        elif key != e:
            order.append(("e", (rn(key[0]), rn(key[1]))))
    return make_forest(verts, edges, order)


def _faces_at(cell: AdmissibleForest, rvid, d: int, rules: _Rules, grades, items):
    """Faces where rectangle ``rvid`` absorbs a circle or meets a later
    rectangle, as (chain, sign) terms."""
    spec = rules.spec
    vm = cell.vmap()
    nb = cell.neighbours()
    rc = count_colors(vm[rvid].elements, rules.m)
    pos_r = items.index(("r", rvid))
    terms = []
    for u in sorted(nb.get(rvid, [])):
        U = vm[u]
        if U.kind == RECT and items.index(("r", u)) < pos_r:
            continue
        uc = count_colors(U.elements, rules.m)
        if not spec.contains(tuple(x + y for x, y in zip(rc, uc))):
            continue
        e = _edge_between(cell, rvid, u)
        pos_e = items.index(("e", e))
        before = sum(grades[it] for it in items[:pos_e])
        between = sum(grades[it] for it in items[pos_r + 1:pos_e])
        sign = -1 if (before + d * between) % 2 == 0 else 1
        if e[0] == u and d % 2:
            sign = -sign
        if U.kind != RECT:
            terms.append((_absorb(cell, rvid, u, e), sign))
            continue
        # the neighbour's block moves to just behind the edge
        passed = sum(grades[it] for it in items[pos_r + 1:items.index(("r", u))])
        if (grades[("r", u)] * passed) % 2:
            sign = -sign
        terms.append((_merge(cell, rvid, u, e), sign))
    return terms


def _cell_faces(cell: AdmissibleForest, d: int, rules: _Rules):
    """Boundary of a chain without diamonds: every collision of a rectangle
    with a neighbour that stays inside the ideal.  None for a chain lying
    outside the space."""
    vm = cell.vmap()
    if any(not rules.spec.contains(count_colors(v.elements, rules.m))
           for v in cell.vertices if v.kind == RECT):
        return None
    grades = _grades(cell, d)
    items = list(cell.order)
    first_edge = min((i for i, it in enumerate(items) if it[0] == "e"), default=len(items))
    if any(it[0] == "r" for it in items[first_edge:]):
        raise InconsistentRelators("rectangles must precede edges in a cell")
    terms = []
    for v in cell.vertices:
        if v.kind == RECT:
            terms.extend(_faces_at(cell, v.vid, d, rules, grades, items))
    return terms


def _cell_boundary(cell: AdmissibleForest, rvid, d: int, rules: _Rules):
    terms = []
    for piece, s in _expand(cell, d):
        faces = _cell_faces(piece, d, rules)
        if faces is None:
            continue
        terms.extend((g, s * t) for g, t in faces)
    return terms


def _pull(f: AdmissibleForest, qvid, z, d: int):
    """Cells where ``z`` has left rectangle ``qvid`` and hangs off the rest."""
    vm = f.vmap()
    Q = vm[qvid]
    R = Vertex(RECT, tuple(p for p in Q.elements if p != z))
    rv = R.vid
    verts = [v for v in f.vertices if v.vid != qvid] + [R, Vertex(CIRCLE, (z,))]

    def rn(x):
        return rv if x == qvid else x

    edges = [(rn(a), rn(b)) for a, b in f.edges]
    order = []
    for kind, key in f.order:
        if kind == "r":
            order.append(("r", rv) if key == qvid else (kind, key))
        else:
            order.append(("e", (rn(key[0]), rn(key[1]))))
    for new in ([(rv, z)] if d > 1 else [(rv, z), (z, rv)]):
        yield make_forest(verts, edges + [new], order + [("e", new)]), rv


def _cells_from(f: AdmissibleForest, d: int, rules: _Rules):
    """Cells with ``f`` on their boundary: a point pulled out of a rectangle,
    or the diamonds of a rectangle turned into circles.  A one-point
    rectangle with diamonds is handled through its pieces."""
    vm = f.vmap()
    nb = f.neighbours()
    for Q in f.rects():
        dia = {u for u in nb.get(Q.vid, []) if vm[u].kind == DIAMOND}
        if dia:
            verts = [Vertex(CIRCLE, v.elements) if v.vid in dia else v for v in f.vertices]
            yield make_forest(verts, f.edges, f.order), Q.vid
            if len(Q.elements) == 1:
                for piece, pv, _ in _expand_at(f, Q.vid, d):
                    for z in piece.vmap()[pv].elements:
                        yield from _pull(piece, pv, z, d)
        if len(Q.elements) > 1:
            for z in Q.elements:
                yield from _pull(f, Q.vid, z, d)


def _exchange(f: AdmissibleForest, d: int, rules: _Rules):
    for cell, rvid in _cells_from(f, d, rules):
        terms = _cell_boundary(cell, rvid, d, rules)
        if terms is not None:
            yield "exchange", _resolve(terms, d, rules)


def _leafless(f: AdmissibleForest, d: int, rules: _Rules):
    """A chain with a rectangle carrying no leaves: pulling a point out of
    that rectangle gives a cell whose other faces are rectangle meetings."""
    vm = f.vmap()
    nb = f.neighbours()
    for Q in f.rects():
        ns = nb.get(Q.vid, [])
        if any(vm[u].kind != RECT for u in ns):
            continue
        counts = count_colors(Q.elements, rules.m)
        if rules.attachments_ok(counts, [], []):
            continue
        if len(Q.elements) == 1:
            if len(ns) > 1:
                continue
            verts = [v for v in f.vertices if v.vid != Q.vid] + [Vertex(CIRCLE, Q.elements)]
            order = [it for it in f.order if it != ("r", Q.vid)]
            yield "leafless", _resolve([(f, 1), (make_forest(verts, f.edges, order), -1)],
                                       d, rules)
            return
        cell, rv = next(_pull(f, Q.vid, Q.elements[-1], d))
        terms = _cell_boundary(cell, rv, d, rules)
        if terms is not None:
            yield "leafless", _resolve(terms, d, rules)
        return


def _row_key(row: dict):
    first = min(row, key=lambda k: (k[0], _sort_key(k[1])))
    s = 1 if row[first] > 0 else -1
    return frozenset((k, s * v) for k, v in row.items())


def _relator_rows(spec, d, nvec, regime, degree) -> list:
    def build():
        rules = _Rules(spec, regime)
        seen = set()
        out = []
        pending = []
        known_aux = set()

        def take(name, row):
            if not row:
                return
            key = _row_key(row)
            if key in seen:
                return
            seen.add(key)
            out.append((name, row))
            for k in row:
                if k[0] == "a" and k[1] not in known_aux:
                    known_aux.add(k[1])
                    pending.append(k[1])

        for f in _forests_by_degree(spec, d, nvec, regime).get(degree, []):
            gens = [_three_term(f, d, rules), _exchange(f, d, rules),
                    _diamond_sum(f, d, rules)]
            if d == 1:
                gens.append(_edge_split(f, d, rules))
            if rules.small:
                gens.append(_weight_one(f, d, rules))
            for gen in gens:
                for name, row in gen:
                    take(name, row)
        while pending:
            for name, row in _leafless(pending.pop(), d, rules):
                take(name, row)
        return out
    return _cached(("relators", spec, d, nvec, regime, degree), build)


def cohom_relation_instances(spec: IdealSpec, d: int, nvec, regime: str = "auto",
                             degree: Optional[int] = None) -> List[Cochain]:
    """Relators among admissible forests, one degree (all degrees if None).

    Instances that involve auxiliary chains are combined so that those
    cancel; the result spans the same space as all relation instances."""
    nvec = check_nvec(spec, nvec)
    regime = _forest_regime(spec, regime)
    _check_small(spec, regime)
    if degree is None:
        table = _forests_by_degree(spec, d, nvec, regime)
        return [r for k in sorted(table)
                for r in cohom_relation_instances(spec, d, nvec, regime, k)]
    return list(_quotient(spec, d, nvec, regime, degree).relators)


# -- reduction ---------------------------------------------------------------

@dataclass
class _Quotient:
    columns: list
    index: dict
    basis: list
    echelon: Echelon
    free: list
    n_aux: int
    relators: list

    @property
    def rank(self) -> int:
        return sum(1 for c in self.echelon.pivots if c >= self.n_aux)

    @property
    def dim(self) -> int:
        return len(self.columns) - self.rank


def _integral(row: dict) -> dict:
    den = 1
    for v in row.values():
        den = den * v.denominator // _gcd(den, v.denominator)
    vals = {k: int(v * den) for k, v in row.items()}
    g = 0
    for v in vals.values():
        g = _gcd(g, abs(v))
    return {k: v // g for k, v in vals.items()}


def _quotient(spec, d, nvec, regime, degree) -> _Quotient:
    def build():
        allf = _forests_by_degree(spec, d, nvec, regime).get(degree, [])
        basis = _basis_by_degree(spec, d, nvec, regime).get(degree, [])
        bset = set(basis)
        missing = [f for f in basis if f not in set(allf)]
        if missing:
            raise InconsistentRelators(f"basis forest {missing[0].text()} is not admissible")
        rows = _relator_rows(spec, d, nvec, regime, degree)
        aux = sorted({k[1] for _, r in rows for k in r if k[0] == "a"}, key=_sort_key)
        cols = [f for f in allf if f not in bset] + list(basis)
        n_aux = len(aux)
        index = {("a", f): i for i, f in enumerate(aux)}
        index.update({("f", f): n_aux + i for i, f in enumerate(cols)})
        e = Echelon()
        for _, r in rows:
            e.add({index[k]: v for k, v in r.items()})
        relators = []
        for c in sorted(e.pivots):
            if c < n_aux:
                continue
            row = _integral(e.pivots[c])
            ch = Cochain(degree)
            for i, v in row.items():
                ch.add(cols[i - n_aux], v, d, canonical=True)
            relators.append(ch)
        free = [cols[i] for i in range(len(cols)) if i + n_aux not in e.pivots]
        fidx = {f: n_aux + i for i, f in enumerate(cols)}
        return _Quotient(cols, fidx, basis, e, free, n_aux, relators)
    return _cached(("quotient", spec, d, nvec, regime, degree), build)


def quotient_report(spec: IdealSpec, d: int, nvec, regime: str = "auto",
                    degree: Optional[int] = None) -> dict:
    """Per degree: forests, relator rank, quotient dimension, basis size."""
    nvec = check_nvec(spec, nvec)
    regime = _forest_regime(spec, regime)
    _check_small(spec, regime)
    table = _forests_by_degree(spec, d, nvec, regime)
    degs = sorted(table) if degree is None else [degree]
    out = {}
    for k in degs:
        q = _quotient(spec, d, nvec, regime, k)
        out[k] = {"forests": len(q.columns), "rank": q.rank, "quotient": q.dim,
                  "basis": len(q.basis), "basis_spans": set(q.free) == set(q.basis)}
    return out


def reduce_to_basis(c, spec: IdealSpec, d: int, nvec, regime: str = "auto") -> Cochain:
    """Coordinates of a cochain (or forest) in the linear-tree basis."""
    nvec = check_nvec(spec, nvec)
    regime = _forest_regime(spec, regime)
    _check_small(spec, regime)
    if isinstance(c, AdmissibleForest):
        c = cochain_of(c, d)
    if not c.terms:
        return Cochain(c.grade)
    grades = {forest_degree(f, d) for f in c.terms}
    if len(grades) != 1:
        raise ValueError("cochain mixes degrees")
    k = grades.pop()
    q = _quotient(spec, d, nvec, regime, k)
    if set(q.free) != set(q.basis):
        raise InconsistentRelators(
            f"degree {k}: quotient dimension {q.dim} with {len(q.basis)} basis forests")
    vec = {}
    for f, v in c.terms.items():
        f2, s = canonicalize(f, d)
        i = q.index.get(f2.with_coeff(1))
        if i is None:
            raise ValueError(f"forest {f.text()} is not admissible for this ideal")
        vec[i] = vec.get(i, 0) + s * v
    red = q.echelon.reduce(vec)
    out = Cochain(k)
    for i, v in red.items():
        if v.denominator != 1:
            raise InconsistentRelators("non-integral coordinates in the forest basis")
        out.add(q.columns[i - q.n_aux], int(v), d, canonical=True)
    return out


# -- duality -----------------------------------------------------------------

def linear_tree_forests(spec: IdealSpec, d: int, nvec, regime: str = "auto") -> Dict[int, list]:
    """Admissible forests that are products of linear trees, found by
    filtering the full enumeration (independent of the dual map)."""
    nvec = check_nvec(spec, nvec)
    regime = _forest_regime(spec, regime)
    _check_small(spec, regime)
    out = {}
    for k, fs in _forests_by_degree(spec, d, nvec, regime).items():
        got = [f for f in fs if not linear_tree_violations(f, spec, d, regime)]
        if got:
            out[k] = got
    return out


def pairing_check(spec: IdealSpec, d: int, nvec, regime: str = "auto", gm=None) -> dict:
    """Check that the dual map is a degree-preserving bijection from the
    homology basis onto the linear-tree forests, and (``d > 1``) that the
    counts per degree equal the ranks in ``gm`` (computed if not given)."""
    from .expr import degree as expr_degree
    from .gm import gm_betti
    nvec = check_nvec(spec, nvec)
    regime = _forest_regime(spec, regime)
    gens = enumerate_basis(spec, d, nvec, regime=regime)
    image = {}
    problems = []
    for e in gens:
        f = dual_of_generator(e, spec, d, regime)
        if forest_degree(f, d) != expr_degree(e, d):
            problems.append(f"{e.text()}: degree {expr_degree(e, d)} but its forest has "
                            f"degree {forest_degree(f, d)}")
        if f in image:
            problems.append(f"{e.text()} and {image[f].text()} have the same forest")
        image[f] = e
    trees = linear_tree_forests(spec, d, nvec, regime)
    tree_set = {f for fs in trees.values() for f in fs}
    if not any(nvec):
        tree_set.add(make_forest([]))
    for f in sorted(set(image) - tree_set, key=_sort_key):
        problems.append(f"forest of {image[f].text()} is not a linear tree: {f.text()}")
    for f in sorted(tree_set - set(image), key=_sort_key):
        problems.append(f"linear tree {f.text()} is not hit by the dual map")
    counts = defaultdict(int)
    for f in image:
        counts[forest_degree(f, d)] += 1
    report = {"generators": len(gens), "forests": len(tree_set),
              "by_degree": {k: counts[k] for k in sorted(counts)}}
    if d > 1:
        if gm is None:
            gm = gm_betti(spec, nvec, d).ranks
        ranks = {k: v for k, v in dict(gm).items() if v}
        report["gm"] = {k: ranks[k] for k in sorted(ranks)}
        if dict(report["by_degree"]) != report["gm"]:
            problems.append("forest counts differ from the ranks")
    report["ok"] = not problems
    report["problems"] = problems
    return report
