"""Cup product of admissible forests.

The product of two forests is the intersection of their chains.  When the
chains are transversal this is the union forest; otherwise the union carries
leaves hanging off several rectangles, and those are moved apart with the
three-term identity until every leaf has a single neighbour.

Inside the product a leaf edge carries a role: ``"c"`` if the leaf acts as a
circle for that rectangle and ``"dm"`` if it acts as a diamond.  A leaf with
both roles is a star.  Each rectangle keeps the grade it had in its factor;
a term in which a rectangle lost the diamond its grade asks for, or lost all
of its circles, is zero.
"""
from __future__ import annotations

from collections import defaultdict
from typing import Dict, Optional

from .errors import InconsistentRelators
from .forests import (CIRCLE, DIAMOND, RECT, STAR, AdmissibleForest, Cochain, Vertex,
                      _acyclic, _check_small, _forest_regime, _grades, _Rules, _status,
                      forest_degree, forest_violations, make_forest, OK)
from .ideal import IdealSpec

INTERSECTING, SHARED_TREE, CYCLE, NO_CIRCLE, NO_DIAMOND = 1, 2, 3, 4, 5


class _Union:
    """Intermediate product state: vertices, edges, order, leaf roles and the
    grade each rectangle must keep."""

    def __init__(self, verts, edges, order, roles, want):
        self.verts = verts            # vid -> (kind placeholder, elements)
        self.edges = list(edges)
        self.order = list(order)
        self.roles = dict(roles)      # frozenset(edge) -> "c" | "dm"
        self.want = dict(want)        # rect vid -> grade

    def copy(self):
        return _Union(self.verts, self.edges, self.order, self.roles, self.want)

    def rects(self):
        return [v for v, els in self.verts.items() if els[0] == RECT]

    def incident(self, vid):
        return [e for e in self.edges if vid in e]

    def replace(self, old, new, role=None):
        """Put edge ``new`` in the slot of ``old``."""
        self.edges = [new if e == old else e for e in self.edges]
        self.order = [("e", new) if it == ("e", old) else it for it in self.order]
        self.roles.pop(frozenset(old), None)
        if role is not None:
            self.roles[frozenset(new)] = role

    def drop(self, e):
        self.edges.remove(e)
        self.order.remove(("e", e))
        self.roles.pop(frozenset(e), None)

    def leaf_kind(self, vid):
        rs = {self.roles[frozenset(e)] for e in self.incident(vid)}
        if rs == {"c", "dm"}:
            return STAR
        if rs == {"dm"}:
            return DIAMOND
        return CIRCLE


def _components(f: AdmissibleForest) -> Dict:
    parent = {p: p for p in f.points()}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for v in f.vertices:
        for p in v.elements[1:]:
            parent[find(p)] = find(v.elements[0])
    vm = f.vmap()
    for a, b in f.edges:
        parent[find(vm[a].elements[0])] = find(vm[b].elements[0])
    return {p: find(p) for p in parent}


def _build_union(lhs: AdmissibleForest, rhs: AdmissibleForest, d: int, rules: _Rules):
    """The union of two forests, or the number of the zero case that applies."""
    small = rules.small
    if lhs.points() != rhs.points():
        raise ValueError("the factors live on different point sets")
    # 1: rectangles meeting (one-point rectangles merge when relaxed)
    for A in lhs.rects():
        for B in rhs.rects():
            if set(A.elements) & set(B.elements):
                if not small or (len(A.elements) > 1 and len(B.elements) > 1):
                    return INTERSECTING
    # 2: two points sharing a tree in both factors
    c1, c2 = _components(lhs), _components(rhs)
    seen = {}
    for p in lhs.points():
        key = (c1[p], c2[p])
        if key in seen:
            return SHARED_TREE
        seen[key] = p
    # vertices of the union
    parent = {p: p for p in lhs.points()}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for f in (lhs, rhs):
        for R in f.rects():
            for p in R.elements[1:]:
                a, b = find(R.elements[0]), find(p)
                if a != b:
                    parent[max(a, b)] = min(a, b)
    groups = defaultdict(list)
    for p in lhs.points():
        groups[find(p)].append(p)
    in_rect = {p for f in (lhs, rhs) for R in f.rects() for p in R.elements}
    verts = {}
    home = {}
    for root, pts in groups.items():
        pts = sorted(pts)
        kind = RECT if pts[0] in in_rect else CIRCLE
        if kind == RECT:
            # keep the element order of the factor rectangle
            src = [R for f in (lhs, rhs) for R in f.rects() if R.elements[0] in pts]
            src.sort(key=lambda R: -len(R.elements))
            els = list(src[0].elements) + [p for p in pts if p not in src[0].elements]
            pts = els
        vid = min(pts)
        verts[vid] = (kind, tuple(pts))
        for p in pts:
            home[p] = vid
    # edges with roles, order by concatenation
    edges, order, roles, want = [], [], {}, {}
    sign = 1
    for f in (lhs, rhs):
        vm = f.vmap()
        g = _grades(f, d)
        for it in f.order:
            kind, key = it
            if kind == "r":
                u = home[key]
                if ("r", u) in order:
                    # a one-point rectangle merged into another: move it next
                    # to the first copy and fold the grades together
                    pos = order.index(("r", u))
                    passed = sum(want.get(k, d - 1) if t == "r" else d - 1
                                 for t, k in order[pos + 1:])
                    if (g[it] * passed) % 2:
                        sign = -sign
                    want[u] += g[it]
                else:
                    order.append(("r", u))
                    want[u] = g[it]
            else:
                a, b = key
                e = (home[a], home[b])
                if e[0] == e[1] or frozenset(e) in {frozenset(x) for x in edges}:
                    return CYCLE
                edges.append(e)
                order.append(("e", e))
                leaf = a if vm[a].kind != RECT else b if vm[b].kind != RECT else None
                if leaf is not None and verts[home[leaf]][0] != RECT:
                    roles[frozenset(e)] = "dm" if vm[leaf].kind == DIAMOND else "c"
    # a diamond of one factor that is a free circle in the other stays a diamond
    u = _Union(verts, edges, order, roles, want)
    if not _acyclic([Vertex(k, els) for k, els in verts.values()], edges):
        return CYCLE
    return u, sign


def _starved(u: _Union, d: int, small: bool) -> Optional[int]:
    """Zero cases 4 and 5 on an intermediate state."""
    for r in u.rects():
        els = u.verts[r][1]
        rs = [u.roles.get(frozenset(e)) for e in u.incident(r)]
        if "c" not in rs and not (small and len(els) == 1):
            return NO_CIRCLE
        if u.want[r] > (len(els) - 1) * d and "dm" not in rs:
            return NO_DIAMOND
    return None


def _settle(u: _Union, coeff: int, d: int, rules: _Rules, out: list):
    """Rewrite until every leaf has one neighbour; append (forest, coeff)."""
    if _starved(u, d, rules.small):
        return
    pos = {it[1]: i for i, it in enumerate(u.order) if it[0] == "e"}
    busy = sorted(v for v, (k, _) in u.verts.items()
                  if k != RECT and len(u.incident(v)) > 1)
    if not busy:
        verts = []
        for v, (k, els) in u.verts.items():
            if k != RECT:
                k = u.leaf_kind(v) if u.incident(v) else CIRCLE
            verts.append(Vertex(k, els))
        out.append((make_forest(verts, u.edges, u.order), coeff))
        return
    x = busy[0]
    eA, eB = sorted(u.incident(x), key=lambda e: pos[e])[:2]
    if d == 1:
        for e in (eA, eB):
            if e[1] == x:
                # an inward edge is the cut chain minus the outward one
                cut = u.copy()
                cut.drop(e)
                _settle(cut, coeff, d, rules, out)
                rev = u.copy()
                rev.replace(e, (x, e[0]), u.roles[frozenset(e)])
                _settle(rev, -coeff, d, rules, out)
                return
    else:
        for e in (eA, eB):
            if e[1] == x and d % 2:
                coeff = -coeff
    A = eA[1] if eA[0] == x else eA[0]
    B = eB[1] if eB[0] == x else eB[0]
    rA, rB = u.roles[frozenset(eA)], u.roles[frozenset(eB)]
    t1 = u.copy()
    t1.replace(eA, (x, A), rA)
    t1.replace(eB, (A, B))
    _settle(t1, coeff, d, rules, out)
    t2 = u.copy()
    t2.replace(eA, (B, A))
    t2.replace(eB, (x, B), rB)
    _settle(t2, coeff, d, rules, out)


def _prepare(lhs, rhs, spec, d, regime):
    regime = _forest_regime(spec, regime)
    _check_small(spec, regime)
    rules = _Rules(spec, regime)
    for f in (lhs, rhs):
        bad = forest_violations(f, spec, None, regime, rules)
        if bad:
            raise ValueError(f"factor is not admissible: {bad[0]}")
    return rules


def zero_case(lhs: AdmissibleForest, rhs: AdmissibleForest, spec: IdealSpec, d: int,
              regime: str = "auto") -> Optional[int]:
    """Number (1 to 5) of the vanishing rule that kills ``lhs * rhs`` outright,
    or None.  The rules are: rectangles meet, two points share a tree in both
    factors, the union has a cycle, a union rectangle has no circle, a union
    rectangle lost its diamonds."""
    rules = _prepare(lhs, rhs, spec, d, regime)
    got = _build_union(lhs, rhs, d, rules)
    if isinstance(got, int):
        return got
    return _starved(got[0], d, rules.small)


def cup(lhs: AdmissibleForest, rhs: AdmissibleForest, spec: IdealSpec, d: int,
        regime: str = "auto") -> Cochain:
    """The product ``lhs * rhs`` as a cochain of canonical admissible forests."""
    rules = _prepare(lhs, rhs, spec, d, regime)
    deg = forest_degree(lhs, d) + forest_degree(rhs, d)
    out = Cochain(deg)
    got = _build_union(lhs, rhs, d, rules)
    if isinstance(got, int):
        return out
    u, sign = got
    terms = []
    _settle(u, sign * lhs.coeff * rhs.coeff, d, rules, terms)
    for f, c in terms:
        if _status(f, rules) != OK or forest_degree(f, d) != deg:
            raise InconsistentRelators(f"product term {f.text()} is not admissible")
        out.add(f, c, d)
    return out


def cup_cochains(a: Cochain, b: Cochain, spec: IdealSpec, d: int,
                 regime: str = "auto") -> Cochain:
    """Bilinear extension of :func:`cup`."""
    out = Cochain((a.grade or 0) + (b.grade or 0))
    for f, x in a.terms.items():
        for g, y in b.terms.items():
            out += cup(f.with_coeff(x), g.with_coeff(y), spec, d, regime)
    return out
