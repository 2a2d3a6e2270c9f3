"""Homology bases of polychromatic configuration spaces over Z/2.

Every basis element is a product of factors built from local classes (sphere
classes indexed by critical tuples, and for two colours the nested
product-of-spheres classes).  The enumerators below generate candidates in
normal form and keep exactly those accepted by :func:`validate_generator`,
so the clause checker and the enumerator cannot drift apart.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import List, Optional

from .errors import (BracketInDimOne, NotDecreasingNotBicolored, RectangularIdeal,
                     WrongArity)
from .expr import (Bracket, Curly, Expr, FormalSum, Nested, Product, Singleton, bracket_chain,
                   factors_of, product)
from .ideal import (IdealSpec, axis_bounds, from_members, is_axis_product,
                    is_critical, is_decreasing)
from .points import BettiTable, Point, all_points, check_nvec, count_colors

DECREASING = "decreasing"
BICOLORED = "bicolored"
PRODUCT = "product"
PAIRWISE = "pairwise"
REGIMES = (DECREASING, BICOLORED, PRODUCT, PAIRWISE)


def choose_regime(spec: IdealSpec, regime: str = "auto") -> str:
    """Pick the basis construction that applies to ``spec``.

    ``pairwise`` is never chosen automatically: for three or more colours
    and a non-decreasing ideal it only spans part of the homology."""
    if regime != "auto":
        if regime not in REGIMES:
            raise ValueError(f"unknown regime {regime!r}")
        if regime == BICOLORED and spec.m != 2:
            raise WrongArity("the bicoloured regime needs m = 2")
        return regime
    if spec.m == 1 or is_decreasing(spec):
        return DECREASING
    if is_axis_product(spec):
        return PRODUCT
    if spec.m == 2:
        return BICOLORED
    raise NotDecreasingNotBicolored(
        "no basis construction covers non-decreasing ideals with three or more colours")


# -- local classes ---------------------------------------------------------

def in_dset(spec: IdealSpec, t) -> bool:
    a, b = t
    if a < 0 or b < 0 or not spec.contains((a, b)):
        return False
    return all(not spec.contains(u) and not is_critical(spec, u)
               for u in ((a + 1, b), (a, b + 1)))


def nested_orientation(spec: IdealSpec, counts) -> Optional[int]:
    """Colour (1 or 2) of the outer sphere of a nested class, if one exists."""
    p, q = counts
    if p < 1 or q < 1 or not in_dset(spec, (p - 1, q - 1)):
        return None
    if spec.contains((p, 0)):
        return 1
    if spec.contains((0, q)):
        return 2
    return None


_PAIRS = {}


def pair_restriction(spec: IdealSpec, a: int, b: int) -> IdealSpec:
    """The two-colour ideal seen by colours ``a < b`` (0-based) alone."""
    key = (spec, a, b)
    got = _PAIRS.get(key)
    if got is None:
        others = [k for k in range(spec.m) if k not in (a, b)]
        members = [(t[a], t[b]) for t in spec.members if all(t[k] == 0 for k in others)]
        got = from_members(2, (spec.box[a], spec.box[b]), members, relax_small=True)
        _PAIRS[key] = got
    return got


def nested_outer_color(spec: IdealSpec, counts) -> Optional[int]:
    """1-based outer colour of the nested class on these counts, or None."""
    cols = [j for j in range(spec.m) if counts[j]]
    if len(cols) != 2:
        return None
    a, b = cols
    sub = spec if spec.m == 2 else pair_restriction(spec, a, b)
    o = nested_orientation(sub, (counts[a], counts[b]))
    return None if o is None else cols[o - 1] + 1


def _max_index(points, color):
    idx = [p.index for p in points if p.color == color]
    return max(idx) if idx else None


def _beats(core_pts, followers, color) -> bool:
    """No follower of ``color``, or the core's largest such index wins."""
    f = _max_index(followers, color)
    if f is None:
        return True
    c = _max_index(core_pts, color)
    return c is not None and c > f


def local_class_violations(core: Expr, spec: IdealSpec, regime: str) -> list:
    counts = count_colors(core.points(), spec.m)
    if isinstance(core, Curly):
        if not is_critical(spec, counts):
            return [f"sphere class {core.text()} has colour counts {counts} not in C_I"]
        return []
    if isinstance(core, Nested):
        if regime not in (BICOLORED, PAIRWISE):
            return [f"nested class {core.text()} does not occur for this ideal"]
        if not isinstance(core.inner, Curly):
            return ["a basis nested class has a plain sphere inside"]
        outer_c = {p.color for p in core.outer}
        inner_c = {p.color for p in core.inner.pts}
        if len(outer_c) != 1 or len(inner_c) != 1 or outer_c == inner_c:
            return ["nested class must separate the two colours"]
        want = nested_outer_color(spec, counts)
        if want is None:
            return [f"colour counts {counts} do not come from D_I"]
        if outer_c != {want}:
            return [f"nested class for {counts} must have colour {want} outside"]
        return []
    return [f"{core.text()} is not a local class"]


def color_is_pinned(spec: IdealSpec, counts, j: int) -> bool:
    """Whether followers of colour ``j`` (0-based) must stay below the core.

    Appending a colour-j point to a sphere class with counts ``c`` gives the
    tuple F = c + e_j; the sphere on F supplies a relation that removes the
    term with the largest colour-j point exactly when every other face
    F - e_i lies in I, where faces of lower colour may also be critical (the
    relation is then charged to the highest critical colour)."""
    F = list(counts)
    F[j] += 1
    for i in range(spec.m):
        if i == j or F[i] == 0:
            continue
        G = list(F)
        G[i] -= 1
        G = tuple(G)
        if spec.contains(G) or (i < j and is_critical(spec, G)):
            continue
        return False
    return True


def follower_violations(core: Expr, followers, spec: IdealSpec, regime: str) -> list:
    """Conditions tying a local class to the points bracketed onto it (d > 1)
    or to the product block that follows it (d = 1)."""
    cpts = core.points()
    if regime in (DECREASING, PRODUCT):
        k = max(p.color for p in cpts)
        bad = [p for p in followers if p.color > k]
        if bad:
            return [f"{bad[0]} has colour above the top colour {k} of {core.text()}"]
        if not _beats(cpts, followers, k):
            return [f"largest colour-{k} index of {core.text()} must exceed the "
                    f"colour-{k} indices that follow it"]
        return []
    beats = [_beats(cpts, followers, j + 1) for j in range(spec.m)]
    if isinstance(core, Nested):
        for j in range(spec.m):
            if not beats[j]:
                return [f"nested class {core.text()} must dominate the colour-{j + 1} "
                        f"indices that follow it"]
        return []
    counts = count_colors(cpts, spec.m)
    pinned = [color_is_pinned(spec, counts, j) for j in range(spec.m)]
    for j in range(spec.m):
        if pinned[j] and not beats[j]:
            return [f"largest colour-{j + 1} index must lie in {core.text()}"]
    present = [j for j in range(spec.m) if counts[j]]
    if not any(pinned[j] for j in present) and not any(beats[j] for j in present):
        return [f"{core.text()} must dominate the following indices of one of its colours"]
    return []


# -- structure -------------------------------------------------------------

def _is_core(e):
    return isinstance(e, (Curly, Nested))


def split_block(e: Expr):
    """Read ``[..[[core, r1], r2] .. rs]`` as ``(core, [r1..rs])`` or None."""
    apps = []
    while isinstance(e, Bracket) and isinstance(e.right, Singleton):
        apps.append(e.right.point)
        e = e.left
    if not _is_core(e):
        return None
    return e, apps[::-1]


def split_factor(e: Expr):
    """Read ``[..[[B1, B2], B3] .. Bl]`` as a list of blocks, or None."""
    blk = split_block(e)
    if blk is not None:
        return [blk]
    if isinstance(e, Bracket):
        right = split_block(e.right)
        left = split_factor(e.left)
        if right is not None and left is not None:
            return left + [right]
    return None


def _structure_violations(expr: Expr, spec: IdealSpec, nvec, d) -> list:
    pts = expr.points()
    if len(set(pts)) != len(pts):
        return ["a point occurs more than once"]
    for p in pts:
        if p.color > spec.m:
            return [f"{p} has colour above m = {spec.m}"]
    if nvec is not None and sorted(pts) != all_points(nvec):
        return [f"points do not match the colour vector {tuple(nvec)}"]
    if d == 1 and _has_bracket(expr):
        raise BracketInDimOne("brackets do not exist for d = 1")
    return []


def _has_bracket(e):
    if isinstance(e, Bracket):
        return True
    if isinstance(e, Product):
        return any(_has_bracket(f) for f in e.factors)
    if isinstance(e, Nested):
        return _has_bracket(e.inner)
    return False


def _sorted_strict(pts):
    return all(a < b for a, b in zip(pts, pts[1:]))


def _factor_violations(f: Expr, spec, regime) -> list:
    if isinstance(f, Singleton):
        return []
    blocks = split_factor(f)
    if blocks is None:
        return [f"{f.text()} is not an iterated bracket of basic blocks"]
    out = []
    for core, apps in blocks:
        out += local_class_violations(core, spec, regime)
        if not _sorted_strict(apps):
            out.append(f"points bracketed onto {core.text()} are not in increasing order")
        out += follower_violations(core, apps, spec, regime)
    lo = min(f.points())
    first = blocks[0]
    if lo not in first[0].points() and lo not in first[1]:
        out.append(f"smallest point {lo} of the factor is not in its first block")
    return out


def _sequence_violations(items, spec, regime) -> list:
    """d = 1: runs of singletons separated by local classes."""
    out = []
    run: List[Point] = []
    core = None

    def close():
        if not _sorted_strict(run):
            out.append("product block of points is not in increasing order")
        if core is not None:
            out.extend(follower_violations(core, run, spec, regime))

    for it in items:
        if isinstance(it, Singleton):
            run.append(it.point)
            continue
        if not _is_core(it):
            out.append(f"{it.text()} is not a local class or a point")
            continue
        close()
        out.extend(local_class_violations(it, spec, regime))
        core, run = it, []
    close()
    return out


def _color_sub_ideal(spec, c):
    b = axis_bounds(spec)[c - 1]
    return from_members(1, (spec.box[c - 1],), [(k,) for k in range(b + 1)],
                        relax_small=True)


def _recolor(e: Expr, c: int) -> Expr:
    if isinstance(e, Singleton):
        return Singleton(Point(c, e.point.index))
    if isinstance(e, Curly):
        return Curly(tuple(Point(c, p.index) for p in e.pts))
    if isinstance(e, Nested):
        return Nested(tuple(Point(c, p.index) for p in e.outer), _recolor(e.inner, c))
    if isinstance(e, Bracket):
        return Bracket(_recolor(e.left, c), _recolor(e.right, c))
    return Product(tuple(_recolor(f, c) for f in e.factors))


def _product_regime_violations(expr, spec, d) -> list:
    items = factors_of(expr)
    out = []
    colors = []
    for it in items:
        cs = {p.color for p in it.points()}
        if len(cs) != 1:
            return [f"{it.text()} mixes colours of an axis-product ideal"]
        colors.append(cs.pop())
    if d == 1 and colors != sorted(colors):
        out.append("factors of different colours must appear in colour order")
    for c in sorted(set(colors)):
        sub = _color_sub_ideal(spec, c)
        part = product([_recolor(it, 1) for it, k in zip(items, colors) if k == c])
        out += [f"colour {c}: {v}" for v in _violations(part, sub, d, DECREASING)]
    return out


def _violations(expr, spec, d, regime) -> list:
    if regime == PRODUCT:
        return _product_regime_violations(expr, spec, d)
    if d == 1:
        return _sequence_violations(factors_of(expr), spec, regime)
    out = []
    for f in factors_of(expr):
        out += _factor_violations(f, spec, regime)
    return out


@dataclass
class Diagnosis:
    ok: bool
    violations: list = field(default_factory=list)
    regime: str = ""

    def __bool__(self):
        return self.ok


def validate_generator(expr: Expr, spec: IdealSpec, d: int, nvec=None,
                       regime: str = "auto") -> Diagnosis:
    regime = choose_regime(spec, regime)
    v = _structure_violations(expr, spec, nvec, d)
    if not v:
        v = _violations(expr, spec, d, regime)
    return Diagnosis(not v, v, regime)


# -- enumeration -----------------------------------------------------------

def _subsets_with(first, rest):
    for r in range(len(rest) + 1):
        for combo in itertools.combinations(rest, r):
            yield (first,) + combo


def _subsets(pts):
    for r in range(len(pts) + 1):
        yield from itertools.combinations(pts, r)


class _Enumerator:
    def __init__(self, spec, regime):
        self.spec = spec
        self.regime = regime
        self._cores = {}
        self._blocks = {}
        self._ordered = {}

    def cores(self, pts):
        """Local classes on exactly the points ``pts`` (a sorted tuple)."""
        got = self._cores.get(pts)
        if got is None:
            got = []
            if len(pts) >= 2:
                counts = count_colors(pts, self.spec.m)
                if is_critical(self.spec, counts):
                    got.append(Curly(pts))
                if self.regime in (BICOLORED, PAIRWISE):
                    c = nested_outer_color(self.spec, counts)
                    if c is not None:
                        outer = tuple(p for p in pts if p.color == c)
                        inner = tuple(p for p in pts if p.color != c)
                        got.append(Nested(outer, Curly(inner)))
            self._cores[pts] = got
        return got

    def blocks(self, pts):
        got = self._blocks.get(pts)
        if got is None:
            got = []
            for core_pts in _subsets(pts):
                if len(core_pts) < 2:
                    continue
                apps = tuple(p for p in pts if p not in core_pts)
                for core in self.cores(core_pts):
                    if not follower_violations(core, apps, self.spec, self.regime):
                        got.append(bracket_chain(core, [Singleton(p) for p in apps]))
            self._blocks[pts] = got
        return got

    def ordered_blocks(self, pts):
        """All sequences of blocks whose point sets partition ``pts``."""
        got = self._ordered.get(pts)
        if got is None:
            got = [] if pts else [[]]
            for sub in _subsets(pts):
                if len(sub) < 2:
                    continue
                rest = tuple(p for p in pts if p not in sub)
                tails = self.ordered_blocks(rest)
                if not tails:
                    continue
                for b in self.blocks(sub):
                    got.extend([b] + t for t in tails)
            self._ordered[pts] = got
        return got

    def factors(self, pts):
        """Factors on ``pts``; the smallest point lies in the first block."""
        if len(pts) == 1:
            return [Singleton(pts[0])]
        out = []
        lo, rest = pts[0], pts[1:]
        for sub in _subsets_with(lo, rest):
            if len(sub) < 2:
                continue
            others = tuple(p for p in pts if p not in sub)
            tails = self.ordered_blocks(others)
            if not tails:
                continue
            for b in self.blocks(sub):
                out.extend(bracket_chain(b, t) for t in tails)
        return out

    def products(self, pts):
        if not pts:
            yield []
            return
        lo, rest = pts[0], pts[1:]
        for sub in _subsets_with(lo, rest):
            others = tuple(p for p in pts if p not in sub)
            fs = self.factors(sub)
            if not fs:
                continue
            for tail in self.products(others):
                for f in fs:
                    yield [f] + tail

    # d = 1
    def sequences(self, pts):
        for i0 in _subsets(pts):
            rest = tuple(p for p in pts if p not in i0)
            for tail in self.tails(rest):
                yield [Singleton(p) for p in i0] + tail

    def tails(self, pts):
        if not pts:
            yield []
            return
        for j in _subsets(pts):
            if len(j) < 2:
                continue
            cores = self.cores(j)
            if not cores:
                continue
            left = tuple(p for p in pts if p not in j)
            for core in cores:
                for a in _subsets(left):
                    if follower_violations(core, a, self.spec, self.regime):
                        continue
                    rest = tuple(p for p in left if p not in a)
                    for t in self.tails(rest):
                        yield [core] + [Singleton(p) for p in a] + t


def _enumerate_plain(spec, d, pts, regime):
    en = _Enumerator(spec, regime)
    if d == 1:
        for seq in en.sequences(tuple(pts)):
            yield product(seq) if seq else None
    else:
        for fs in en.products(tuple(pts)):
            yield product(fs) if fs else None


def _enumerate_product(spec, d, nvec):
    per_color = []
    for c in range(1, spec.m + 1):
        sub = _color_sub_ideal(spec, c)
        pts = all_points((nvec[c - 1],))
        lst = []
        for e in _enumerate_plain(sub, d, pts, DECREASING):
            lst.append([] if e is None else [_recolor(f, c) for f in factors_of(e)])
        per_color.append(lst)
    for combo in itertools.product(*per_color):
        items = [f for part in combo for f in part]
        if d > 1:
            items.sort(key=lambda f: min(f.points()))
        yield product(items) if items else None


def enumerate_basis(spec: IdealSpec, d: int, nvec, degree: Optional[int] = None,
                    regime: str = "auto") -> List[Expr]:
    nvec = check_nvec(spec, nvec)
    regime = choose_regime(spec, regime)
    if regime == BICOLORED and is_axis_product(spec):
        raise RectangularIdeal("rectangular ideals split as products; use the product regime")
    if regime == DECREASING and not is_decreasing(spec):
        raise NotDecreasingNotBicolored("ideal is not decreasing")
    pts = all_points(nvec)
    if regime == PRODUCT:
        gen = _enumerate_product(spec, d, nvec)
    else:
        gen = _enumerate_plain(spec, d, pts, regime)
    out = []
    for e in gen:
        if e is None:
            continue
        if degree is None or e.degree(d) == degree:
            out.append(e)
    return out


def basis_betti(spec, d, nvec, regime="auto") -> BettiTable:
    ranks = {}
    for e in enumerate_basis(spec, d, nvec, regime=regime):
        k = e.degree(d)
        ranks[k] = ranks.get(k, 0) + 1
    if not any(nvec):
        ranks = {0: 1}
    return BettiTable(ranks, {"method": "basis", "nvec": list(nvec), "d": d,
                              "regime": choose_regime(spec, regime)})


def betti(spec: IdealSpec, d: int, nvec, method: str = "basis", regime="auto", **gm_kw):
    """Betti table by basis enumeration, by the lattice oracle, or both.

    With ``method="both"`` the basis table is returned with ``meta["agree"]``
    and ``meta["discrepancy"]`` (gm minus basis, per degree)."""
    from .gm import gm_betti

    nvec = check_nvec(spec, nvec)
    if method == "gm":
        return gm_betti(spec, nvec, d, **gm_kw)
    if method == "basis":
        return basis_betti(spec, d, nvec, regime)
    if method != "both":
        raise ValueError(f"unknown method {method!r}")
    b = basis_betti(spec, d, nvec, regime)
    g = gm_betti(spec, nvec, d, **gm_kw)
    diff = {k: g[k] - b[k] for k in sorted(set(b.ranks) | set(g.ranks)) if g[k] != b[k]}
    b.meta.update({"method": "both", "gm": g.to_json(), "agree": not diff,
                   "discrepancy": {str(k): v for k, v in diff.items()}})
    return b


# -- relations -------------------------------------------------------------

def _x(i, c=1):
    return Point(c, i)


def _br(a, b, d):
    """[a, b] for d > 1; its d = 1 replacement a*b + b*a."""
    if d > 1:
        return [Bracket(a, b)]
    return [Product((a, b)), Product((b, a))]


def _curly_minus(pts, z):
    return Curly(tuple(p for p in pts if p != z))


def _sphere_relation(pts, removable, d):
    """Sum over z of [{pts - z}, z] for z in ``removable``."""
    out = []
    for z in removable:
        out += _br(_curly_minus(pts, z), Singleton(z), d)
    return out


def _decreasing_relations(spec, d, nvec):
    out = []
    for ell in itertools.product(*(range(n + 1) for n in nvec)):
        k = max((j for j in range(spec.m) if ell[j] > 0), default=-1)
        if k < 0:
            continue
        low = tuple(v - (j == k) for j, v in enumerate(ell))
        if not is_critical(spec, low):
            continue
        pts = tuple(Point(j + 1, i + 1) for j in range(spec.m) for i in range(ell[j]))
        J = [j for j in range(spec.m) if ell[j] > 0
             and is_critical(spec, tuple(v - (jj == j) for jj, v in enumerate(ell)))]
        removable = [p for p in pts if p.color - 1 in J]
        out.append(FormalSum.mod2(_sphere_relation(pts, removable, d), f"sphere{ell}"))
    return out


def _swap(t):
    return (t[1], t[0])


def _bicolored_relations(spec, d, nvec):
    out = []
    N1, N2 = nvec

    def crit(t):
        return min(t) >= 0 and is_critical(spec, t)

    def inI(t):
        return min(t) >= 0 and spec.contains(t)

    for n in range(N1 + 1):
        for m in range(N2 + 1):
            xs = tuple(_x(i + 1, 1) for i in range(n))
            ys = tuple(_x(j + 1, 2) for j in range(m))
            pts = xs + ys
            # 1 and 2: a sphere whose faces are critical or inside I
            if n and m and crit((n - 1, m)) and crit((n, m - 1)):
                out.append(FormalSum.mod2(_sphere_relation(pts, pts, d), f"1{(n, m)}"))
            if n and crit((n - 1, m)) and inI((n, m - 1)):
                out.append(FormalSum.mod2(_sphere_relation(pts, xs, d), f"2a{(n, m)}"))
            if m and crit((n, m - 1)) and inI((n - 1, m)):
                out.append(FormalSum.mod2(_sphere_relation(pts, ys, d), f"2b{(n, m)}"))
    for n in range(N1 + 1):
        for m in range(N2 + 1):
            if not crit((n, m)):
                continue
            # 3: spheres next to a forbidden corner, in both colour frames
            for frame in (1, 2):
                a, b = (n, m) if frame == 1 else (m, n)
                ca, cb = (1, 2) if frame == 1 else (2, 1)
                lim_a, lim_b = (N1, N2) if frame == 1 else (N2, N1)
                far = (a + 1, b - 2) if frame == 1 else _swap((a + 1, b - 2))
                if b < 1 or a + 1 > lim_a or inI(far):
                    continue
                A = tuple(_x(i + 1, ca) for i in range(a + 1))
                B = tuple(_x(j + 1, cb) for j in range(b))
                terms = _sphere_relation(A + B, A, d)
                terms.append(Nested(B, Curly(A)))
                out.append(FormalSum.mod2(terms, f"3a{(n, m)}/{frame}"))
                if b + 1 <= lim_b:
                    B1 = B + (_x(b + 1, cb),)
                    terms = []
                    for z in B1:
                        rest = tuple(p for p in B1 if p != z)
                        terms += _br(Nested(rest, Curly(A)), Singleton(z), d)
                    terms += _br(Curly(B1), Curly(A), d)
                    out.append(FormalSum.mod2(terms, f"3b{(n, m)}/{frame}"))
    for p in range(1, N1 + 1):
        for q in range(1, N2 + 1):
            o = nested_orientation(spec, (p, q))
            if o is None:
                continue
            # 4-6 in the frame where the outer colour is called x
            a, b = (p, q) if o == 1 else (q, p)
            ca, cb = (1, 2) if o == 1 else (2, 1)
            lim_a, lim_b = (N1, N2) if o == 1 else (N2, N1)
            X = tuple(_x(i + 1, ca) for i in range(a))
            Y = tuple(_x(j + 1, cb) for j in range(b))
            if a + 1 <= lim_a:
                X1 = X + (_x(a + 1, ca),)
                terms = []
                for z in X1:
                    terms += _br(Nested(tuple(v for v in X1 if v != z), Curly(Y)),
                                 Singleton(z), d)
                terms += _br(Curly(X1), Curly(Y), d)
                out.append(FormalSum.mod2(terms, f"4{(p, q)}"))
            if b + 1 <= lim_b:
                yb = _x(b + 1, cb)
                terms = _br(Nested(X, Curly(Y)), Singleton(yb), d)
                terms += _br(Curly(X + (yb,)), Curly(Y), d)
                terms += [Nested(X, t) for t in _br(Curly(Y), Singleton(yb), d)]
                out.append(FormalSum.mod2(terms, f"5{(p, q)}"))
                Y1 = Y + (yb,)
                terms = []
                for z in Y1:
                    terms += [Nested(X, t) for t in _br(_curly_minus(Y1, z), Singleton(z), d)]
                out.append(FormalSum.mod2(terms, f"6{(p, q)}"))
    return out


def hom_relation_instances(spec: IdealSpec, d: int, nvec, regime: str = "auto") -> list:
    """Relation instances on the first points of each colour, one per admissible
    corner tuple inside ``nvec``.  Each is a Z/2 sum equal to zero."""
    nvec = check_nvec(spec, nvec)
    regime = choose_regime(spec, regime)
    if regime == BICOLORED:
        rels = _bicolored_relations(spec, d, nvec)
    else:
        rels = _decreasing_relations(spec, d, nvec)
    return [r for r in rels if r.terms]
