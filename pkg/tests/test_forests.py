import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyconf.errors import UnsupportedCase_11_Dprime
from polyconf.expr import parse
from polyconf.forests import (CIRCLE, DIAMOND, RECT, Cochain, Vertex, canonicalize,
                              cochain_from_json, cohom_relation_instances, enumerate_forests,
                              forest_degree, forest_from_json, is_linear_tree, make_forest,
                              pairing_check, quotient_report, reduce_to_basis, singletons,
                              validate_forest, dual_of_generator)
from polyconf.gm import gm_betti
from polyconf.homology import enumerate_basis
from polyconf.ideal import from_forbidden
from polyconf.points import Point, all_points

from conftest import FIXTURES

X = lambda i: Point(1, i)  # noqa: E731
Y = lambda i: Point(2, i)  # noqa: E731

DEC4 = from_forbidden(2, (8, 8), [(3, 0), (2, 1), (1, 2), (0, 3)])

# (fixture, colour vector) pairs small enough for full enumeration in both d
SMALL = [("no3", (4,)), ("no4", (5,)), ("stair3", (2, 3)), ("w21M4", (2, 2)),
         ("bic1", (2, 2)), ("bic2", (2, 2)), ("bic3", (3, 1)), ("bic4", (2, 2)),
         ("Ip", (2, 3)), ("m3w", (1, 1, 2))]


def star(rect, leaves, loose=()):
    """One rectangle with leaves hanging off it, plus loose circles."""
    verts = [Vertex(RECT, tuple(rect))]
    verts += [Vertex(k, (p,)) for k, p in leaves]
    verts += [Vertex(CIRCLE, (p,)) for p in loose]
    r = min(rect)
    return make_forest(verts, [(r, p) for _, p in leaves])


# -- admissibility -----------------------------------------------------------

def test_rectangle_with_circle_is_admissible():
    f = star([X(1), X(2)], [(CIRCLE, X(3))], [X(4)])
    assert validate_forest(f, FIXTURES["no3"], (4,))


def test_rectangle_without_circle_is_rejected():
    f = star([X(1), X(2)], [], [X(3)])
    diag = validate_forest(f, FIXTURES["no3"], (3,))
    assert not diag and "no circle" in diag.violations[0]


def test_wrong_colour_vector_rejected():
    f = star([X(1), X(2)], [(CIRCLE, X(3))])
    assert not validate_forest(f, FIXTURES["no3"], (4,))


def test_mixed_sides_rejected_for_diamond_case():
    spec = FIXTURES["bic1"]
    ok = star([X(1)], [(CIRCLE, X(2)), (DIAMOND, Y(1)), (DIAMOND, Y(2))])
    assert validate_forest(ok, spec, (2, 2))
    bad = star([X(1)], [(CIRCLE, X(2)), (CIRCLE, Y(1)), (DIAMOND, Y(2))])
    assert not validate_forest(bad, spec, (2, 2))


def test_cycle_and_double_attachment_rejected():
    spec = FIXTURES["no3"]
    verts = [Vertex(RECT, (X(1), X(2))), Vertex(RECT, (X(3), X(4))), Vertex(CIRCLE, (X(5),))]
    two_parents = make_forest(verts, [(X(1), X(5)), (X(3), X(5))])
    assert not validate_forest(two_parents, spec, (5,))


def test_refuses_open_corner_case():
    spec = from_forbidden(2, (6, 6), [(1, 1), (3, 0), (0, 3)], relax_small=True)
    with pytest.raises(UnsupportedCase_11_Dprime):
        enumerate_forests(spec, 2, (2, 2))


def test_relaxed_weight_one_rectangles():
    spec = from_forbidden(1, (6,), [(2,)], relax_small=True)
    fs = enumerate_forests(spec, 2, (2,))
    assert any(len(f.rects()) == 1 and len(f.rects()[0].elements) == 1 for f in fs)
    rep = quotient_report(spec, 2, (3,))
    g = gm_betti(spec, (3,), 2)
    assert all(r["quotient"] == g[k] for k, r in rep.items())


# -- degree ------------------------------------------------------------------

def test_degree_examples():
    d = 3
    f = star([X(1), X(2)], [(CIRCLE, X(3))])
    assert forest_degree(f, d) == (3 - 1) * d - 1
    assert forest_degree(singletons(all_points((4,))), d) == 0
    nested = star([X(1), X(2), X(3), Y(1), Y(2), Y(3)], [(CIRCLE, X(4)), (CIRCLE, Y(4))])
    w = 6
    assert forest_degree(nested, d) == (w - 1) * d + 2 * (d - 1)


def test_degree_additive():
    spec = FIXTURES["no3"]
    a = enumerate_forests(spec, 2, (3,), degree=3)[0]
    b = star([X(4), X(5)], [(CIRCLE, X(6))])
    union = make_forest(list(a.vertices) + list(b.vertices), list(a.edges) + list(b.edges))
    assert forest_degree(union, 2) == forest_degree(a, 2) + forest_degree(b, 2)


# -- canonical form and signs --------------------------------------------------

def test_canonical_is_fixed_point():
    for f in enumerate_forests(FIXTURES["no3"], 2, (5,)):
        g, s = canonicalize(f, 2)
        assert g == f and s == 1


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_adjacent_edges_swap_sign(d):
    f = star([X(1), X(2)], [(CIRCLE, X(3)), (CIRCLE, X(4))])
    f, _ = canonicalize(f, d)
    order = list(f.order)
    i = order.index(("e", f.edges[0]))
    order[i], order[i + 1] = order[i + 1], order[i]
    g, s = canonicalize(make_forest(f.vertices, f.edges, order), d)
    assert g == f and s == (-1) ** ((d - 1) ** 2)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_rectangle_transposition_sign(d):
    f = star([X(2), X(1)], [(CIRCLE, X(3))])
    g, s = canonicalize(f, d)
    assert g.rects()[0].elements == (X(1), X(2)) and s == (-1) ** d


def _predicted_sign(f, d, order, rect_perm_parity):
    vm = f.vmap()
    nb = f.neighbours()

    def grade(it):
        if it[0] == "e":
            return d - 1
        v = vm[it[1]]
        dm = any(vm[u].kind == DIAMOND for u in nb.get(it[1], ()))
        return (len(v.elements) - 1) * d + dm

    canon = list(f.order)
    pos = [canon.index(it) for it in order]
    s = 1
    for i in range(len(order)):
        for j in range(i + 1, len(order)):
            if pos[i] > pos[j] and grade(order[i]) % 2 and grade(order[j]) % 2:
                s = -s
    return s * (-1) ** (d * rect_perm_parity)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(["no3", "bic1", "stair3"]), st.integers(1, 3), st.randoms())
def test_shuffle_then_canonicalize(name, d, rnd):
    spec = FIXTURES[name]
    nv = (5,) if spec.m == 1 else (2, 2)
    f = rnd.choice(enumerate_forests(spec, d, nv))
    order = list(f.order)
    rnd.shuffle(order)
    parity = 0
    verts = []
    for v in f.vertices:
        if v.kind == RECT and len(v.elements) > 1:
            els = list(v.elements)
            rnd.shuffle(els)
            parity += sum(1 for i in range(len(els)) for j in range(i + 1, len(els))
                          if els[i] > els[j])
            v = Vertex(RECT, tuple(els))
        verts.append(v)
    shuffled = make_forest(verts, f.edges, order)
    g, s = canonicalize(shuffled, d)
    assert g == f
    assert s == _predicted_sign(f, d, order, parity % 2)
    assert canonicalize(g, d) == (g, 1)


def test_json_roundtrip():
    for f in enumerate_forests(FIXTURES["bic1"], 2, (2, 2))[:40]:
        assert forest_from_json(f.to_json()) == f
    c = Cochain(3)
    for f in enumerate_forests(FIXTURES["no3"], 2, (4,), degree=3)[:3]:
        c.add(f, 2, 2)
    assert cochain_from_json(c.to_json(), 2) == c


# -- enumeration and the dual map ------------------------------------------------

def test_degree_zero_is_all_singletons():
    assert enumerate_forests(FIXTURES["no3"], 2, (4,), degree=0) == [singletons(all_points((4,)))]


def test_sphere_forests_no3():
    fs = enumerate_forests(FIXTURES["no3"], 2, (3,), degree=3)
    assert fs and all(len(f.rects()) == 1 and len(f.rects()[0].elements) == 2
                      and len(f.edges) == 1 for f in fs)
    assert quotient_report(FIXTURES["no3"], 2, (3,))[3]["quotient"] == gm_betti(FIXTURES["no3"], (3,), 2)[3]


def test_dual_worked_example():
    e = parse("[[[{x[1,1],x[1,4],x[2,1]},x[1,2]],x[1,3]],x[2,2]]*x[2,3]")
    f = dual_of_generator(e, DEC4, 2)
    assert [v.elements for v in f.rects()] == [(X(1), X(4))]
    attached = sorted(b for a, b in f.edges)
    assert attached == sorted([Y(1), X(2), X(3), Y(2)])
    assert forest_degree(f, 2) == e.degree(2)
    assert is_linear_tree(f, DEC4, d=2)


def test_dual_of_singletons():
    e = parse("x[1,1]*x[1,2]*x[1,3]")
    assert dual_of_generator(e, FIXTURES["no3"], 2) == singletons(all_points((3,)))


def test_dual_of_nested_class():
    e = parse("{x[1,1],x[1,2],x[1,3],{x[2,1],x[2,2],x[2,3]}}")
    f = dual_of_generator(e, FIXTURES["Ip"], 1)
    (r,) = f.rects()
    assert len(f.edges) == 2 and len(r.elements) == 4
    assert forest_degree(f, 1) == 3


def test_shared_circle_shape_is_not_linear():
    spec = FIXTURES["no3"]
    verts = [Vertex(RECT, (X(1), X(2))), Vertex(RECT, (X(3), X(4))), Vertex(CIRCLE, (X(5),))]
    f = make_forest(verts, [(X(1), X(5)), (X(3), X(5))])
    assert not is_linear_tree(f, spec, d=2)


@pytest.mark.parametrize("name,nv", SMALL)
@pytest.mark.parametrize("d", [1, 2])
def test_duality_degree_and_image(name, nv, d):
    spec = FIXTURES[name]
    for e in enumerate_basis(spec, d, nv):
        f = dual_of_generator(e, spec, d)
        assert forest_degree(f, d) == e.degree(d)
        assert is_linear_tree(f, spec, d=d)
        assert validate_forest(f, spec, nv)


# -- relations and reduction -----------------------------------------------------

@pytest.mark.parametrize("name,nv", SMALL)
@pytest.mark.parametrize("d", [1, 2])
def test_quotient_matches_gm(name, nv, d):
    spec = FIXTURES[name]
    g = gm_betti(spec, nv, d)
    rep = quotient_report(spec, d, nv)
    for k in set(rep) | set(g.ranks):
        assert rep[k]["quotient"] == g[k] == rep[k]["basis"], (k, rep[k])
        assert rep[k]["basis_spans"]


@pytest.mark.parametrize("name,nv", SMALL[:6])
def test_relators_reduce_to_zero(name, nv):
    spec = FIXTURES[name]
    for d in (1, 2):
        for r in cohom_relation_instances(spec, d, nv):
            assert reduce_to_basis(r, spec, d, nv).is_zero()


def test_relator_templates_present():
    rels = cohom_relation_instances(FIXTURES["no3"], 2, (4,))
    assert rels and all(len({forest_degree(f, 2) for f in r.terms}) == 1 for r in rels)
    assert any(len(r.terms) == 3 for r in rels)


@pytest.mark.parametrize("name,nv", [("no3", (4,)), ("bic1", (2, 2)), ("Ip", (2, 3))])
def test_reduce_is_idempotent_and_fixes_basis(name, nv):
    spec = FIXTURES[name]
    rng = random.Random(5)
    for d in (1, 2):
        for f in enumerate_forests(spec, d, nv, basis_only=True):
            r = reduce_to_basis(f, spec, d, nv)
            assert r.terms == {f.with_coeff(1): 1}
        fs = enumerate_forests(spec, d, nv)
        for f in rng.sample(fs, min(15, len(fs))):
            once = reduce_to_basis(f, spec, d, nv)
            assert reduce_to_basis(once, spec, d, nv) == once


@pytest.mark.parametrize("name,nv", SMALL)
def test_pairing_check(name, nv):
    spec = FIXTURES[name]
    for d in (1, 2):
        rep = pairing_check(spec, d, nv)
        assert rep["ok"], rep["problems"][:3]


def test_pairing_conf2():
    rep = pairing_check(FIXTURES["conf"], 2, (2,))
    assert rep["ok"] and rep["generators"] == 2 and rep["by_degree"] == {0: 1, 1: 1}
