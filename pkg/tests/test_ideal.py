import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyconf.errors import NotAntichain, OutOfBox, WeightsNotSorted, WrongArity
from polyconf.ideal import (box_tuples, cprime_dprime, critical_set, d_set, f_value,
                            features, from_forbidden, from_json, from_members,
                            from_weighted, is_decreasing, is_rectangular, m_value,
                            membership, validate)

from conftest import box_ideal


def I_box(b=4):
    return box_ideal(2, box=b)


def I_prime(b=4):
    return box_ideal(2, [(3, 0), (0, 3)], box=b)


def le(a, b):
    return all(x <= y for x, y in zip(a, b))


def brute_critical(spec):
    """Critical tuples straight from the definition."""
    out = []
    for t in box_tuples(spec.box):
        if t in spec.members:
            continue
        nz = [i for i, x in enumerate(t) if x > 0]
        if not nz or any(x for x in t[nz[-1] + 1:]):
            continue
        ok = True
        for j in nz:
            s = list(t)
            s[j] -= 1
            if tuple(s) not in spec.members:
                ok = False
        if ok:
            out.append(t)
    return sorted(out)


# -- construction and validation ---------------------------------------------

def test_full_box_is_valid():
    assert validate(from_members(2, (3, 3), box_tuples((3, 3))))


def test_closure_violation_reports_witness():
    v = validate(from_members(2, (3, 3), [(0, 0), (1, 1)], relax_small=True))
    # (1, 0) and (0, 1) are both missing; the smallest one is reported
    assert not v.ok and v.witness == (0, 1)


def test_small_sum_rule_enforced_unless_relaxed():
    s = from_forbidden(1, (5,), [(2,)])
    assert not validate(s)
    assert validate(from_forbidden(1, (5,), [(2,)], relax_small=True))


def test_membership_and_box():
    assert membership(I_box(), (0, 0))
    assert membership(I_prime(), (3, 0)) and not membership(I_prime(), (3, 1))
    with pytest.raises(OutOfBox):
        membership(box_ideal(2, box=2), (3, 0))


def test_from_forbidden():
    assert sorted(from_forbidden(1, (6,), [(3,)]).members) == [(0,), (1,), (2,)]
    s = from_forbidden(2, (4, 4), [(4, 0), (3, 1), (2, 2), (1, 3), (0, 4)])
    assert s.members == {t for t in box_tuples((4, 4)) if sum(t) <= 3}
    with pytest.raises(NotAntichain):
        from_forbidden(2, (4, 4), [(3, 1), (1, 3), (3, 0)])


def test_from_weighted():
    w = from_weighted([2, 1], 4, (3, 4))
    assert (1, 1) in w and (2, 0) not in w
    assert from_weighted([1, 1, 1], 100, (2, 2, 2)).members == set(box_tuples((2, 2, 2)))
    assert from_weighted([1], 3, (6,)).members == from_forbidden(1, (6,), [(3,)]).members
    with pytest.raises(WeightsNotSorted):
        from_weighted([1, 2], 4, (3, 3))


def test_json_forms_agree():
    a = from_json({"m": 2, "box": [4, 4], "min_forbidden": [[4, 0], [3, 1], [2, 2], [1, 3], [0, 4]]})
    b = from_json({"m": 2, "box": [4, 4], "weighted": {"weights": [1, 1], "M": 4}})
    c = from_json(a.to_json())
    assert a.members == b.members == c.members


# -- features ----------------------------------------------------------------

def test_decreasing_and_rectangular():
    assert is_decreasing(from_forbidden(1, (6,), [(3,)]))
    assert is_decreasing(from_weighted([2, 1], 4, (8, 8)))
    assert is_rectangular(I_box()) and not is_decreasing(I_box())
    assert not is_rectangular(I_prime())
    assert not is_rectangular(from_forbidden(2, (4, 4), [(4, 0), (3, 1), (2, 2), (1, 3), (0, 4)]))
    with pytest.raises(WrongArity):
        is_rectangular(from_forbidden(1, (6,), [(3,)]))


def test_critical_sets():
    assert critical_set(from_forbidden(1, (6,), [(3,)])) == [((3,), 3)]
    assert [t for t, _ in critical_set(I_box())] == [(0, 3), (3, 0)]
    assert [t for t, _ in critical_set(I_prime())] == [(0, 4), (1, 3), (3, 1), (4, 0)]


def test_dset_and_corner_sets():
    assert (2, 2) in [t for t, _ in d_set(I_prime())]
    assert (2, 2) in [t for t, _ in d_set(I_box())]
    cp, dp = cprime_dprime(I_prime())
    assert (2, 2) in cp and dp == []
    # the box ideal: both axis extensions are critical, both neighbours lie in I
    assert cprime_dprime(I_box())[1] == [(0, 3), (3, 0)]


def test_f_and_m_values():
    assert [f_value(I_box(), n).value for n in range(3)] == [2, 2, 2]
    assert f_value(I_box(), 3).value == -math.inf
    assert m_value(I_box(), 2) == 0
    full = from_members(2, (3, 3), box_tuples((3, 3)))
    assert f_value(full, 0) == (3, True)
    open_full = from_members(2, (3, 3), box_tuples((3, 3)), open_column=True)
    assert f_value(open_full, 0).value == math.inf


def test_feature_report_json():
    rep = features(I_prime()).to_json()
    assert rep["critical"] == [[[0, 4], 4], [[1, 3], 4], [[3, 1], 4], [[4, 0], 4]]
    assert [[2, 2], 4] in rep["dset"]


# -- properties over random ideals -------------------------------------------

@st.composite
def ideals2(draw, n=5):
    """Random valid m=2 ideals in an n x n box, given by a staircase."""
    heights = sorted(draw(st.lists(st.integers(0, n), min_size=n + 1, max_size=n + 1)),
                     reverse=True)
    members = [(a, b) for a in range(n + 1) for b in range(n + 1) if b < heights[a]]
    members += [t for t in box_tuples((n, n)) if sum(t) <= 2]
    closed = {t for t in box_tuples((n, n))
              if any(le(t, s) for s in members)}
    return from_members(2, (n, n), closed)


@settings(max_examples=60, deadline=None)
@given(ideals2())
def test_random_ideals_feature_invariants(spec):
    assert validate(spec)
    crit = [t for t, _ in critical_set(spec)]
    assert crit == brute_critical(spec)
    assert not set(crit) & spec.members
    cp, dp = cprime_dprime(spec)
    assert set(dp) <= set(crit)
    assert set(cp) <= spec.members
    assert {t for t, _ in d_set(spec)} <= spec.members
    # f is nonincreasing
    fs = [f_value(spec, n).value for n in range(spec.box[0] + 1)]
    assert all(a >= b for a, b in zip(fs, fs[1:]))


@settings(max_examples=60, deadline=None)
@given(ideals2())
def test_decreasing_has_strictly_falling_f(spec):
    if not is_decreasing(spec):
        return
    for n in range(spec.box[0]):
        a, b = f_value(spec, n).value, f_value(spec, n + 1).value
        if a == -math.inf or b == -math.inf or math.isinf(a):
            continue
        if b + 1 <= spec.box[1] and (n + 1, b + 1) in [t for t, _ in critical_set(spec)]:
            assert b < a


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(1, 6), min_size=1, max_size=3), st.integers(3, 12))
def test_weighted_ideals_are_valid_and_decreasing(ws, M):
    ws = sorted(ws, reverse=True)
    box = (4,) * len(ws)
    spec = from_weighted(ws, M, box, relax_small=True)
    assert validate(spec)
    assert is_decreasing(spec)
    for t in itertools.islice(box_tuples(box), 50):
        assert (t in spec) == (sum(a * b for a, b in zip(t, ws)) < M)
