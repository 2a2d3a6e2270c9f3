import itertools

import pytest

from polyconf.ideal import box_tuples, from_forbidden, from_members, from_weighted


def nok(k, n=8):
    """No-k-equal ideal in one colour (k = 2 needs the small-gap relaxation)."""
    return from_forbidden(1, (n,), [(k,)], relax_small=k < 3)


def box_ideal(r, extra=(), m=2, box=8):
    return from_members(m, (box,) * m,
                        [t for t in box_tuples((box,) * m) if max(t) <= r] + list(extra))


FIXTURES = {
    "conf": nok(2),
    "no3": nok(3),
    "no4": nok(4),
    "stair3": from_forbidden(2, (8, 8), [(4, 0), (3, 1), (2, 2), (1, 3), (0, 4)]),
    "w21M4": from_weighted([2, 1], 4, (8, 8), relax_small=True),
    "w21M5": from_weighted([2, 1], 5, (8, 8)),
    "box22": box_ideal(2),
    "Ip": box_ideal(2, [(3, 0), (0, 3)]),
    "bic1": from_forbidden(2, (8, 8), [(4, 0), (2, 1), (0, 3)]),
    "bic2": from_forbidden(2, (8, 8), [(3, 0), (2, 1), (1, 2), (0, 4)]),
    "bic3": from_forbidden(2, (8, 8), [(4, 0), (1, 2), (0, 3)]),
    "bic4": from_forbidden(2, (8, 8), [(5, 0), (3, 1), (1, 2), (0, 3)]),
    "m3w": from_weighted([2, 1, 1], 4, (8, 8, 8), relax_small=True),
    "m3s": from_forbidden(3, (8, 8, 8), [t for t in box_tuples((3, 3, 3)) if sum(t) == 3]),
}


def vectors(m, total):
    """Colour vectors with 1 <= sum <= total."""
    return [nv for nv in itertools.product(range(total + 1), repeat=m)
            if 0 < sum(nv) <= total]


@pytest.fixture(params=sorted(FIXTURES))
def any_fixture(request):
    return request.param, FIXTURES[request.param]


# -- acceptance summary ------------------------------------------------------

ACCEPTANCE = {}


def record(n, ok, seconds, limit, detail=""):
    """Store one acceptance outcome; printed at the end of the session."""
    within = limit is None or seconds <= limit
    ACCEPTANCE[n] = (ok and within, f"{seconds:.1f}s" + (f" (limit {limit}s)" if limit else ""),
                     detail)
    return ok and within


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, t, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {t}  {detail}")
