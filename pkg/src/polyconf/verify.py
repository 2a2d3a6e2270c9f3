"""Consistency suite for one (ideal, colour vector, dimension).

Each check returns a JSON-ready dict with a ``check`` name and an ``ok``
flag.  The ring checks draw random forests from a seeded generator and log
what they drew.
"""
from __future__ import annotations

import random
from typing import Optional

from .errors import NotDecreasingNotBicolored, UnsupportedCase_11_Dprime
from .forests import (Cochain, cochain_of, cohom_relation_instances, enumerate_forests,
                      forest_degree, pairing_check, quotient_report, reduce_to_basis)
from .gm import gm_betti
from .homology import PAIRWISE, basis_betti, choose_regime
from .ideal import IdealSpec
from .ring import cup, cup_cochains, zero_case


def betti_check(spec: IdealSpec, d: int, nvec, regime: str = "auto", gm=None,
                gm_kw=None) -> dict:
    """Basis counts against the lattice oracle.  For ideals no basis construction
    covers, the pairwise enumerator is used and the shortfall is reported."""
    rep = {"check": "betti"}
    try:
        regime = choose_regime(spec, regime)
    except NotDecreasingNotBicolored as exc:
        regime = PAIRWISE
        rep["note"] = str(exc)
    b = basis_betti(spec, d, nvec, regime)
    g = gm if gm is not None else gm_betti(spec, nvec, d, **(gm_kw or {}))
    diff = {str(k): g[k] - b[k] for k in sorted(set(b.ranks) | set(g.ranks)) if g[k] != b[k]}
    rep.update({"regime": regime, "basis": b.to_json(), "gm": g.to_json(),
                "discrepancy": diff, "ok": not diff})
    return rep


def sample_pairs(forests, spec, d, rng: random.Random, n: int, regime="auto"):
    """``n`` pairs; every other pair is drawn among partners with a product
    that survives the vanishing rules, when there is one."""
    out = []
    for i in range(n):
        a = rng.choice(forests)
        if i % 2:
            live = [b for b in forests if zero_case(a, b, spec, d, regime) is None]
            if live:
                out.append((a, rng.choice(live)))
                continue
        out.append((a, rng.choice(forests)))
    return out


def _red(c: Cochain, spec, d, nvec, regime):
    return reduce_to_basis(c, spec, d, nvec, regime) if c.terms else Cochain(c.grade)


def commutativity_failures(pairs, spec, d, nvec, regime="auto") -> list:
    bad = []
    for a, b in pairs:
        s = (-1) ** (forest_degree(a, d) * forest_degree(b, d))
        lhs = _red(cup(a, b, spec, d, regime), spec, d, nvec, regime)
        rhs = _red(cup(b, a, spec, d, regime), spec, d, nvec, regime).scaled(s)
        if lhs != rhs:
            bad.append([a.text(), b.text()])
    return bad


def associativity_failures(triples, spec, d, nvec, regime="auto") -> list:
    bad = []
    for a, b, c in triples:
        left = cup_cochains(cup(a, b, spec, d, regime), cochain_of(c, d), spec, d, regime)
        right = cup_cochains(cochain_of(a, d), cup(b, c, spec, d, regime), spec, d, regime)
        if _red(left, spec, d, nvec, regime) != _red(right, spec, d, nvec, regime):
            bad.append([a.text(), b.text(), c.text()])
    return bad


def sample_triples(forests, spec, d, rng: random.Random, n: int, regime="auto"):
    """Triples (a, b, c); where possible ``a * b`` is nonzero and ``c`` is a
    live partner of one of its terms."""
    out = []
    for a, b in sample_pairs(forests, spec, d, rng, n, regime):
        ab = cup(a, b, spec, d, regime)
        c = None
        if ab.terms and rng.random() < 0.75:
            t = sorted(ab.terms, key=lambda f: f.text())[0]
            live = [g for g in forests if zero_case(t, g, spec, d, regime) is None]
            if live:
                c = rng.choice(live)
        out.append((a, b, c if c is not None else rng.choice(forests)))
    return out


def verify(spec: IdealSpec, d: int, nvec, regime: str = "auto", seed: int = 0,
           samples: int = 200, gm_kw: Optional[dict] = None) -> list:
    g = gm_betti(spec, nvec, d, **(gm_kw or {}))
    lines = [betti_check(spec, d, nvec, regime, gm=g)]
    try:
        report = quotient_report(spec, d, nvec, regime)
    except (NotDecreasingNotBicolored, UnsupportedCase_11_Dprime) as exc:
        lines.append({"check": "forests", "ok": True, "skipped": str(exc)})
        return lines
    bad = {str(k): r for k, r in report.items()
           if r["quotient"] != g[k] or r["basis"] != g[k] or not r["basis_spans"]}
    missing = [k for k in g.ranks if k not in report]
    lines.append({"check": "quotient", "ok": not bad and not missing,
                  "degrees": {str(k): r["quotient"] for k, r in report.items()},
                  "mismatch": bad})
    pc = pairing_check(spec, d, nvec, regime, gm=g.ranks)
    lines.append({"check": "duality", "ok": pc["ok"], "generators": pc["generators"],
                  "problems": pc["problems"][:10]})
    rel = cohom_relation_instances(spec, d, nvec, regime)
    nonzero = sum(1 for r in rel if _red(r, spec, d, nvec, regime).terms)
    lines.append({"check": "relators", "ok": nonzero == 0, "count": len(rel),
                  "nonzero": nonzero})
    forests = enumerate_forests(spec, d, nvec, regime=regime)
    rng = random.Random(seed)
    pairs = sample_pairs(forests, spec, d, rng, samples, regime)
    zero_bad = [[a.text(), b.text()] for a, b in pairs
                if zero_case(a, b, spec, d, regime) is not None
                and cup(a, b, spec, d, regime).terms]
    lines.append({"check": "zero_cases", "ok": not zero_bad, "failures": zero_bad[:10]})
    comm = commutativity_failures(pairs, spec, d, nvec, regime)
    lines.append({"check": "commutativity", "ok": not comm, "seed": seed,
                  "samples": [[a.text(), b.text()] for a, b in pairs],
                  "failures": comm[:10]})
    triples = sample_triples(forests, spec, d, rng, samples, regime)
    assoc = associativity_failures(triples, spec, d, nvec, regime)
    lines.append({"check": "associativity", "ok": not assoc, "seed": seed,
                  "samples": [[a.text(), b.text(), c.text()] for a, b, c in triples],
                  "failures": assoc[:10]})
    return lines
