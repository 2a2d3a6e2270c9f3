import io
import json
import subprocess
import sys

import pytest

from polyconf.cli import run
from polyconf.forests import cochain_from_json, forest_from_json

NOK3 = {"m": 1, "box": [6], "min_forbidden": [[3]]}
CONF2 = {"m": 1, "box": [4], "min_forbidden": [[2]], "relax_small": True}
IPRIME = {"m": 2, "box": [5, 5],
          "members": [[a, b] for a in range(3) for b in range(3)] + [[3, 0], [0, 3]]}


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, obj in [("nok3", NOK3), ("conf2", CONF2), ("iprime", IPRIME)]:
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(obj))
        out[name] = str(p)
    return out


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    lines = [json.loads(x) for x in out.getvalue().splitlines() if x.strip().startswith("{")]
    return code, lines, out.getvalue(), err.getvalue()


def test_betti_both(files):
    code, lines, _, _ = call("betti", "--ideal", files["nok3"], "--points", 3, "--dim", 1,
                             "--method", "both")
    assert code == 0
    assert lines[0]["betti"] == {"0": 1, "1": 1} and lines[0]["agree"] is True


def test_features(files):
    code, lines, _, _ = call("features", "--ideal", files["iprime"])
    assert code == 0
    assert [t for t, _ in lines[0]["critical"]] == [[0, 4], [1, 3], [3, 1], [4, 0]]
    assert [2, 2] in [t for t, _ in lines[0]["dset"]]


def test_verify_conf2(files):
    code, lines, _, _ = call("verify", "--ideal", files["conf2"], "--points", 2, "--dim", 2,
                             "--samples", 20)
    assert code == 0
    assert lines[-1] == {"check": "summary", "ok": True}
    comm = next(x for x in lines if x["check"] == "commutativity")
    assert len(comm["samples"]) == 20 and comm["seed"] == 0


def test_seed_from_environment(files, monkeypatch):
    monkeypatch.setenv("POLYCONF_SEED", "7")
    _, lines, _, _ = call("verify", "--ideal", files["nok3"], "--points", 4, "--dim", 2,
                          "--samples", 10)
    assert next(x for x in lines if x["check"] == "commutativity")["seed"] == 7
    _, again, _, _ = call("verify", "--ideal", files["nok3"], "--points", 4, "--dim", 2,
                          "--samples", 10, "--seed", 7)
    assert again == lines


def test_inline_ideal_and_check():
    code, lines, _, _ = call("check", "--ideal", json.dumps(IPRIME))
    assert code == 0 and lines[0] == {"valid": True, "decreasing": False, "rectangular": False}
    bad = {"m": 2, "box": [3, 3], "members": [[0, 0], [1, 1]], "relax_small": True}
    code, lines, _, _ = call("check", "--ideal", json.dumps(bad))
    assert code == 1 and lines[0]["valid"] is False


def test_usage_errors(files):
    code, _, _, err = call("betti", "--ideal", files["nok3"], "--points", 3)
    assert code == 2 and json.loads(err)["error"] == "usage"
    code, _, _, _ = call("nonsense")
    assert code == 2
    code, _, _, err = call("betti", "--ideal", files["nok3"], "--points", "3,1", "--dim", 1)
    assert code == 2 and "WrongArity" in err


def test_budget_exit_code(files):
    code, _, _, err = call("betti", "--ideal", files["conf2"], "--points", 4, "--dim", 2,
                           "--method", "gm", "--budget", 5)
    assert code == 3 and json.loads(err)["watermark"] > 5


def test_basis_and_dual(files):
    code, lines, _, _ = call("basis", "--ideal", files["iprime"], "--points", "3,3",
                             "--dim", 1, "--degree", 3)
    assert code == 0 and [x["expr"] for x in lines] == [
        "{x[1,1],x[1,2],x[1,3],{x[2,1],x[2,2],x[2,3]}}"]
    code, lines, _, _ = call("dual", "--ideal", files["iprime"], "--dim", 1,
                             "--expr", lines[0]["expr"])
    assert code == 0 and lines[0]["degree"] == 3
    code, lines, _, _ = call("dual", "--ideal", files["nok3"], "--dim", 2,
                             "--expr", "[{x[1,1],x[1,2],x[1,3]},x[1,4]]")
    assert code == 1 and lines[0]["valid"] is False


def test_forests_cup_reduce_roundtrip(files, tmp_path):
    code, lines, _, _ = call("forests", "--ideal", files["nok3"], "--points", 4, "--dim", 2)
    assert code == 0
    fs = [forest_from_json(x["forest"]) for x in lines]
    assert [f.to_json() for f in fs] == [x["forest"] for x in lines]
    one = [x["forest"] for x in lines if x["degree"] == 0][0]
    sphere = [x["forest"] for x in lines if x["degree"] == 3][0]
    (tmp_path / "a.json").write_text(json.dumps(one))
    (tmp_path / "b.json").write_text(json.dumps(sphere))
    code, lines, _, _ = call("cup", "--ideal", files["nok3"], "--dim", 2,
                             "--lhs", tmp_path / "a.json", "--rhs", tmp_path / "b.json")
    assert code == 0 and lines[0]["grade"] == 3 and len(lines[0]["terms"]) == 1
    assert cochain_from_json(lines[0], 2).to_json() == lines[0]
    (tmp_path / "c.json").write_text(json.dumps(lines[0]))
    code, red, _, _ = call("reduce", "--ideal", files["nok3"], "--dim", 2,
                           "--cochain", tmp_path / "c.json")
    assert code == 0 and red[0]["grade"] == 3


def test_pretty_table(files):
    code, _, text, _ = call("betti", "--ideal", files["nok3"], "--points", 3, "--dim", 1,
                            "--method", "both", "--pretty")
    assert code == 0 and text.splitlines()[0].split()[0] == "degree"


def test_module_entry_point_is_deterministic(files):
    argv = [sys.executable, "-m", "polyconf", "features", "--ideal", files["iprime"]]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and json.loads(a)["rectangular"] is False
    bad = subprocess.run([sys.executable, "-m", "polyconf", "betti"], capture_output=True)
    assert bad.returncode == 2 and json.loads(bad.stderr)["error"] == "usage"
