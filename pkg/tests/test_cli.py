import json
import subprocess
import sys

import numpy as np
import pytest

from gammakit.cli import run
from gammakit.fixtures import commuting_unitaries, kv_tuple
from gammakit.hardy import SymbolTuple, admissible_conjugated
from gammakit.operators import symmetrize_tuple

FAST = ["--budget-degree", "2", "--budget-polys", "4"]


def call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr().out
    return code, out


def payload(out):
    return json.loads(out)


def test_membership_boundary_holds(capsys):
    code, out = call(capsys, "membership", "--point", '{"n":2,"s":[[2,0],[1,0]]}', "--boundary")
    assert code == 0
    p = payload(out)
    assert p["verdict"] is True and p["params"]["tol"] == 1e-9


def test_membership_failure_has_root_certificate(capsys):
    code, out = call(capsys, "membership", "--point", "(3,1)")
    assert code == 1
    root = payload(out)["certificate"]["root"]
    assert root[0] == pytest.approx(2.618, abs=1e-3)


@pytest.mark.parametrize("argv", [
    ["membership", "--point", "{bad json"],
    ["membership", "--point", '{"n":3,"s":[[1,0]]}'],
    ["membership", "--point", "(1,2)", "--tol", "-1"],
    ["sup", "--poly", "1 0 : 1 0\n", "--grid", "2"],
    ["nonsense"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, _ = call(capsys, *argv)
    assert code == 2


def test_sample_is_byte_identical(capsys, tmp_path):
    outs = []
    for _ in range(2):
        code, out = call(capsys, "sample", "--n", "3", "--count", "100", "--boundary", "--seed", "7")
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1] and len(outs[0].splitlines()) == 100
    path = tmp_path / "pts.csv"
    code, out = call(capsys, "sample", "--n", "2", "--count", "5", "--out", str(path))
    assert code == 0 and payload(out)["result"]["rows"] == 5 and path.exists()


def test_maps(capsys):
    code, out = call(capsys, "project", "--point", "(3,3,1)")
    assert code == 0 and np.allclose(np.array(payload(out)["result"]["s"])[:, 0], [2, 1])
    code, out = call(capsys, "embed", "--point", "(2,1)", "--alpha", "-1")
    assert np.allclose(np.array(payload(out)["result"]["s"])[:, 0], [1, -1, -1])
    code, out = call(capsys, "fiber", "--point", "(0,-1)")
    assert sorted(r[0] for r in payload(out)["result"]) == pytest.approx([-1, 1])


def test_reduce_and_sup(capsys, tmp_path):
    f = tmp_path / "p.txt"
    f.write_text("1 0 : 2 0\n1 0 : 0 2\n")
    code, out = call(capsys, "reduce", "--poly", f"@{f}")
    assert code == 0 and payload(out)["result"]["pretty"] == "x1^2 - 2*x2"
    code, out = call(capsys, "sup", "--poly", "1 0 : 1 0\n")
    assert payload(out)["result"]["value"] == pytest.approx(2.0)


def test_vn_check_kv(capsys, tmp_path):
    f = tmp_path / "kv.json"
    f.write_text(kv_tuple().to_json())
    code, out = call(capsys, "vn-check", "--tuple", f"@{f}", *FAST)
    assert code == 1 and payload(out)["certificate"]["label"] == "kv"
    code, out = call(capsys, "vn-check", "--tuple", f"@{f}", "--poly", "1 0 : 1 0 0\n")
    assert code == 0


def test_classify_and_generators(capsys, tmp_path):
    f = tmp_path / "u.json"
    f.write_text(symmetrize_tuple(commuting_unitaries(2, 3, seed=1)).to_json())
    code, out = call(capsys, "classify", "--tuple", f"@{f}", *FAST)
    assert code == 0
    code, out = call(capsys, "classify", "--tuple", f"@{f}", "--kind", "coisometry", *FAST)
    assert code == 0
    code, out = call(capsys, "generators", "--tuple", f"@{f}")
    assert code == 0 and payload(out)["result"]["n"] == 2


def test_model_commands(capsys, tmp_path):
    A = admissible_conjugated(3, 2, 0)
    f = tmp_path / "a.json"
    f.write_text(A.to_json())
    code, out = call(capsys, "model-check", "--symbols", f"@{f}", *FAST)
    assert code == 0
    code, out = call(capsys, "model-build", "--symbols", f"@{f}", *FAST)
    assert code == 0 and len(payload(out)["result"]["symbols"]) == 2
    code, out = call(capsys, "invariant", "--symbols", f"@{f}")
    inv = SymbolTuple.from_dict(payload(out)["result"])
    assert np.allclose(inv.A[0], A.A[1].conj().T)
    code, out = call(capsys, "classify", "--tuple", f"@{f}", "--kind", "isometry", *FAST)
    assert code == 0
    code, out = call(capsys, "wold", "--symbols", f"@{f}")
    assert code == 0 and payload(out)["result"]["unitary"] is None
    theta = tmp_path / "t.json"
    theta.write_text(json.dumps({"e_in": 2, "e_out": 2, "coeffs": [{"dim": 2, "entries": [[0, 0]] * 4},
                                                                  {"dim": 2, "entries": [[1, 0], [0, 0], [0, 0], [1, 0]]}]}))
    code, out = call(capsys, "blh-verify", "--symbols", f"@{f}", "--theta", f"@{theta}", *FAST)
    assert code == 0
    code, out = call(capsys, "equiv", "--a", f"@{f}", "--b", f"@{f}")
    assert code == 0 and payload(out)["verdict"] is True


def test_threads_flag_is_echoed(capsys):
    code, out = call(capsys, "sup", "--poly", "1 0 : 1 0 0\n", "--threads", "2")
    assert code == 0 and payload(out)["params"]["threads"] == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "gammakit", "membership", "--point", "(0,0)"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["verdict"] is True
