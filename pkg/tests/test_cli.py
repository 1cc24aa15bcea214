import csv
import io
import json
import subprocess
import sys

import pytest

from hischwarz.cli import run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_pade_example():
    code, out, _ = call("pade", "--fn", "exp", "--at", "0", "--d", "2", "--backend", "exact")
    data = json.loads(out)
    assert code == 0
    assert data["p"] == ["1", "1/2", "1/12"] and data["q"] == ["1", "-1/2", "1/12"]
    assert data["schema"] == "v1"


def test_schwarzian_example():
    code, out, _ = call("schwarzian", "--fn", "exp", "--at", "0", "--d", "2")
    assert code == 0 and json.loads(out)["S"] == ["-1/2", "1/6"]


@pytest.mark.parametrize("route", ["det", "defect", "recursive"])
def test_routes_from_cli(route):
    _, out, _ = call("schwarzian", "--fn", "exp", "--d", "3", "--route", route)
    assert json.loads(out)["S"][:2] == ["-1/2", "1/6"]


def test_mobius_routes():
    mob = ("schwarzian", "--fn", "mobius", "--mobius", "2,1,1,3", "--at", "1/2", "--d", "3")
    for route in ("defect", "recursive"):
        assert json.loads(call(*mob, "--route", route)[1])["S"] == ["0", "0", "0"]
    # the determinant formula divides by a vanishing Hankel determinant here
    assert call(*mob, "--route", "det")[0] == 3


def test_output_is_byte_stable():
    args = ("cf", "--jet", '{"base": "0", "coeffs": ["0", "1", "1/2", "1/3", "1/4", "1/5"]}', "--d", "2")
    assert call(*args)[1] == call(*args)[1]
    assert list(json.loads(call(*args)[1])) == sorted(json.loads(call(*args)[1]))


def test_csv_output():
    _, out, _ = call("pade", "--fn", "exp", "--d", "2", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert out.startswith("k,p,q\r\n")
    assert rows[2] == {"k": "2", "p": "1/12", "q": "1/12"}


def test_pretty_output():
    code, out, _ = call("schwarzian", "--fn", "exp", "--d", "1", "--format", "pretty")
    assert code == 0 and "S: [-1/2]" in out


def test_usage_errors():
    assert call("schwarzian", "--fn", "exp", "--at", "1", "--d", "2")[0] == 2
    assert call("schwarzian", "--fn", "q", "--alpha", "5/2", "--at", "1/2", "--d", "1")[0] == 2
    assert call("pade", "--d", "2")[0] == 2
    assert call("monotone", "--func", "sqrt")[0] == 2  # missing seed
    assert call("nonsense")[0] == 2
    assert call("pade", "--jet", "{not json", "--d", "1")[0] == 2


def test_precondition_errors():
    code, _, err = call("schwarzian", "--jet", '{"base": "0", "coeffs": ["0", "0", "1", "0"]}', "--d", "1")
    assert code == 3 and "CriticalPoint" in err
    assert call("pade", "--jet", '{"base": "0", "coeffs": ["1", "0", "1"]}', "--d", "1")[0] == 3


def test_fail_verdict_is_data():
    code, out, _ = call("monotone", "--func", "square", "--n", "2", "--seed", "0",
                        "--pairs", "[[[[1,1],[1,1]],[[2,1],[1,1]]]]")
    assert code == 0 and json.loads(out)["verdict"] == "FAIL"
    code, out, _ = call("koebe", "--fn", "mobius", "--d", "1", "--m", "2", "--n", "1", "--U=-1,1",
                        "--grid", "0,1/4,1/2", "--constant", "statement")
    assert code == 0 and json.loads(out)["verdict"] == "FAIL"


def test_koebe_witness():
    _, out, _ = call("koebe", "--fn", "mobius", "--d", "1", "--m", "2", "--n", "1", "--U=-1,1",
                     "--grid", "0,1/4,1/2")
    data = json.loads(out)
    assert [p["ratio"] for p in data["pairs"][0]["points"]] == ["1", "1", "1"]


def test_pick_and_halfplane():
    _, out, _ = call("pick-certify", "--cf", '{"base": "0", "A": ["0", "1"], "mu": ["2"]}')
    assert {c["verdict"] for c in json.loads(out)["certificates"]} == {"Pick"}
    _, out, _ = call("halfplane", "--map", '{"base": "0", "p": ["0", "0", "1"], "q": ["1"]}', "--n", "10")
    assert json.loads(out)["verdict"] == "FAIL"


def test_crossratio():
    _, out, _ = call("crossratio", "--fn", "mobius", "--points", "0,1/3,1/2")
    assert json.loads(out)["eigenvalues"][-1] == pytest.approx(3.0)


def test_scan():
    code, out, _ = call("scan", "--fn", "logistic", "--d", "1", "--eps", "1/8", "--samples", "20")
    data = json.loads(out)
    assert code == 0 and data["epsilons"][0]["events"] == data["epsilons"][0]["all_positive"] > 0
    code, out, _ = call("scan", "--fn", "logistic", "--d", "2", "--samples", "4", "--format", "csv")
    assert out.splitlines()[0] == "eps,sample,x,s,kind,Df,S1,S2,all_positive,identity,image_bits,max_bits"


def test_selftest_subprocess():
    proc = subprocess.run([sys.executable, "-m", "hischwarz", "selftest"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["passed"] is True
