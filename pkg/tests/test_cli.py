import json
import subprocess
import sys

import pytest

from reflmax.cli import main
from reflmax.serialization import fmt_float, iter_csv, parse_table


def run_cli(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def run_json(capsys, *argv):
    code, out = run_cli(capsys, *argv, "--json")
    payload = json.loads(out)
    rows = [dict(zip(payload["columns"], r)) for r in payload["rows"]]
    return code, payload, rows


def test_dist_n3(capsys):
    code, _, rows = run_json(capsys, "dist", "--n", "3")
    assert code == 0
    joint = {(r["x"], r["a"]): (r["numerator"], r["log2_denominator"]) for r in rows if r["kind"] == "joint"}
    assert joint == {(1, 1): (1, 1), (1, 2): (1, 2), (3, 3): (1, 2)}
    kinds = {r["kind"] for r in rows}
    assert kinds == {"joint", "position", "max"}


def test_dist_n1(capsys):
    _, _, rows = run_json(capsys, "dist", "--n", "1")
    joint = [r for r in rows if r["kind"] == "joint"]
    assert len(joint) == 1 and (joint[0]["x"], joint[0]["a"], joint[0]["float_value"]) == (1, 1, 1.0)


@pytest.mark.parametrize("argv", [["dist", "--n", "0"], ["dist", "--n", "20", "--cap", "10"],
                                  ["maxdist", "--n", "0"], ["density", "--gamma-min", "2", "--gamma-max", "1"],
                                  ["simulate", "--n", "5", "--trials", "0"], ["bogus"]])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_float_mode_lifts_cap(capsys):
    code, _, rows = run_json(capsys, "dist", "--n", "20", "--cap", "10", "--float")
    assert code == 0
    assert sum(r["float_value"] for r in rows if r["kind"] == "max") == pytest.approx(1.0)


def test_maxdist_small(capsys):
    code, payload, rows = run_json(capsys, "maxdist", "--n", "3", "--route", "trig")
    assert code == 0
    assert {r["a"]: r["Q"] for r in rows} == pytest.approx({1: 0.5, 2: 0.25, 3: 0.25}, abs=1e-15)
    assert payload["checks"][0]["passed"]


def test_maxdist_routes_agree(capsys):
    _, _, dp = run_json(capsys, "maxdist", "--n", "50", "--route", "dp")
    _, _, trig = run_json(capsys, "maxdist", "--n", "50", "--route", "trig")
    assert [r["a"] for r in dp] == [r["a"] for r in trig]
    assert max(abs(x["Q"] - y["Q"]) for x, y in zip(dp, trig)) < 1e-12


def test_maxdist_support(capsys):
    _, _, rows = run_json(capsys, "maxdist", "--n", "10")
    assert max(r["a"] for r in rows) == 10


def test_maxdist_large_n_truncates(capsys):
    code, payload, rows = run_json(capsys, "maxdist", "--n", "200000")
    assert code == 0 and payload["params"]["tail_cut"] == 1e-18
    assert len(rows) < 4000


def test_constants(capsys):
    _, _, rows = run_json(capsys, "constants")
    vals = {r["name"]: r["value"] for r in rows}
    assert round(vals["mean_A_over_sqrt_n"], 6) == 1.253314
    assert abs(vals["var_A_over_n"] - 0.261130) <= 1e-5
    assert round(vals["mean_S_over_sqrt_n"], 6) == 0.797885
    assert round(vals["second_moment_A_over_n"], 6) == 1.831931


def test_density(capsys):
    code, payload, rows = run_json(capsys, "density", "--gamma-min", "0.2", "--gamma-max", "5", "--steps", "8")
    assert code == 0 and payload["checks"][0]["passed"]
    at_one = [r for r in rows if r["gamma"] == 1.0]
    assert len(at_one) == 1 and at_one[0]["theta_sum"] == pytest.approx(0.45338, abs=5e-6)
    branches = [r["branch"] for r in rows]
    assert branches == ["direct"] * branches.index("resummed") + ["resummed"] * (len(rows) - branches.index("resummed"))
    assert rows[branches.index("resummed")]["gamma"] == 1.0


def test_simulate_csv(capsys):
    code, out = run_cli(capsys, "simulate", "--n", "20", "--trials", "20000", "--seed", "4", "--format", "csv")
    assert code == 0
    rows = list(iter_csv(out))
    assert list(rows[0]) == ["a", "count", "empirical_prob", "exact_prob", "z_score"]
    assert sum(int(r["count"]) for r in rows) == 20000
    assert max(abs(float(r["z_score"])) for r in rows) < 6


def test_simulate_json_summary(capsys):
    _, payload, _ = run_json(capsys, "simulate", "--n", "20", "--trials", "20000", "--seed", "4")
    s = payload["summary"]
    assert s["mean_A"] >= s["mean_S"] and s["ci_halfwidth_mean_A"] > 0


def test_verify_quick(capsys):
    code, payload, _ = run_json(capsys, "verify", "--level", "quick")
    assert code == 0
    assert payload["checks"] and all(c["passed"] for c in payload["checks"])
    nums = {int(c["name"].split(".")[0]) for c in payload["checks"]}
    assert nums == set(range(1, 13))


@pytest.mark.parametrize("argv", [["maxdist", "--n", "12", "--route", "dp"], ["density", "--steps", "4"],
                                  ["dist", "--n", "4"]])
def test_formats_render_identical_data(argv, capsys):
    _, payload, _ = run_json(capsys, *argv)
    _, table = run_cli(capsys, *argv, "--format", "table")
    _, csv_text = run_cli(capsys, *argv, "--format", "csv")
    header, trows = parse_table(table)
    crows = list(iter_csv(csv_text))
    assert header == payload["columns"]
    assert len(trows) == len(crows) == len(payload["rows"])
    for jrow, trow, crow in zip(payload["rows"], trows, crows):
        text = ["-" if v is None else fmt_float(v) if isinstance(v, float) else str(v) for v in jrow]
        assert text == trow == [v or "-" for v in crow.values()]


def test_out_file(tmp_path, capsys):
    target = tmp_path / "q.csv"
    assert main(["maxdist", "--n", "5", "--format", "csv", "--out", str(target)]) == 0
    assert capsys.readouterr().out == ""
    assert target.read_text().splitlines()[0] == "N,a,Q,route,numerator,log2_denominator"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "reflmax", "maxdist", "--n", "2", "--json"],
                          capture_output=True, text=True, check=True)
    n, a, q = json.loads(proc.stdout)["rows"][0][:3]
    assert (n, a) == (2, 1) and q == pytest.approx(0.5, abs=1e-15)
