import csv
import io
import json

import numpy as np
import pytest

from rodov.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


# -- spline ----------------------------------------------------------------

def test_spline_r2_samples(capsys):
    code, out, _ = run(capsys, "spline", "--r", "2", "--a1", "0", "--a2", "0", "-n", "5")
    assert code == 0
    r = rows(out)
    assert r[0] == ["t", "value"] and len(r) == 6
    assert (float(r[1][0]), float(r[1][1])) == (0.0, -0.5)


def test_spline_plateau_rows(capsys):
    code, out, _ = run(capsys, "spline", "--r", "1", "--a1", "1", "--a2", "2", "-n", "9")
    assert code == 0
    vals = [(float(t), float(v)) for t, v in rows(out)[1:]]
    # psi_1(1,2) has period 2*(1+2+2) = 10 and equals 1 on [1/2 + 1, 1/2 + 3]
    plateau = [v for t, v in vals if 1.5 <= t <= 3.5]
    assert plateau and all(v == 1.0 for v in plateau)


@pytest.mark.parametrize("n", ["0", "-3"])
def test_spline_zero_samples(capsys, n):
    assert run(capsys, "spline", "--r", "2", "-n", n)[0] == 2


def test_spline_bad_params(capsys):
    assert run(capsys, "spline", "--r", "0")[0] == 2
    assert run(capsys, "spline", "--r", "2", "--a1", "-1")[0] == 2
    assert run(capsys, "spline", "--a1", "1")[0] == 2


def test_spline_sidecar(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert run(capsys, "spline", "--r", "3", "--a1", "1", "--a2", "0.5", "--out", str(out))[0] == 0
    side = json.loads((tmp_path / "s.spline.json").read_text())
    assert side["breakpoints"][0] == 0.0 and side["period"] == pytest.approx(2 * (1 + 0.5 + 2))
    assert len(side["coefficients"]) == len(side["breakpoints"]) and side["breakpoints"][-1] < side["period"]
    assert len(rows(out.read_text())) == 1026


def test_spline_scaled_json(capsys):
    code, out, _ = run(capsys, "spline", "--r", "2", "--b", "2", "--lambda", "1", "-n", "3", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["t"] == [0.0, 0.5, 1.0] and d["spline"]["period"] == 1.0


# -- norms -----------------------------------------------------------------

def test_norms_r3(capsys):
    code, out, _ = run(capsys, "norms", "--r", "3", "--a1", "1", "--a2", "1", "--b", "1", "--lambda", "8")
    assert code == 0
    got = [(int(k), float(v)) for k, v in rows(out)[1:]]
    assert [k for k, _ in got] == [0, 1, 2, 3]
    assert got[0][1] == pytest.approx(35 / 24, rel=1e-14)
    assert all(v == pytest.approx(1.0, rel=1e-14) for _, v in got[1:])


def test_norms_triangle(capsys):
    code, out, _ = run(capsys, "norms", "--r", "1", "--a1", "0", "--a2", "0", "--b", "1", "--lambda", "4")
    assert code == 0 and [[float(v) for v in r] for r in rows(out)[1:]] == [[0, 1], [1, 1]]


def test_norms_top_row_is_b(capsys):
    code, out, _ = run(capsys, "norms", "--r", "4", "--a1", "0.3", "--a2", "2", "--b", "-2.5", "--lambda", "3")
    assert code == 0 and float(rows(out)[-1][1]) == 2.5


def test_norms_invalid(capsys):
    assert run(capsys, "norms", "--r", "3", "--b", "1", "--lambda", "-1")[0] == 2
    assert run(capsys, "norms", "--r", "3", "--b", "0", "--lambda", "1")[0] == 2


# -- match -----------------------------------------------------------------

def test_match_case_a(capsys):
    code, out, _ = run(capsys, "match", "--case", "a", "--r", "2", "--targets", "1.5", "1", "1")
    d = json.loads(out)
    assert code == 0
    assert d["params"]["a2"] == pytest.approx(2, abs=1e-6)
    assert d["params"]["lambda"] == pytest.approx(8, abs=1e-6)
    assert d["params"]["b"] == pytest.approx(1, abs=1e-6)
    assert max(abs(v) for v in d["residuals"].values()) < 1e-8


def test_match_case_b(capsys):
    code, out, _ = run(capsys, "match", "--case", "b", "--r", "3", "--targets", repr(5 / 6), "0.5", "1")
    p = json.loads(out)["params"]
    assert code == 0
    assert (p["a1"], p["lambda"], p["b"]) == pytest.approx((2, 8, 1), abs=1e-6)


def test_match_infeasible(capsys):
    code, _, err = run(capsys, "match", "--case", "a", "--r", "2", "--targets", "0.4", "1", "1")
    assert code == 3 and "infeasible" in err


def test_match_target_count(capsys):
    assert run(capsys, "match", "--case", "c", "--r", "3", "--targets", "1", "1", "1")[0] == 2


def test_match_csv(capsys):
    code, out, _ = run(capsys, "match", "--case", "a", "--r", "2", "--targets", "1.5", "1", "1", "--format", "csv")
    d = dict(rows(out)[1:])
    assert code == 0 and float(d["lambda"]) == pytest.approx(8) and "residual_0" in d


def test_match_output_round_trips_through_config(tmp_path, capsys):
    cfg = tmp_path / "m.json"
    assert run(capsys, "match", "--case", "c", "--r", "4", "--targets", "0.3", "0.5", "0.8", "1", "--out", str(cfg))[0] == 0
    code, out, _ = run(capsys, "norms", "--config", str(cfg))
    got = {int(k): float(v) for k, v in rows(out)[1:]}
    assert code == 0
    for k, m in zip((0, 2, 3, 4), (0.3, 0.5, 0.8, 1.0)):
        assert got[k] == pytest.approx(m, rel=1e-8)


def test_config_flags_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"r": 2, "a1": 0, "a2": 0, "b": 1, "lambda": 4}))
    code, out, _ = run(capsys, "norms", "--config", str(cfg), "--b", "3")
    assert code == 0 and float(rows(out)[-1][1]) == 3.0
    cfg.write_text(json.dumps({"r": 2, "mu": 1}))
    assert run(capsys, "norms", "--config", str(cfg))[0] == 2
    assert run(capsys, "norms", "--config", str(tmp_path / "missing.json"))[0] == 2


# -- rearrange ---------------------------------------------------------------

def test_rearrange_triangle(capsys):
    code, out, _ = run(capsys, "rearrange", "--r", "2", "--a1", "0", "--a2", "0", "-n", "101")
    assert code == 0
    r = np.array([[float(v) for v in row] for row in rows(out)[1:]])
    u, ru, cum = r.T
    assert np.max(np.abs(ru - (1 - u))) <= 1e-8
    assert cum[0] == 0.0
    assert np.max(np.abs(cum - (u - u * u / 2))) <= 1e-12


def test_rearrange_constant_input(tmp_path, capsys):
    # the triangle wave has |x'| constant
    code, out, _ = run(capsys, "rearrange", "--r", "1", "-n", "11")
    r = np.array([[float(v) for v in row] for row in rows(out)[1:]])
    assert code == 0 and np.all(r[:, 1] == r[0, 1])
    f = tmp_path / "x.json"
    f.write_text(json.dumps({"period": 1, "cos": [2.0], "sin": []}))
    code, out, _ = run(capsys, "rearrange", "--input", str(f), "-n", "5")
    r = np.array([[float(v) for v in row] for row in rows(out)[1:]])
    assert code == 0 and np.all(r[:, 1] == 0.0) and np.all(r[:, 2] == 0.0)


def test_rearrange_trig(tmp_path, capsys):
    f = tmp_path / "x.json"
    f.write_text(json.dumps({"period": 1, "cos": [0], "sin": [0, 1]}))
    code, out, _ = run(capsys, "rearrange", "--input", str(f), "-n", "9", "--format", "json")
    d = json.loads(out)
    u = np.array(d["u"])
    # |2 pi cos 2 pi t| rearranges to 2 pi cos(pi u / 2)
    assert code == 0
    assert np.allclose(d["r"], 2 * np.pi * np.cos(np.pi * u / 2), rtol=0, atol=1e-9)
    assert d["cumulative"][-1] == pytest.approx(4.0, rel=1e-12)


def test_rearrange_bad_input(tmp_path, capsys):
    f = tmp_path / "x.json"
    f.write_text("{not json")
    assert run(capsys, "rearrange", "--input", str(f))[0] == 2
    f.write_text(json.dumps({"period": 1}))
    assert run(capsys, "rearrange", "--input", str(f))[0] == 2
    assert run(capsys, "rearrange", "--r", "2", "-n", "1")[0] == 2


# -- verify ------------------------------------------------------------------

def test_verify_comparison_case_a(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "comparison", "--case", "a", "--trials", "100", "--seed", "7")
    d = json.loads(out)
    assert code == 0 and d["passed"] and d["results"][0]["violations"] == 0 and d["results"][0]["trials"] == 100


def test_verify_all_on_psi_is_equality(capsys):
    code, out, _ = run(capsys, "verify", "--x", "psi", "--r", "4", "--a1", "0.5", "--a2", "1", "--b", "1", "--lambda", "1")
    d = json.loads(out)
    assert code == 0 and d["mode"] == "function"
    names = []
    for res in d["results"]:
        assert "skipped" not in res, res
        names.append(res["suite"])
        for rep in res["checks_detail"]:
            if rep["name"] == "sign-changes":
                continue
            scale = rep["tol"] / 1e-8
            assert abs(rep["worst_slack"]) <= 1e-9 * scale, rep
    assert len(names) == 8


def test_verify_unknown_suite(capsys):
    assert run(capsys, "verify", "--suite", "bogus")[0] == 2
    assert run(capsys, "verify", "--suite", "comparison,nope")[0] == 2
    assert run(capsys, "verify", "--suite", "comparison", "--tol", "0")[0] == 2
    assert run(capsys, "verify", "--suite", "comparison", "--trials", "0")[0] == 2


def test_verify_hypothesis_failed_exit(tmp_path, capsys):
    f = tmp_path / "x.json"
    f.write_text(json.dumps({"period": 1, "cos": [0], "sin": [0, 0.1]}))
    argv = ["verify", "--suite", "comparison", "--input", str(f), "--r", "2", "--a1", "0", "--a2", "2", "--b", "1", "--lambda", "8"]
    code, _, err = run(capsys, *argv)
    assert code == 5 and "hypothesis" in err


def test_verify_user_function(tmp_path, capsys):
    f = tmp_path / "x.json"
    f.write_text(json.dumps({"period": 1, "cos": [0, 0.2], "sin": [0, 0.1, 0.05]}))
    code, out, _ = run(capsys, "verify", "--suite", "comparison,sign-changes", "--input", str(f), "--r", "3", "--case", "a")
    d = json.loads(out)
    assert code == 0 and d["config"]["params"]["r"] == 3 and d["passed"]


def test_verify_violation_exit(capsys):
    # with a tolerance far below rounding, the equality case x = Psi shows a violation
    argv = ["verify", "--suite", "comparison", "--x", "psi", "--r", "4", "--a1", "0.5", "--a2", "1", "--b", "1", "--lambda", "1"]
    assert run(capsys, *argv)[0] == 0
    code, out, _ = run(capsys, *argv, "--tol", "1e-300")
    d = json.loads(out)
    assert code == 1 and not d["passed"] and d["results"][0]["violations"] == 1


def test_verify_report_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    argv = ["verify", "--suite", "hypothesis,sign-changes", "--trials", "5", "--seed", "3"]
    assert run(capsys, *argv, "--out", str(a))[0] == 0
    assert run(capsys, *argv, "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_verify_flags_reach_options(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "ligun", "--case", "a", "--r-max", "5", "--trials", "3",
                       "--p", "1", "3", "--grid", "64", "--levels", "32", "--tol", "1e-7")
    d = json.loads(out)
    assert code == 0
    assert d["config"]["p"] == [1.0, 3.0] and d["config"]["grid"] == 64 and d["config"]["levels"] == 32
    assert d["results"][0]["worst"]["tol"] > 0


def test_logging_env(monkeypatch, capsys):
    monkeypatch.setenv("RODOV_LOG", "info")
    code, _, err = run(capsys, "verify", "--suite", "hypothesis", "--trials", "2")
    assert code == 0 and "suite hypothesis" in err
