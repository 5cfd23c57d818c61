import csv
import io
import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selberg_det import cli
from selberg_det import groupdata as gd
from selberg_det.errors import UsageError
from selberg_det.verify import CheckOutcome


def run(capsysbinary, *argv):
    code = cli.main(list(argv))
    out = capsysbinary.readouterr()
    return code, out.out, out.err


def test_verify_specfun_all_pass(capsysbinary):
    code, out, _ = run(capsysbinary, "verify", "run", "--suite", "specfun")
    assert code == 0
    d = json.loads(out)
    assert d["schema"] == "selberg-det/1"
    assert d["suite_outcomes"] and all(c["pass"] for c in d["suite_outcomes"])


def test_zeta_eval_euler_record(capsysbinary):
    code, out, _ = run(capsysbinary, "--no-meta", "zeta", "eval", "--group", "modular", "--s", "2,0", "--parts", "euler")
    assert code == 0
    (rec,) = json.loads(out)["results"]
    assert rec["method"] == "euler_product"
    assert 0 < rec["error_estimate"] < 1e-4
    assert abs(rec["value"]["re"] - 0.95380) < 1e-4


def test_unknown_flag_is_usage_error(capsysbinary):
    code, _, err = run(capsysbinary, "zeta", "eval", "--bogus")
    assert code == 2 and b"error" in err
    with pytest.raises(UsageError):
        cli.run_command(["nosuch"])


def test_exit_codes(capsysbinary, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsysbinary, "zeta", "eval", "--descriptor", str(bad), "--s", "2")[0] == 3
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"nonsense": 1}))
    assert run(capsysbinary, "--config", str(cfg), "geodesics", "enumerate")[0] == 3
    # the Euler tail cannot reach 1e-20
    assert run(capsysbinary, "--tol", "1e-20", "zeta", "eval", "--s", "2", "--parts", "euler")[0] == 4
    assert run(capsysbinary, "zeta", "eval", "--s", "1", "--parts", "euler")[0] == 2
    # the displayed parabolic normalization fails its relation
    assert run(capsysbinary, "verify", "run", "--suite", "trace")[0] == 1


def test_determinism(capsysbinary):
    argv = ["--no-meta", "det", "eval", "--path", "factorized", "--s", "2", "--s", "0.5,3"]
    a = run(capsysbinary, *argv)[1]
    b = run(capsysbinary, *argv)[1]
    assert a == b
    assert "runtime_ms" not in json.loads(a)
    assert "runtime_ms" in json.loads(run(capsysbinary, "geodesics", "enumerate", "--norm-max", "50")[1])


def test_threads_do_not_change_results(capsysbinary):
    argv = ["zeta", "eval", "--s-grid", "1.5:3:4", "--parts", "complete"]
    one = json.loads(run(capsysbinary, "--no-meta", *argv)[1])
    many = json.loads(run(capsysbinary, "--no-meta", "--threads", "3", *argv)[1])
    assert one == many
    assert len(one["results"]) == 4


def test_every_number_has_an_estimate(capsysbinary):
    for argv in (
        ["geodesics", "enumerate", "--norm-max", "200"],
        ["zeta", "eval", "--s", "2", "--parts", "identity,elliptic,parabolic,euler,complete"],
        ["specfun", "eval", "--fn", "gamma", "--z", "2.5,1"],
        ["trace", "eval", "--term", "parabolic", "--kind", "resolvent", "--params", "s=2;beta=1.5"],
        ["jl", "eval", "--level", "6", "--kind", "H", "--s", "2"],
    ):
        code, out, _ = run(capsysbinary, *argv)
        assert code == 0
        for rec in json.loads(out)["results"]:
            assert isinstance(rec["error_estimate"], float) and math.isfinite(rec["error_estimate"])
            assert rec["method"]


def test_pass_is_recomputable(capsysbinary):
    _, out, _ = run(capsysbinary, "verify", "run", "--suite", "jl")
    for c in json.loads(out)["suite_outcomes"]:
        assert c["pass"] == (c["residual"] <= c["tolerance"])


def test_tol_overrides_suite_tolerance(capsysbinary):
    code, out, _ = run(capsysbinary, "--tol", "1e-300", "verify", "run", "--suite", "specfun")
    assert code == 1
    assert all(c["tolerance"] == 1e-300 for c in json.loads(out)["suite_outcomes"])


def test_config_and_flag_precedence(capsysbinary, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"degree": 16, "norm_max": 300}))
    d = json.loads(run(capsysbinary, "--config", str(cfg), "zeta", "eval", "--s", "2", "--method", "transfer", "--parts", "euler")[1])
    assert d["inputs"]["degree"] == 16
    d = json.loads(
        run(capsysbinary, "--config", str(cfg), "zeta", "eval", "--s", "2", "--method", "transfer", "--parts", "euler", "--degree", "20")[1]
    )
    assert d["inputs"]["degree"] == 20
    d = json.loads(run(capsysbinary, "--config", str(cfg), "geodesics", "enumerate")[1])
    assert d["inputs"]["norm_max"] == 300


def test_descriptor_file_matches_builtin(capsysbinary, tmp_path):
    path = tmp_path / "g02.json"
    path.write_text(json.dumps(gd.descriptor_to_json(gd.builtin("gamma0_2"))))
    common = ["--no-meta", "zeta", "eval", "--s", "2.5", "--method", "transfer", "--parts", "euler"]
    a = json.loads(run(capsysbinary, *common, "--descriptor", str(path))[1])["results"]
    b = json.loads(run(capsysbinary, *common, "--group", "gamma0_2")[1])["results"]
    assert a == b


def test_transferop_dump(capsysbinary):
    d = json.loads(run(capsysbinary, "transferop", "dump", "--s", "2", "--degree", "4")[1])
    assert d["inputs"]["shape"] == [10, 10]  # degree 4 keeps 5 Taylor coefficients per block
    assert len(d["results"]) == 100
    assert max(r["error_estimate"] for r in d["results"]) < 1e-10


def test_jl_table_csv(capsysbinary):
    code, out, _ = run(capsysbinary, "--format", "csv", "jl", "table", "--beta", "--max", "100")
    rows = list(csv.reader(io.StringIO(out.decode())))
    assert rows[0] == ["a", "value", "error_estimate", "method"]
    assert len(rows) == 101
    assert rows[6][:2] == ["6", "4"]


def test_det_spectral_and_sphere(capsysbinary):
    d = json.loads(run(capsysbinary, "det", "eval", "--target", "sphere", "--s", "2")[1])
    assert abs(d["results"][0]["value"]["re"] - 1 / (2 * math.pi) * json.loads(
        run(capsysbinary, "det", "eval", "--target", "sphere", "--s", "1")[1])["results"][0]["value"]["re"]) < 1e-12
    assert run(capsysbinary, "det", "eval", "--path", "spectral", "--group", "gamma0_2", "--s", "2")[0] == 2


# --- report format ----------------------------------------------------------


def test_empty_report_json():
    r = cli.RunReport("zeta eval", {})
    d = json.loads(cli.emit_report(r, "json"))
    assert d["results"] == [] and d["suite_outcomes"] == []
    assert cli.parse_report(cli.emit_report(r)) == r


def test_csv_complex_format():
    r = cli.RunReport("x", {}, [cli.ResultRecord({"s": 2 + 0j}, 1.5 - 2.25j, 1e-9, "m")])
    rows = list(csv.reader(io.StringIO(cli.emit_report(r, "csv").decode())))
    assert rows[1] == ["2.0+0.0i", "1.5-2.25i", "1e-09", "m"]


def test_text_format():
    r = cli.RunReport("x", {"a": 1}, [], [CheckOutcome("c", 0.5, 0.1)])
    assert "FAIL c" in cli.emit_report(r, "text").decode()


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)
values = st.one_of(finite, st.integers(-(10**6), 10**6), st.builds(complex, finite, finite))


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.tuples(values, values, st.floats(0, 1e3), st.sampled_from(["series", "transfer"])), max_size=5),
    st.lists(st.tuples(st.text(max_size=8), finite, finite), max_size=3),
    st.one_of(st.none(), st.integers(0, 10**6)),
)
def test_json_round_trip(recs, checks, runtime):
    r = cli.RunReport(
        "zeta eval",
        {"group": "modular", "s": 2 + 1j, "grid": [1.0, 2.0]},
        [cli.ResultRecord({"s": p}, v, e, m) for p, v, e, m in recs],
        [CheckOutcome(n, a, b) for n, a, b in checks],
        runtime,
    )
    assert cli.parse_report(cli.emit_report(r, "json")) == r
