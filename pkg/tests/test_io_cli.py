import json

import numpy as np
import pytest

from ginifield import (
    EmpiricalDistribution,
    EmptyAfterFilter,
    MissingColumn,
    NonPositiveValue,
    PairedSample,
    ReportEnvelope,
    gini_point,
    parse_income_csv,
)
from ginifield.cli import run_command
from ginifield.io import parse_index


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return str(p)

    return _write


def run(argv, capsys):
    code = run_command(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_single_column(write):
    parsed = parse_income_csv(write("a.csv", "income\n1\n2\n3\n"), ["income"])
    assert isinstance(parsed.sample, EmpiricalDistribution)
    assert parsed.sample.n == 3 and parsed.rows_read == 3 and parsed.rows_dropped == 0


def test_parse_two_columns(write):
    parsed = parse_income_csv(write("b.csv", "id,y1,y2\na,1,2\nb,2,3\nc,3,1\nd,4,4\n"), ["y1", "y2"])
    assert isinstance(parsed.sample, PairedSample) and parsed.sample.n == 4
    assert parsed.sample.x2.tolist() == [2, 3, 1, 4]


def test_reject_policy_names_row(write):
    with pytest.raises(NonPositiveValue) as exc:
        parse_income_csv(write("c.csv", "income\n1\n0\n2\n"), ["income"], "reject")
    assert exc.value.index == 2
    assert "row 2" in str(exc.value)


def test_drop_policy(write):
    parsed = parse_income_csv(write("d.csv", "income\n1\n0\n-3\nabc\n2\n"), ["income"], "drop")
    assert parsed.sample.n == 2 and parsed.rows_dropped == 3 and parsed.warnings
    with pytest.raises(EmptyAfterFilter):
        parse_income_csv(write("e.csv", "income\n0\n-1\n"), ["income"], "drop")


def test_missing_column_and_file(write, tmp_path):
    with pytest.raises(MissingColumn):
        parse_income_csv(write("f.csv", "wage\n1\n"), ["income"])
    with pytest.raises(FileNotFoundError):
        parse_income_csv(tmp_path / "nope.csv", ["income"])


def test_parse_index_selectors(write):
    assert parse_index("gini", None) is None
    assert parse_index("fgt:2", 1.0).label == "fgt:2"
    assert parse_index("sen", 1.0).kind == "sen"
    assert parse_index("kakwani:2", 1.0).label == "kakwani:2"
    spec = write("g.json", json.dumps({
        "weight": "np.ones_like(t)", "deprivation": "y", "scale": "n",
        "residual_g": "where(x < z, 1.0 - x / z, 0.0)".replace("z", "1.0"), "residual_nu": "0 * s",
    }))
    cfg = parse_index(f"gpi:{spec}", 1.0)
    assert cfg.has_residuals
    assert cfg.residual_g(np.array([0.25, 2.0])).tolist() == [0.75, 0.0]


def test_envelope_round_trip():
    env = ReportEnvelope("gini", {"a": 1, "cols": ("x", "y")}, {"gini": np.float64(0.25), "n": np.int64(3)},
                         {"sigma2_GI": {"t": 1.5}}, {"lower": 0.1, "upper": 0.4, "level": 0.95}, ["w"], "0.1.0", 0.5)
    back = ReportEnvelope.from_json(env.to_json())
    assert back == env
    assert back.to_json() == env.to_json()
    assert json.loads(env.to_json())["schema"] == "1"


def test_cli_gini(write, capsys):
    path = write("a.csv", "income\n1\n3\n2\n7\n")
    code, out, _ = run(["gini", "--input", path, "--column", "income", "--confidence", "0.95"], capsys)
    assert code == 0
    d = json.loads(out)
    assert d["schema"] == "1" and d["command"] == "gini"
    assert d["estimates"]["gini"] == gini_point(parse_income_csv(path, ["income"]).sample).value
    assert "Gamma(h,h)" in d["ledgers"]["sigma2_GI"]
    assert d["ci"]["lower"] <= d["estimates"]["gini"] <= d["ci"]["upper"]
    assert d["config"]["confidence"] == 0.95 and d["config"]["nonpositive"] == "reject"


def test_cli_deterministic_output(write, capsys):
    path = write("a.csv", "income\n1\n3\n2\n7\n")
    argv = ["gini", "--input", path, "--deterministic"]
    _, a, _ = run(argv, capsys)
    _, b, _ = run(argv, capsys)
    assert a == b and json.loads(a)["timing"] is None


def test_cli_exit_codes(write, capsys):
    same = write("s.csv", "y1,y2\n1,1\n2,2\n3,3\n")
    code, _, err = run(["ratio", "--input", same, "--poverty-line", "2.5"], capsys)
    assert code == 4 and "NearZeroDenominator" in err
    bad = write("z.csv", "income\n1\n0\n")
    code, _, err = run(["gini", "--input", bad], capsys)
    assert code == 3 and "NonPositiveValue" in err
    assert run(["gini"], capsys)[0] == 2
    assert run(["nonsense"], capsys)[0] == 2
    assert run(["gini", "--input", bad, "--confidence", "1.5"], capsys)[0] == 2
    assert run(["gini", "--input", "/no/such/file.csv"], capsys)[0] == 3
    assert run(["delta-gpi", "--input", same, "--index", "sen", "--poverty-line", "2"], capsys)[0] == 3
    assert run(["gpi", "--input", bad, "--index", "gini"], capsys)[0] == 2


def test_cli_two_period_commands(write, capsys, tmp_path):
    out = tmp_path / "pair.csv"
    assert run(["simulate", "--family", "lognormal:0,0.8", "--family2", "lognormal:0,1",
                "--copula", "gaussian:0.5", "--n", "300", "--seed", "4", "--output", str(out)], capsys)[0] == 0
    code, text, _ = run(["delta-gini", "--input", str(out), "--deterministic"], capsys)
    d = json.loads(text)
    assert code == 0 and d["estimates"]["delta_gini"] == pytest.approx(
        d["estimates"]["gini2"] - d["estimates"]["gini1"], abs=1e-15)
    assert "gamma2(L1,L2)" in d["ledgers"]["grid_check"]
    code, text, _ = run(["delta-gpi", "--input", str(out), "--index", "fgt:2", "--poverty-line", "1"], capsys)
    assert code == 0 and json.loads(text)["estimates"]["sigma2_delta_gpi"] >= 0
    code, text, _ = run(["ratio", "--input", str(out), "--poverty-line", "1", "--output", str(tmp_path / "r.json")],
                        capsys)
    assert code == 0 and text == ""
    r = json.loads((tmp_path / "r.json").read_text())
    e = r["estimates"]
    assert e["R"] == pytest.approx(e["delta_gpi"] / e["delta_gini"], rel=1e-12)


def test_cli_gpi_and_lorenz(write, capsys, tmp_path):
    path = write("a.csv", "income\n0.5\n1.5\n2.0\n")
    code, text, _ = run(["gpi", "--input", path, "--index", "fgt:1", "--poverty-line", "1"], capsys)
    assert code == 0 and json.loads(text)["estimates"]["gpi"] == pytest.approx(1 / 6, abs=1e-15)
    code, text, _ = run(["lorenz", "--input", write("l.csv", "income\n1\n3\n")], capsys)
    assert code == 0 and text == "p,L\n0.5,0.25\n1.0,1.0\n"


def test_cli_validate(capsys, tmp_path):
    argv = ["validate", "--target", "sigma2_GI", "--family", "exponential:1", "--n", "500",
            "--replicates", "50", "--seed", "7", "--deterministic", "--replicate-csv", str(tmp_path / "r.csv")]
    code, a, _ = run(argv, capsys)
    assert code == 0
    d = json.loads(a)["estimates"]
    assert set(d) >= {"target", "truth", "mc_estimate", "plugin_median", "relative_gap", "coverage", "pass", "runtime"}
    assert d["runtime"] == 0.0
    assert (tmp_path / "r.csv").read_text().count("\n") == 51
    assert run(argv, capsys)[1] == a


def test_cli_validate_ratio_scenario(capsys):
    argv = ["validate", "--target", "sigma2_R", "--family", "exponential:1", "--shift2", "0.111111111111",
            "--copula", "comonotone", "--index", "fgt:1", "--poverty-line", "0.6", "--n", "400",
            "--replicates", "20", "--seed", "1", "--deterministic"]
    code, text, _ = run(argv, capsys)
    assert code == 0 and json.loads(text)["estimates"]["target"] == "sigma2_R"


def test_cli_version(capsys):
    assert run(["--version"], capsys)[0] == 0
