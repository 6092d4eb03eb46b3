import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from vmgamma.cli import parse_config, run
from vmgamma.errors import ValidationError
from vmgamma.presets import baseline_config


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture
def config_file(tmp_path):
    def write(doc, name="model.json"):
        path = tmp_path / name
        path.write_text(doc if isinstance(doc, str) else json.dumps(doc, indent=2))
        return str(path)
    return write


def test_baseline_config_accepted():
    cfg = parse_config(json.dumps(baseline_config(rho=0.3)))
    assert cfg.params.n == 3 and cfg.rho == 0.3
    assert np.allclose(cfg.A @ cfg.A, [[1, 0.3], [0.3, 1]])


def test_both_A_and_rho_rejected():
    doc = baseline_config()
    doc["A"] = [[1, 0], [0, 1]]
    with pytest.raises(ValidationError, match="A/rho"):
        parse_config(json.dumps(doc))


def test_zero_column_rejected():
    doc = baseline_config()
    doc["M"] = [[0.5, 0, 0.5], [0, 0, 0.5]]
    with pytest.raises(ValidationError, match="M"):
        parse_config(json.dumps(doc))


def test_parse_error_reports_line():
    with pytest.raises(ValidationError, match="line 3"):
        parse_config('{\n  "b": [1, 2],\n  "M": ]\n}')


def test_field_errors_are_named():
    doc = baseline_config()
    doc["S0"] = [100.0]
    with pytest.raises(ValidationError, match="S0"):
        parse_config(json.dumps(doc))
    doc = baseline_config()
    doc["colour"] = "blue"
    with pytest.raises(ValidationError, match="colour"):
        parse_config(json.dumps(doc))
    doc = baseline_config()
    doc["schema"] = 2
    with pytest.raises(ValidationError, match="schema"):
        parse_config(json.dumps(doc))


def test_explicit_A(config_file):
    doc = baseline_config()
    del doc["rho"]
    doc["A"] = [[1.0, 0.0], [0.0, 1.0]]
    code, out, _ = call("moments", "--config", config_file(doc))
    assert code == 0
    assert float(rows(out)[0]["mean_1"]) == pytest.approx(0.0921, abs=5e-5)


def test_moments_row():
    code, out, err = call("moments", "--t", "1", "--rho", "0.3")
    assert code == 0 and err == ""
    (row,) = rows(out)
    got = [float(row[k]) for k in ("mean_1", "mean_2", "vol_1", "vol_2", "corr_12")]
    assert np.allclose(got, [0.0917, 0.0782, 0.1296, 0.2104, 0.3651], atol=5e-5)
    # full double precision in the output
    assert len(row["mean_1"].replace("0.", "", 1)) >= 15


def test_esscher_null_rows():
    code, out, _ = call("esscher", "--rate", "0.10")
    assert code == 0
    h = [float(r["value"]) for r in rows(out) if r["quantity"] == "h"]
    assert h == [0.0, 0.0]


def test_esscher_rows(config_file):
    doc = baseline_config(rho=-0.3, r=0.05)
    code, out, _ = call("esscher", "--config", config_file(doc))
    assert code == 0
    h = [float(r["value"]) for r in rows(out) if r["quantity"] == "h"]
    assert np.allclose(h, [-3.8416, -1.8390], atol=1e-3)


def test_price_lattice_row():
    code, out, _ = call("price", "--kind", "worst_of", "--style", "american", "--strike", "100",
                        "--method", "lattice", "--rho", "0.3", "--rate", "0.10")
    assert code == 0
    (row,) = rows(out)
    assert float(row["price"]) == pytest.approx(4.03, abs=0.03)
    assert row["method"] == "lattice" and row["steps"] == "200"


def test_price_other_methods():
    code, out, _ = call("price", "--kind", "best_of", "--strike", "100", "--method", "fourier", "--rho", "0.3")
    assert code == 0 and float(rows(out)[0]["price"]) == pytest.approx(0.71, abs=0.02)
    code, out, _ = call("price", "--kind", "best_of", "--strike", "100", "--method", "mc", "--paths", "20000",
                        "--seed", "5", "--rho", "0.3")
    row = rows(out)[0]
    assert code == 0 and float(row["std_error"]) > 0


def test_density_output():
    code, out, _ = call("density", "--counts", "32,32", "--extent", "6")
    assert code == 0
    lines = out.splitlines()
    meta = json.loads(lines[0][2:])
    assert lines[0].startswith("# ") and meta["counts"] == [32, 32] and meta["t"] == 0.25
    data = rows("\n".join(lines[1:]))
    assert len(data) == 32 * 32 and set(data[0]) == {"y1", "y2", "density"}


def test_simulate_deterministic_and_output_file(tmp_path):
    target = tmp_path / "samples.csv"
    code, out, _ = call("simulate", "--paths", "50", "--seed", "7")
    assert code == 0
    code2, out2, _ = call("simulate", "--paths", "50", "--seed", "7", "--output", str(target))
    assert code2 == 0 and out2 == ""
    assert target.read_text() == out
    assert len(rows(out)) == 50


@pytest.mark.parametrize("argv, code", [
    (["price", "--kind", "best_of", "--strike", "-1"], 4),
    (["price", "--kind", "nope", "--strike", "100"], 4),
    (["moments", "--config", "/nonexistent/model.json"], 4),
    (["density", "--t", "0"], 2),
])
def test_exit_codes(argv, code):
    got, out, err = call(*argv)
    assert got == code
    assert out == ""
    assert len(err.strip().splitlines()) == 1 and err.startswith("error: ")


def test_domain_exit_code(config_file):
    doc = baseline_config()
    del doc["rho"]
    doc["A"] = [[60.0, 0.0], [0.0, 1.0]]
    code, _, err = call("moments", "--config", config_file(doc))
    assert code == 2 and "domain" in err


def test_convergence_exit_code(monkeypatch):
    import vmgamma.cli as cli
    from vmgamma.errors import ConvergenceError

    def fail(market):
        raise ConvergenceError("no root")
    monkeypatch.setattr(cli, "solve_esscher", fail)
    code, _, err = call("esscher")
    assert code == 3 and err.strip() == "error: convergence: no root"


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "vmgamma", "moments", "--rho", "0"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.startswith("t,mean_1")
