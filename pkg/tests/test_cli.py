import csv
import io
import json

import numpy as np
import pytest

from reference_values import F0
from twolayer.cli import main
from twolayer.ratpoly import XS, BiPoly


def call(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_conserved_gen_json(capsys):
    code, out, _ = call(capsys, "conserved", "gen", "--n", "4")
    assert code == 0
    body = json.loads(out)
    assert [d["index"] for d in body["densities"]] == [1, 2, 3, 4]
    p = BiPoly.from_json(body["densities"][3]["density"]["terms"], XS)
    assert p == F0[4]


def test_output_is_deterministic(capsys):
    a = call(capsys, "conserved", "gen", "--family", "algebraic", "--n", "3")[1]
    b = call(capsys, "conserved", "gen", "--family", "algebraic", "--n", "3")[1]
    assert a == b


def test_toda_family_uv(capsys):
    code, out, _ = call(capsys, "conserved", "gen", "--family", "toda", "--n", "2", "--vars", "uv")
    assert code == 0 and len(json.loads(out)["densities"]) == 2


def test_conserved_verify_seeded(capsys):
    a = call(capsys, "conserved", "verify", "--n", "3", "--seed", "7")[1]
    b = call(capsys, "conserved", "verify", "--n", "3", "--seed", "7")[1]
    assert a == b
    rows = list(csv.DictReader(io.StringIO(a)))
    assert all(r["boussinesq_exact"] == "1" and r["first_order_exact"] == "1" for r in rows)


def test_deform(capsys):
    code, out, _ = call(capsys, "deform", "--index", "3")
    body = json.loads(out)
    assert code == 0 and body["index"] == 3
    assert "sigma" in body["F1"]["text"]


def test_involution(capsys):
    code, out, _ = call(capsys, "deform", "involution", "--max", "5", "--format", "json")
    body = json.loads(out)
    assert code == 0 and body["all"] is True and len(body["rows"]) == 10


def test_hyper_area(capsys, tmp_path):
    code, out, _ = call(capsys, "--out", str(tmp_path), "hyper", "--r", "0.5")
    assert code == 0
    area = json.loads((tmp_path / "hyperbolicity_area.json").read_text())
    assert area["area"] == pytest.approx(area["area_quadrature"], abs=1e-8)
    rows = list(csv.DictReader(open(tmp_path / "hyperbolicity.csv")))
    assert len(rows) == 201


def test_hyper_fixed_g(capsys):
    code, out, _ = call(capsys, "hyper", "--r", "0.0", "--appendix-b", "--format", "json",
                        "--samples", "3")
    assert code == 0 and json.loads(out)["area"] == 0.0


def test_simple_wave(capsys):
    code, out, _ = call(capsys, "hyper", "simple-wave", "--start", "0.1,0.2", "--r", "0.3",
                        "--format", "json")
    body = json.loads(out)
    assert code == 0 and body["termination"] == "sigma_boundary"


def test_hodograph_run_columns(capsys):
    code, out, _ = call(capsys, "hodograph", "run", "--r", "0.05", "--t", "0:0.5:0.5",
                        "--nx", "5", "--method", "perturbative")
    assert code == 0
    table = out.split("{")[0]
    rows = list(csv.DictReader(io.StringIO(table)))
    assert list(rows[0])[:7] == ["t", "x", "xi", "sigma", "w", "u1", "u2"]
    assert len(rows) == 10
    x0 = float(rows[0]["x"])
    assert float(rows[0]["xi"]) == pytest.approx(np.sqrt(1 - x0) / np.sqrt(3) + 0.05 / 9 * (x0 + 8),
                                                 abs=1e-10)


def test_hodograph_curves(capsys):
    code, out, _ = call(capsys, "hodograph", "curves", "--kind", "space", "--levels", "0.5",
                        "--samples", "11")
    assert code == 0 and out.startswith("level,xi,sigma")


def test_sim_run_from_file(capsys, tmp_path):
    x = np.linspace(0, 1, 40, endpoint=False)
    ic = tmp_path / "ic.csv"
    with open(ic, "w") as f:
        f.write("x,xi,sigma\n")
        for xv in x:
            f.write(f"{float(xv)!r},{float(0.1 * np.sin(2 * np.pi * xv))!r},0.05\n")
    out_dir = tmp_path / "run"
    code, out, err = call(capsys, "--out", str(out_dir), "sim", "run", "--ic", str(ic),
                          "--T", "0.2", "--r", "0.05", "--snapshots", "0.1,0.2")
    assert code == 0, err
    rep = json.loads((out_dir / "drift_report.json").read_text())
    assert rep["times"] == [0.0, 0.1, 0.2]
    assert rep["max_drift"]["casimir_xi"] < 1e-14
    assert (out_dir / "snapshot_t0.200000.csv").exists()


def test_config_file_with_override(capsys, tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('command = "hyper"\nr = 0.3\nsamples = 3\nformat = "json"\n')
    code, out, _ = call(capsys, "--config", str(cfg))
    assert code == 0 and json.loads(out)["r"] == 0.3
    code, out, _ = call(capsys, "hyper", "--config", str(cfg), "--r", "0.5")
    assert code == 0 and json.loads(out)["r"] == 0.5
    jcfg = tmp_path / "c.json"
    jcfg.write_text(json.dumps({"command": "deform", "index": 4}))
    code, out, _ = call(capsys, "--config", str(jcfg))
    assert code == 0 and json.loads(out)["index"] == 4


@pytest.mark.parametrize("argv", [
    ["hyper", "--r", "1.5"],
    ["bogus"],
    ["conserved", "gen", "--n", "0"],
    ["hodograph", "run", "--t", "2:0:1"],
    ["sim", "run", "--ic", "/nonexistent.csv"],
    ["--config", "/nonexistent.toml"],
])
def test_usage_errors(capsys, argv):
    code, out, err = call(capsys, *argv)
    assert code == 2
    assert json.loads(err)["error"] == "usage"


def test_runtime_error_exit_code(capsys):
    code, _, err = call(capsys, "hyper", "simple-wave", "--start", "0.1,1.5")
    assert code == 1
    assert json.loads(err)["error"] == "ValueError"
