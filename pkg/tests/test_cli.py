import csv
import json
import math

import numpy as np
import pytest

from curlgap import cli, special
from curlgap.config import ConfigError, DEFAULT_CONFIG, apply_overrides, load_config, parse_override
from curlgap.discretization import read_field_csv
from curlgap.radial import StepRadialPotential


def run(tmp_path, *args):
    return cli.main([*args, "-o", str(tmp_path)])


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_defaults_validate():
    cfg = load_config(None, (), "groundstate")
    assert cfg == DEFAULT_CONFIG


def test_parse_override():
    assert parse_override("grid.nr=32") == (["grid", "nr"], 32)
    assert parse_override("problem.mode=defocusing") == (["problem", "mode"], "defocusing")
    assert parse_override('periodic.values=[1, 2]') == (["periodic", "values"], [1, 2])
    with pytest.raises(ConfigError):
        parse_override("grid.nr")
    with pytest.raises(ConfigError):
        apply_overrides({"grid": 3}, ["grid.nr=2"])


def test_file_merge_and_override(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"grid": {"nr": 10}, "problem": {"potential": {"kind": "constant",
                                                                          "value": 2.0}}}))
    cfg = load_config(path, ["grid.nz=12"])
    assert cfg["grid"] == {"r_max": 12.0, "z_half": 12.0, "nr": 10, "nz": 12}
    assert cfg["problem"]["potential"] == {"kind": "constant", "value": 2.0}
    assert cfg["problem"]["p"] == 3.0


@pytest.mark.parametrize("override", ["grid.nr=1", "problem.mode=sideways", "bands.count=0",
                                      "radial_design.mu0_fraction=1", "unknown.key=1", "grid.r_max=-2"])
def test_schema_errors_exit_1(tmp_path, override, capsys):
    assert run(tmp_path, "bands", "--set", override) == cli.EXIT_CONFIG
    assert "curlgap:" in capsys.readouterr().err


def test_malformed_json_exit_1(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["bands", "-c", str(bad)]) == cli.EXIT_CONFIG


def test_bands_kronig_penney(tmp_path):
    assert run(tmp_path, "bands", "--require-gap") == 0
    rows = _rows(tmp_path / "bands.csv")
    assert rows[0] == ["k", "nu_lo", "nu_hi"] and len(rows) == 9
    report = json.loads((tmp_path / "bands_report.json").read_text())
    assert report["first_gap_open"]
    assert float(rows[1][1]) == report["edges"][0]


def test_bands_free_contiguous(tmp_path):
    args = ["--set", "periodic.values=[0]", "--set", "periodic.breakpoints=[0]"]
    assert run(tmp_path, "bands", *args) == 0
    report = json.loads((tmp_path / "bands_report.json").read_text())
    assert not any(g["open"] for g in report["gaps"])
    assert run(tmp_path, "bands", "--require-gap", *args) == cli.EXIT_HYPOTHESIS


def test_design_and_spectrum_round_trip(tmp_path):
    assert run(tmp_path, "design") == 0
    design = json.loads((tmp_path / "design.json").read_text())
    cert = json.loads((tmp_path / "certificate.json").read_text())
    assert cert["certified"] and cert["margin"] > 0
    assert design["certificate"] == cert
    assert run(tmp_path, "spectrum", "--design", str(tmp_path / "design.json")) == 0
    spec = json.loads((tmp_path / "spectrum.json").read_text())
    assert spec["margin"] == pytest.approx(cert["margin"], rel=1e-12)
    assert [c["ok"] for c in spec["certificate"]["chain"]] == [True] * 4


def test_design_winf_too_small(tmp_path, capsys):
    assert run(tmp_path, "design", "--set", "radial_design.winf=-100") == cli.EXIT_HYPOTHESIS
    assert "−ν_1 < W_∞" in capsys.readouterr().err


def test_curves_step_well(tmp_path):
    assert run(tmp_path, "curves", "--set", "curves.samples=5000") == 0
    rows = _rows(tmp_path / "curves.csv")[1:]
    assert len(rows) == 5000
    report = json.loads((tmp_path / "curves_report.json").read_text())
    pole, zero = report["poles"][0], report["zeros"][0]
    assert pole == pytest.approx(3.390, abs=1e-3) and zero == pytest.approx(14.682, abs=1e-3)
    mu = np.array([float(r[0]) for r in rows])
    g = np.array([float(r[1]) if r[1] else np.nan for r in rows])
    h = np.array([float(r[2]) for r in rows])
    assert np.all((h > -1) & (h < 0))
    inside = (mu > pole) & (mu < zero)
    diff = (g - h)[inside]
    assert np.count_nonzero(np.diff(np.sign(diff))) == 1
    assert pole < report["eigenvalue"] < zero


def test_curves_pole_cell_empty(tmp_path):
    j1p = special.j1_prime_zeros(1)[0]
    n, width = 10, 20.0
    mu_first = 0.5 * width / n
    pot = StepRadialPotential(0.0, width, j1p / math.sqrt(mu_first))
    rows = cli.curve_samples(pot, n)
    assert rows[0][1] is None
    path = cli.write_csv(tmp_path / "c.csv", ["mu", "g", "h"], rows)
    first = _rows(path)[1]
    assert first[1] == "" and first[2] != ""
    assert cli._fmt(float("nan")) == "" and cli._fmt(None) == ""


def test_groundstate_focusing(tmp_path):
    assert run(tmp_path, "groundstate", "--set", "grid.nr=32", "--set", "grid.nz=32",
               "--set", "solver.starts=2") == 0
    result = json.loads((tmp_path / "result.json").read_text())
    assert result["converged"] and result["nontrivial"]
    assert result["relative_el_residual"] <= 1e-6
    u = read_field_csv(tmp_path / "field.csv")
    assert u.grid.shape == (32, 32)
    assert np.isfinite(u.values).all()


def test_groundstate_defocusing(tmp_path):
    args = ["--set", "problem.mode=defocusing", "--set", "problem.p=2",
            "--set", 'problem.potential={"kind": "constant", "value": -1}',
            "--set", 'problem.gamma={"kind": "power", "coefficient": -1, "exponent": 3}',
            "--set", "grid.r_max=8", "--set", "grid.z_half=8",
            "--set", "grid.nr=32", "--set", "grid.nz=32"]
    assert run(tmp_path, "groundstate", *args) == 0
    result = json.loads((tmp_path / "result.json").read_text())
    assert result["energy"] < 0 and result["converged"]


def test_groundstate_mode_mismatch_exit_2(tmp_path):
    assert run(tmp_path, "groundstate", "--set", "problem.mode=defocusing") == cli.EXIT_HYPOTHESIS


def test_groundstate_nonconvergence_exit_3(tmp_path):
    args = ["--set", "solver.max_iter=2", "--set", "solver.starts=0",
            "--set", "grid.nr=24", "--set", "grid.nz=24"]
    assert run(tmp_path, "groundstate", *args) == cli.EXIT_NONCONVERGENCE


def test_thread_limit_env(tmp_path, monkeypatch):
    monkeypatch.setenv("CURLGAP_THREADS", "x")
    assert run(tmp_path, "bands") == cli.EXIT_CONFIG
    monkeypatch.setenv("CURLGAP_THREADS", "1")
    assert run(tmp_path, "bands") == 0


def test_winf_alternatives(tmp_path):
    cfg = load_config(None, ["radial_design.winf=-3"])
    assert "winf_offset" not in cfg["radial_design"] and cfg["radial_design"]["winf"] == -3
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"radial_design": {"winf": -3.0}}))
    assert "winf_offset" not in load_config(path)["radial_design"]
