import csv
import io
import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

import specx.cli as cli
import specx.coefficients as cf
import specx.localization as lz
from specx.config import RunConfig, parse_config
from specx.errors import ConstraintViolation, NotConverged, ParseError, UnknownId
from specx.spectral_sets import SpectralSet

S13, S29 = math.sqrt(13), math.sqrt(29)

TWO_BODY = """
schema: 1
model:
  variant: two_body
  params: {potential: {0: -3.0}}
"""

SPARSE = """
model:
  variant: sparse_klaus
  params: {profiles: [{0: -3.0}, {0: 5.0}]}
oracle: {sizes: [20000]}
"""

WARPED = """
model:
  variant: warped_periodic
  params: {table: [0.0, 3.0], warp: identity}
"""

NBODY_FREE = """
model:
  variant: grassmann_nbody
  params: {interactions: []}
oracle: {sizes: [40]}
"""

TORUS = """
torus: {sizes: [16], operator: random, seed: 3}
"""


def write(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run_main(tmp_path, command, text, *extra):
    out = tmp_path / "out.json"
    rc = cli.main([command, "--config", write(tmp_path, text), "--out", str(out), *extra])
    return rc, (out.read_text() if out.exists() else None)


# -- parse_config ---------------------------------------------------------------------------

def test_parse_minimal_two_body():
    cfg = parse_config(TWO_BODY)
    assert isinstance(cfg, RunConfig)
    assert cfg.model.variant == "two_body" and cfg.model.hopping == {1: 1.0}
    assert cfg.oracle.sizes == (1000, 4000) and cfg.oracle.essential_only
    assert cfg.tolerances.limit_tol > 0 and cfg.tolerances.merge_gap is None
    assert cfg.torus.sizes == (16,)


def test_parse_negative_tolerance():
    with pytest.raises(ConstraintViolation):
        parse_config(TWO_BODY + "tolerances: {limit_tol: -1.0e-6}\n")
    with pytest.raises(ConstraintViolation):
        parse_config(TWO_BODY + "oracle: {tolerance: 0}\n")


def test_parse_sqrtshift_resolves():
    cfg = parse_config(WARPED.replace("identity", "sqrtshift"))
    w = cf.WarpedPeriodic(cfg.model.params["table"], cfg.model.params["warp"]).warp
    x = np.arange(-1000, 1001)
    assert np.array_equal(w(x), x + np.floor(np.sqrt(1 + np.abs(x))).astype(np.int64))


@pytest.mark.parametrize("text, err", [
    ("model: [1, 2", ParseError),
    ("model: {variant: two_body}\nextra: 1\n", ParseError),
    ("model: {variant: two_body, params: {potential: {0: x}}}\n", ConstraintViolation),
    ("model: {variant: four_body}\n", UnknownId),
    ("model: {variant: warped_periodic, params: {warp: spiral}}\n", UnknownId),
    ("model: {variant: sparse_klaus, params: {schedule: fibonacci}}\n", UnknownId),
    ("model: {variant: slowly_oscillating, params: {expr: tanh}}\n", UnknownId),
    ("torus: {operator: magic}\n", UnknownId),
    ("model: {variant: two_body}\noracle: {sizes: [4000, 1000]}\n", ConstraintViolation),
    ("model: {variant: two_body}\noracle: {metric: sup}\n", UnknownId),
    ("schema: 2\n", ConstraintViolation),
])
def test_parse_errors(text, err):
    with pytest.raises(err):
        parse_config(text)


def test_parse_error_has_location():
    with pytest.raises(ParseError) as exc:
        parse_config("model:\n  variant: two_body\n  hopping: {1: [\n")
    assert "line" in str(exc.value)


# -- commands -------------------------------------------------------------------------------

def test_ess_spec_two_body(tmp_path):
    rc, text = run_main(tmp_path, "ess-spec", TWO_BODY)
    assert rc == 0
    rep = json.loads(text)
    assert rep["essential_spectrum"] == {"intervals": [[-2.0, 2.0]], "points": []}
    assert abs(rep["spectrum"]["points"][0] + S13) < 1e-10
    assert rep["schema"] == cli.REPORT_SCHEMA and rep["command"] == "ess-spec"


def test_ess_spec_sparse_and_warped(tmp_path):
    rep = json.loads(run_main(tmp_path, "ess-spec", SPARSE)[1])
    ess = SpectralSet.from_dict(rep["essential_spectrum"])
    assert ess.intervals == ((-2.0, 2.0),)
    assert np.allclose(ess.points, [-S13, S29], atol=1e-10)
    rep = json.loads(run_main(tmp_path, "ess-spec", WARPED)[1])
    ess = SpectralSet.from_dict(rep["essential_spectrum"])
    assert np.allclose(ess.intervals, [(-1.0, 0.0), (3.0, 4.0)], atol=1e-9)


def test_compare_two_body_passes(tmp_path):
    rc, text = run_main(tmp_path, "compare", TWO_BODY)
    rep = json.loads(text)
    assert rc == 0 and [e["N"] for e in rep["oracle"]] == [1000, 4000]
    assert rep["verdict"]["pass"] and rep["verdict"]["value"] < 1e-3
    assert all(e["retained"] + e["boundary_removed"] + e["bound_removed"] == e["total"]
               for e in rep["oracle"])


def test_finite_section_size_override(tmp_path):
    rc, text = run_main(tmp_path, "finite-section", TWO_BODY, "--size", "300")
    rep = json.loads(text)
    assert rc == 0 and rep["N"] == 300 and rep["total"] == 300


def test_torus_lab_z16(tmp_path):
    rc, text = run_main(tmp_path, "torus-lab", TORUS)
    rep = json.loads(text)
    assert rc == 0 and rep["pass"]
    (g,) = rep["groups"]
    assert g["M"] == 16 and g["inversion_error"] < 1e-10


def test_hvz_no_interactions(tmp_path):
    rc, text = run_main(tmp_path, "hvz", NBODY_FREE)
    rep = json.loads(text)
    assert rc == 0
    assert rep["hvz_spectrum"] == {"intervals": [[-4.0, 4.0]], "points": []}
    assert rep["oracle"][0]["distances"]["hausdorff"] <= 0.2 and rep["verdict"]["pass"]


def test_landstad_check(tmp_path):
    rc, text = run_main(tmp_path, "landstad-check", "torus: {sizes: [32, 64]}\n")
    rep = json.loads(text)
    assert rc == 0 and rep["pass"] and rep["smallest_decreasing"]
    assert rep["compactness"]["localized_projector"]["value"] < 0.2
    assert rep["compactness"]["shift"]["tail_position"] == pytest.approx(1.0)


# -- exit codes -----------------------------------------------------------------------------

@pytest.mark.parametrize("command, text, extra, code", [
    ("ess-spec", "model: {variant: two_body\n", (), cli.EXIT_CONFIG),
    ("ess-spec", "tolerances: {limit_tol: -1}\n", (), cli.EXIT_CONFIG),
    ("ess-spec", "model: {variant: warped_periodic, params: {warp: spiral}}\n", (), cli.EXIT_CONFIG),
    ("ess-spec", TORUS, (), cli.EXIT_CONFIG),
    ("hvz", TWO_BODY, (), cli.EXIT_CONFIG),
    ("finite-section", TWO_BODY, ("--size", "2000000"), cli.EXIT_INFEASIBLE),
    ("hvz", NBODY_FREE, ("--size", "80"), cli.EXIT_INFEASIBLE),
])
def test_exit_codes(tmp_path, capsys, command, text, extra, code):
    rc, text_out = run_main(tmp_path, command, text, *extra)
    assert rc == code and text_out is None
    assert capsys.readouterr().err.startswith("specx: ")


def test_exit_code_not_converged(tmp_path, monkeypatch):
    def fail(*args, **kwargs):
        raise NotConverged({"kind": "plus"}, 1.0)

    monkeypatch.setattr(lz, "essential_spectrum_report", fail)
    rc, _ = run_main(tmp_path, "ess-spec", TWO_BODY)
    assert rc == cli.EXIT_NOT_CONVERGED


def test_missing_config_file(tmp_path):
    assert cli.main(["ess-spec", "--config", str(tmp_path / "nope.yaml")]) == cli.EXIT_CONFIG


# -- output ---------------------------------------------------------------------------------

def _strip_timestamp(text):
    rep = json.loads(text)
    rep.pop("timestamp")
    return rep


def test_json_deterministic(tmp_path):
    a = run_main(tmp_path, "ess-spec", SPARSE)[1]
    b = run_main(tmp_path, "ess-spec", SPARSE)[1]
    assert _strip_timestamp(a) == _strip_timestamp(b)
    ja = [l for l in a.splitlines() if '"timestamp"' not in l]
    jb = [l for l in b.splitlines() if '"timestamp"' not in l]
    assert ja == jb


def test_source_date_epoch_makes_bytes_identical(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    a = run_main(tmp_path, "torus-lab", TORUS)[1]
    b = run_main(tmp_path, "torus-lab", TORUS)[1]
    assert a == b and '"timestamp": "2023-11-14T22:13:20Z"' in a


def test_json_floats_round_trip(tmp_path):
    direct = cli.run("ess-spec", parse_config(SPARSE)).report["essential_spectrum"]
    rep = json.loads(run_main(tmp_path, "ess-spec", SPARSE)[1])
    assert rep["essential_spectrum"] == direct
    assert SpectralSet.from_dict(rep["essential_spectrum"]) == SpectralSet.from_dict(direct)


def test_plain_handles_non_finite():
    assert cli._plain({"a": np.float64("inf"), "b": [np.nan, -np.inf], "c": np.int64(3)}) == \
        {"a": "inf", "b": ["nan", "-inf"], "c": 3}


def test_csv_output(tmp_path):
    out = tmp_path / "out.csv"
    rc = cli.main(["ess-spec", "--config", write(tmp_path, SPARSE), "--out", str(out), "--csv"])
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert rc == 0 and rows[0] == ["series", "kind", "lo", "hi"]
    ess = [r for r in rows[1:] if r[0] == "essential_spectrum"]
    assert ["essential_spectrum", "interval", "-2.0", "2.0"] in ess
    direct = cli.run("ess-spec", parse_config(SPARSE)).report["essential_spectrum"]
    assert float([r for r in ess if r[1] == "point"][0][2]) == direct["points"][0]


def test_output_path_from_config(tmp_path):
    target = tmp_path / "sub" / "report.json"
    cfg = TORUS + f"output: {{json: '{target}'}}\n"
    assert cli.main(["torus-lab", "--config", write(tmp_path, cfg)]) == 0
    assert json.loads(target.read_text())["command"] == "torus-lab"


def test_atomic_write_leaves_no_temp_files(tmp_path):
    target = tmp_path / "a.json"
    target.write_text("old")
    cli.atomic_write(str(target), "new")
    assert target.read_text() == "new"
    assert os.listdir(tmp_path) == ["a.json"]


def test_atomic_write_keeps_old_file_on_failure(tmp_path, monkeypatch):
    target = tmp_path / "a.json"
    target.write_text("old")

    def boom(src, dst):
        raise OSError("disk full")

    monkeypatch.setattr(cli.os, "replace", boom)
    with pytest.raises(OSError):
        cli.atomic_write(str(target), "new")
    assert target.read_text() == "old" and os.listdir(tmp_path) == ["a.json"]


def test_stdout_and_module_entry(tmp_path):
    path = write(tmp_path, TORUS)
    proc = subprocess.run([sys.executable, "-m", "specx", "torus-lab", "--config", path],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["pass"]
