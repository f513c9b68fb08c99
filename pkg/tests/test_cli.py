import json
import math
import subprocess
import sys

import pytest

from acoustic_lens import export
from acoustic_lens.cli import OUTPUT_ENV, main
from acoustic_lens.geodesic import ConservedCharges, trace, turning_point
from acoustic_lens.lensing import deflection_exact, deflection_series, lens_solve
from acoustic_lens.metric import AcousticMetric
from acoustic_lens.units import PhysicalParams, derive_scales


@pytest.fixture
def outdir(tmp_path, monkeypatch):
    monkeypatch.delenv(OUTPUT_ENV, raising=False)
    return tmp_path / "out"


def parse_stdout(text):
    values = {}
    for line in text.splitlines():
        if ": " in line:
            key, rest = line.split(": ", 1)
            try:
                values[key] = float(rest.split()[0])
            except ValueError:
                values[key] = rest
    return values


def test_deflect(outdir, capsys):
    assert main(["deflect", "--c0", "1", "--b", "10", "--output-dir", str(outdir)]) == 0
    vals = parse_stdout(capsys.readouterr().out)
    assert vals["exact"] == deflection_exact(1.0, 10.0)
    assert vals["series"] == deflection_series(1.0, 10.0)
    assert vals["series"] == pytest.approx(0.0235619, abs=1e-7)
    assert vals["abs_error"] == abs(vals["exact"] - vals["series"])
    assert vals["turning_point"] == turning_point(1.0, 10.0)
    cols = export.read_csv(outdir / "deflection.csv")
    assert list(cols) == ["b", "deflection_exact", "deflection_series", "abs_error", "focal_length"]
    assert cols["deflection_exact"] == [deflection_exact(1.0, 10.0)]


def test_deflect_degrees_is_display_only(outdir, capsys):
    assert main(["deflect", "--b", "10", "--degrees", "--output-dir", str(outdir)]) == 0
    vals = parse_stdout(capsys.readouterr().out)
    assert vals["exact"] == pytest.approx(math.degrees(deflection_exact(1.0, 10.0)), rel=1e-15)
    assert export.read_csv(outdir / "deflection.csv")["deflection_exact"] == [deflection_exact(1.0, 10.0)]


def test_scales_defaults(outdir, capsys):
    assert main(["scales", "--output-dir", str(outdir)]) == 0
    vals = parse_stdout(capsys.readouterr().out)
    s = derive_scales(PhysicalParams())
    assert vals["healing_length"] == s.healing_length
    assert vals["sound_speed"] == s.sound_speed
    assert vals["focal_length"] == pytest.approx(20.3e-6, rel=1e-2)
    assert vals["max_deflection"] == pytest.approx(0.589, abs=1e-3)
    assert (outdir / "scales.csv").exists()


def test_scales_flags_and_params_file(outdir, tmp_path, capsys):
    params = tmp_path / "p.json"
    params.write_text(json.dumps({"density_per_m2": 1e12}))
    assert main(["scales", "--params", str(params), "--output-dir", str(outdir)]) == 0
    vals = parse_stdout(capsys.readouterr().out)
    assert vals["healing_length"] == derive_scales(PhysicalParams(density=1e12)).healing_length
    assert main(["scales", "--params", str(params), "--density", "4e12", "--output-dir", str(outdir)]) == 0
    vals = parse_stdout(capsys.readouterr().out)
    assert vals["healing_length"] == derive_scales(PhysicalParams(density=4e12)).healing_length


def test_trace_captured(outdir, capsys):
    assert main(["trace", "--c0", "1", "--b", "1.5", "--output-dir", str(outdir)]) == 0
    out = capsys.readouterr().out
    assert "classification: Captured" in out
    header = (outdir / "trajectory.csv").read_text().splitlines()[0]
    assert header == "lambda,r,phi,x,y,dr_dlambda"


def test_trace_json_metadata(outdir, capsys):
    assert main(["trace", "--b", "3", "--format", "json", "--output-dir", str(outdir)]) == 0
    doc = json.loads((outdir / "trajectory.json").read_text())
    meta = doc["metadata"]
    lib = trace(AcousticMetric(1.0), ConservedCharges.from_impact_parameter(3.0))
    assert meta["classification"] == "Deflected"
    assert meta["swept_angle"] == lib.swept_angle
    assert meta["null_residual_max"] == lib.conservation_residual_max
    assert "timestamp" not in meta
    assert set(doc["samples"][0]) == {"lambda", "r", "phi", "x", "y", "dr_dlambda"}
    assert len(doc["samples"]) == len(lib.samples)
    assert "far_field_correction" in capsys.readouterr().out


def test_trace_options(outdir, capsys):
    assert main(["trace", "--b", "10", "--r-start", "1e4", "--rel-tol", "1e-9", "--with-tau", "--output-dir", str(outdir)]) == 0
    vals = parse_stdout(capsys.readouterr().out)
    assert vals["b_over_r_start"] == 1e-3
    assert vals["deflection"] == pytest.approx(deflection_exact(1, 10), abs=1e-6)
    assert "tau" in (outdir / "trajectory.csv").read_text().splitlines()[0]


def test_timestamp_only_on_request(outdir):
    assert main(["lens", "--dl", "100", "--ds", "1000", "--timestamp", "--output-dir", str(outdir)]) == 0
    assert "timestamp" in json.loads((outdir / "lens.json").read_text())["metadata"]


def test_byte_identical_reruns(tmp_path, monkeypatch):
    monkeypatch.delenv(OUTPUT_ENV, raising=False)
    for fmt in ("csv", "json"):
        blobs = []
        for i in range(2):
            d = tmp_path / f"{fmt}{i}"
            assert main(["sweep", "--b-min", "3", "--b-max", "50", "--count", "7", "--log", "--jobs", "2", "--format", fmt, "--output-dir", str(d)]) == 0
            assert main(["trace", "--b", "4", "--format", fmt, "--output-dir", str(d)]) == 0
            blobs.append(sorted((p.name, p.read_bytes()) for p in d.iterdir()))
        assert blobs[0] == blobs[1]


def test_lens(outdir, capsys):
    assert main(["lens", "--c0", "1", "--dl", "100", "--ds", "1000", "--output-dir", str(outdir)]) == 0
    doc = json.loads((outdir / "lens.json").read_text())
    g = lens_solve(1, 100, 1000)
    assert doc["b_solved"] == g.b_solved
    assert doc["image_angles"] == [g.theta_E, -g.theta_E]


def test_lens_no_solution(outdir, capsys):
    assert main(["lens", "--dl", "0.1", "--ds", "0.2", "--output-dir", str(outdir)]) == 1
    assert "no lensing solution" in capsys.readouterr().err


def test_curvature_and_potential(outdir, capsys):
    assert main(["curvature", "--c0", "1", "--r-min", "1", "--r-max", "2", "--count", "2", "--output-dir", str(outdir)]) == 0
    cols = export.read_csv(outdir / "curvature.csv")
    assert cols["kretschmann"] == [44.0, 0.171875]
    assert cols["ricci_scalar"] == [2.0, 0.125]
    assert cols["warp_factor"] == [0.0, 0.75]
    assert main(["potential", "--c0", "1", "--L", "1", "--r-min", "1", "--r-max", "3", "--count", "5", "--format", "json", "--output-dir", str(outdir)]) == 0
    doc = json.loads((outdir / "potential.json").read_text())
    assert doc["metadata"]["r_m"] == math.sqrt(2)
    assert doc["metadata"]["V_m"] == 0.125
    assert doc["rows"][0] == {"r": 1.0, "V": 0.0}


def test_sweep_and_plots(outdir, capsys):
    assert main(["sweep", "--b-min", "2.5", "--b-max", "100", "--count", "6", "--log", "--plots", "--output-dir", str(outdir)]) == 0
    cols = export.read_csv(outdir / "sweep.csv")
    assert cols["b"][0] == 2.5 and cols["b"][-1] == pytest.approx(100.0, rel=1e-15)
    assert cols["deflection_exact"] == [deflection_exact(1.0, b) for b in cols["b"]]
    assert (outdir / "deflection_sweep.svg").read_text().lstrip().startswith("<?xml")
    assert main(["trace", "--b", "3", "--plots", "--output-dir", str(outdir)]) == 0
    assert "<svg" in (outdir / "trajectory.svg").read_text()


def test_env_output_dir_and_flag_precedence(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
    assert main(["deflect", "--b", "10"]) == 0
    assert (tmp_path / "env" / "deflection.csv").exists()
    assert main(["deflect", "--b", "10", "--output-dir", str(tmp_path / "flag")]) == 0
    assert (tmp_path / "flag" / "deflection.csv").exists()


def test_config_file(tmp_path, outdir, capsys, monkeypatch):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"c0": 2.0, "format": "json", "output_dir": str(outdir), "integrator": {"rel_tol": 1e-9}}))
    assert main(["deflect", "--b", "20", "--config", str(cfg)]) == 0
    doc = json.loads((outdir / "deflection.json").read_text())
    assert doc["rows"][0]["deflection_exact"] == deflection_exact(2.0, 20.0)
    # flags override the file
    assert main(["deflect", "--b", "20", "--c0", "1", "--config", str(cfg)]) == 0
    doc = json.loads((outdir / "deflection.json").read_text())
    assert doc["rows"][0]["deflection_exact"] == deflection_exact(1.0, 20.0)


@pytest.mark.parametrize(
    "doc, field",
    [
        ({"c0": -1}, "c0"),
        ({"format": "xml"}, "format"),
        ({"integrator": {"rel_tol": "tight"}}, "integrator.rel_tol"),
        ({"integrator": {"bogus": 1}}, "integrator.bogus"),
        ({"physical": {"g_tilde": 0}}, "g_tilde"),
        ({"colour": "red"}, "colour"),
        ({"emit_plots": "yes"}, "emit_plots"),
    ],
)
def test_invalid_config_exit_2(tmp_path, capsys, doc, field):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps(doc))
    assert main(["deflect", "--b", "10", "--config", str(cfg)]) == 2
    assert field in capsys.readouterr().err


def test_missing_or_malformed_config(tmp_path, capsys):
    assert main(["deflect", "--b", "10", "--config", str(tmp_path / "nope.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["deflect", "--b", "10", "--config", str(bad)]) == 2
    assert "config" in capsys.readouterr().err


def test_usage_errors_exit_2(capsys):
    assert main([]) == 2
    assert main(["orbit"]) == 2
    assert main(["deflect"]) == 2
    assert main(["deflect", "--b", "ten"]) == 2


def test_domain_errors_exit_1(outdir, capsys):
    assert main(["deflect", "--b", "1", "--output-dir", str(outdir)]) == 1
    assert "not above 2 c0" in capsys.readouterr().err
    assert main(["curvature", "--r-min", "-1", "--output-dir", str(outdir)]) == 1


def test_nonconvergence_exit_1(outdir, capsys):
    assert main(["trace", "--b", "10", "--max-steps", "5", "--output-dir", str(outdir)]) == 1
    assert "numerical error" in capsys.readouterr().err
    assert (outdir / "trajectory.csv").exists()
    assert main(["deflect", "--b", "2.000000000000002", "--quad-tol", "1e-15", "--output-dir", str(outdir)]) == 1
    assert "achieved error estimate" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "acoustic_lens", "deflect", "--b", "10", "--output-dir", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "series: 0.023561944901923" in proc.stdout
