"""Experiment runner tests: config handling, determinism, manifest, CLI."""

import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

from cavitybloch.experiments import (
    ConfigError,
    ExperimentConfig,
    load_config,
    parse_override,
    run_experiment,
)

FAST_CUSTOM = {
    "v0": 0.2, "force": 0.01, "t_final": 5.0, "dt": 2e-3,
    "n_cells": 16, "n_points": 256, "observer_stride": 250,
    "snapshot_stride": 1000, "width_x2": 20.0,
}


def _fast_config(out_dir, **extra):
    overrides = dict(FAST_CUSTOM)
    overrides.update(extra)
    return ExperimentConfig("custom", out_dir=out_dir, figures=False,
                            overrides=overrides)


def test_defaults_fig2():
    s = ExperimentConfig("fig2").resolved()
    assert s["delta0"] == 0.0
    assert s["v0"] == 0.2
    assert s["force"] == 0.005
    assert s["width_x2"] == 50.0
    assert s["internal"] == "minus"
    assert s["k0"] == 0.0


def test_defaults_fig6():
    s = ExperimentConfig("fig6").resolved()
    assert s["delta0"] == -1.0
    assert s["internal"] == "plus"
    assert s["k0"] == -0.5
    assert s["force_values"] == [0.002, 0.004, 0.006, 0.008, 0.010,
                                 0.012, 0.014, 0.016, 0.018, 0.020]


def test_defaults_fig10():
    s = ExperimentConfig("fig10").resolved()
    assert s["v0"] == 0.5
    assert s["force"] == 0.02
    assert s["delta0"] == 0.0
    assert s["width_x2"] == 50.0
    assert [round(1.0 / k) for k in s["kappa_values"]] == [250, 500, 1000]


def test_fig8_desk_scale_keeps_regime():
    full = ExperimentConfig("fig8").resolved()
    desk = ExperimentConfig("fig8", desk_scale=True).resolved()
    assert full["delta0"] / full["v0"] == desk["delta0"] / desk["v0"] == 8.0
    assert desk["n_points"] < full["n_points"]


def test_unknown_experiment_rejected():
    with pytest.raises(ConfigError):
        ExperimentConfig("fig99").resolved()


def test_unknown_override_rejected():
    with pytest.raises(ConfigError):
        ExperimentConfig("fig2", overrides={"bogus": 1.0}).resolved()


def test_config_file_empty_overrides_gives_defaults(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[experiment]\nid = fig2\n")
    cfg = load_config(path)
    assert cfg.experiment == "fig2"
    assert cfg.resolved()["force"] == 0.005


def test_config_file_force_override_reproduces_fig3(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[experiment]\nid = fig2\n\n[overrides]\nforce = 0.015\n")
    s = load_config(path).resolved()
    ref = ExperimentConfig("fig3").resolved()
    for key in ("v0", "delta0", "force", "width_x2", "t_final"):
        assert s[key] == ref[key]


def test_config_file_malformed_line_reports_location(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[experiment]\nid = fig2\n[overrides]\nnot a pair\n")
    with pytest.raises(ConfigError) as err:
        load_config(path)
    assert "line" in str(err.value) or "4" in str(err.value)


def test_config_file_unknown_key(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[overrides]\nwobble = 3\n")
    with pytest.raises(ConfigError, match="wobble"):
        load_config(path, experiment="fig2")


def test_parse_override_types():
    assert parse_override("force=0.01") == ("force", 0.01)
    assert parse_override("n_points=512") == ("n_points", 512)
    key, val = parse_override("kappa_values=0.004,0.002")
    assert key == "kappa_values" and val == [0.004, 0.002]
    with pytest.raises(ConfigError):
        parse_override("force")
    with pytest.raises(ConfigError):
        parse_override("force=abc")


def test_run_is_deterministic_byte_identical(tmp_path):
    digests = []
    for sub in ("a", "b"):
        manifest = run_experiment(_fast_config(tmp_path / sub))
        files = {}
        for entry in manifest.files:
            data = (manifest.out_dir / entry["path"]).read_bytes()
            files[entry["path"]] = hashlib.sha256(data).hexdigest()
        digests.append(files)
    assert digests[0] == digests[1]


def test_manifest_hashes_match_files(tmp_path):
    manifest = run_experiment(_fast_config(tmp_path))
    listed = json.loads((manifest.out_dir / "manifest.json").read_text())
    assert listed["experiment"] == "custom"
    assert len(listed["files"]) == 3            # trajectory + two densities
    for entry in listed["files"]:
        data = (manifest.out_dir / entry["path"]).read_bytes()
        assert hashlib.sha256(data).hexdigest() == entry["sha256"]
        assert len(data) == entry["bytes"]


def test_trajectory_csv_layout(tmp_path):
    manifest = run_experiment(_fast_config(tmp_path))
    lines = (manifest.out_dir / "custom_trajectory.csv").read_text().splitlines()
    assert lines[0].startswith("# {")
    meta = json.loads(lines[0][2:])
    assert meta["force"] == 0.01
    header = lines[1].split(",")
    assert header[:4] == ["t", "sigma_z", "x_mean", "norm"]
    assert "p_band1" in header
    first = [float(tok) for tok in lines[2].split(",")]
    assert first[0] == 0.0
    assert first[1] == pytest.approx(-1.0, abs=1e-9)


def test_figures_rendered_when_enabled(tmp_path):
    cfg = _fast_config(tmp_path)
    cfg.figures = True
    manifest = run_experiment(cfg)
    names = [f["path"] for f in manifest.files]
    assert "custom.png" in names


def test_bloch_run_records_band_populations(tmp_path):
    manifest = run_experiment(_fast_config(tmp_path))
    traj = manifest.results["trajectory"]
    assert traj.band_pops.shape[1] == 3
    assert traj.band_pops[0].sum() == pytest.approx(1.0, abs=0.05)


def test_upper_state_populated_only_near_crossing(tmp_path):
    # moderate positive detuning: between crossings the packet returns
    # to the lower internal state; near the zone-edge triple crossing
    # the upper state is transiently occupied
    cfg = ExperimentConfig("fig5", out_dir=tmp_path, figures=False,
                           overrides={"t_final": 520.0,
                                      "snapshot_stride": 0,
                                      "observer_stride": 2000})
    manifest = run_experiment(cfg)
    traj = manifest.results["trajectory"]
    t, inv = traj.t, traj.inversion
    crossing = 1.0 / 0.0025     # quasi momentum reaches the zone edge
    # the mixing zone extends ~ v0/F in time on either side of the crossing
    assert inv[t < crossing - 150].max() < -0.93
    assert inv[np.abs(t - crossing) < 20].max() > -0.6
    assert inv[-1] < -0.8       # recovering toward the lower state
    assert inv[-1] > -1.0


def test_cli_success_and_exit_codes(tmp_path):
    run = [sys.executable, "-m", "cavitybloch.cli"]
    ok = subprocess.run(
        run + ["run", "custom", "--out", str(tmp_path), "--no-figures"]
        + [arg for k, v in FAST_CUSTOM.items()
           for arg in ("--set", f"{k}={v}")],
        capture_output=True, text=True)
    assert ok.returncode == 0, ok.stderr
    assert "custom" in ok.stdout

    bad_id = subprocess.run(run + ["run", "fig99", "--out", str(tmp_path)],
                            capture_output=True, text=True)
    assert bad_id.returncode == 2

    bad_key = subprocess.run(
        run + ["run", "custom", "--out", str(tmp_path), "--set", "bogus=1"],
        capture_output=True, text=True)
    assert bad_key.returncode == 2

    bad_dt = subprocess.run(
        run + ["run", "custom", "--out", str(tmp_path), "--no-figures",
               "--set", "dt=0.5", "--set", "t_final=1.0"],
        capture_output=True, text=True)
    assert bad_dt.returncode == 3
