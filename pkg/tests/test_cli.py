import json

import numpy as np
import pytest

from radarcoex.channel import AugmentedRadarChannel, ChannelSet, save_channels
from radarcoex.cli import (
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_VALIDATION,
    cmd_project,
    cmd_simulate,
    cmd_validate,
    main,
    verify_manifest,
)

MINIMAL = {
    "L": 0, "M": 1, "K": 1, "n_t": 2, "n_r": 2, "d": [1],
    "users_of_bs": [[0]], "P_bs": [1.0], "W": [[1.0]],
    "seed": 3, "solver": {"outer_iters": 15},
}

RADAR = {
    "L": 1, "M": 1, "K": 2, "n_rad": 3, "n_t": 2, "n_r": 2,
    "d": [1, 1], "users_of_bs": [[0, 1]], "users_of_radar": [[0]],
    "P_bs": [4.0], "P_rad": 10.0, "sigma_th": 1.0,
    "W": [[1.0], [1.0]], "seed": 5, "solver": {"outer_iters": 15},
}


def write_scenario(tmp_path, doc, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def read_files(out_dir):
    return {p.name: p.read_bytes() for p in sorted(out_dir.iterdir())}


def test_simulate_single_trial_emits_three_files(tmp_path):
    scn = write_scenario(tmp_path, MINIMAL)
    manifest = cmd_simulate(str(scn), trials=1, seed0=0, out_dir=str(tmp_path / "out"))
    files = read_files(tmp_path / "out")
    assert set(files) == {"trace_trial0000.csv", "summary.csv", "manifest.json"}
    assert len(manifest.emitted_files) == 2  # manifest lists the CSVs
    verify_manifest(tmp_path / "out" / "manifest.json")


def test_simulate_rerun_is_byte_identical(tmp_path):
    scn = write_scenario(tmp_path, RADAR)
    cmd_simulate(str(scn), trials=2, seed0=9, out_dir=str(tmp_path / "out"))
    first = read_files(tmp_path / "out")
    cmd_simulate(str(scn), trials=2, seed0=9, out_dir=str(tmp_path / "out"))
    assert read_files(tmp_path / "out") == first


def test_simulate_serial_matches_parallel(tmp_path):
    scn = write_scenario(tmp_path, RADAR)
    cmd_simulate(str(scn), trials=4, seed0=0, out_dir=str(tmp_path / "serial"), workers=1)
    cmd_simulate(str(scn), trials=4, seed0=0, out_dir=str(tmp_path / "parallel"), workers=3)
    serial = read_files(tmp_path / "serial")
    parallel = read_files(tmp_path / "parallel")
    for name in serial:
        if name.endswith(".csv"):
            assert serial[name] == parallel[name]


def test_trace_columns(tmp_path):
    scn = write_scenario(tmp_path, RADAR)
    cmd_simulate(str(scn), trials=1, seed0=1, out_dir=str(tmp_path / "out"))
    header = (tmp_path / "out" / "trace_trial0000.csv").read_text().splitlines()[0]
    assert header.split(",") == [
        "iter", "objective", "usage_bs0", "usage_rad0",
        "kkt_residual", "slackness_residual", "dual_converged",
    ]


def test_validate_ok(tmp_path, capsys):
    scn = write_scenario(tmp_path, RADAR)
    assert cmd_validate(str(scn)) == EXIT_OK


def test_validate_rejects_bad_stream_count(tmp_path, capsys):
    doc = dict(MINIMAL)
    doc["d"] = [3]
    doc["W"] = [[1.0, 1.0, 1.0]]
    scn = write_scenario(tmp_path, doc)
    assert cmd_validate(str(scn)) == EXIT_VALIDATION
    assert "user 0" in capsys.readouterr().err


def test_validate_catches_equivalence_regression(tmp_path, monkeypatch):
    # corrupting one signal path must trip the dry-run guard
    import radarcoex.cli as cli_mod

    original = cli_mod.simulate_direct

    def corrupted(s, c, projs, blocks, sample):
        out = original(s, c, projs, blocks, sample)
        out.y[0] = out.y[0] + 1e-6
        return out

    monkeypatch.setattr(cli_mod, "simulate_direct", corrupted)
    scn = write_scenario(tmp_path, RADAR)
    assert cmd_validate(str(scn)) == EXIT_NUMERICAL


def test_main_exit_codes(tmp_path):
    scn = write_scenario(tmp_path, RADAR)
    assert main(["validate", "--scenario", str(scn)]) == EXIT_OK
    assert main(["validate", "--scenario", str(tmp_path / "missing.json")]) != EXIT_OK
    bad = write_scenario(tmp_path, {"M": 1}, name="bad.json")
    assert main(["validate", "--scenario", str(bad)]) == EXIT_VALIDATION


def test_missing_scenario_file_is_io_or_validation(tmp_path):
    rc = main(["simulate", "--scenario", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o")])
    assert rc != EXIT_OK


def _dump_for(tmp_path, H_radar_user0, n_r=2):
    """Channel dump for a 1-user, 1-radar, 1-BS scenario around a fixed radar matrix."""
    H = np.asarray(H_radar_user0, dtype=complex)
    n_rad = H.shape[1]
    doc = {
        "L": 1, "M": 1, "K": 1, "n_rad": n_rad, "n_t": 2, "n_r": n_r,
        "d": [1], "users_of_bs": [[0]], "users_of_radar": [[0]],
        "P_bs": [1.0], "P_rad": 10.0, "sigma_th": 1.0, "W": [[1.0]],
    }
    c = ChannelSet(
        H_radar=((H,),),
        H_bs=((np.zeros((n_r, 2), dtype=complex),),),
        seed_used=0,
    )
    dump = tmp_path / "channels.npz"
    save_channels(c, dump)
    return doc, dump


def test_project_zero_channels_identity(tmp_path):
    doc, dump = _dump_for(tmp_path, np.zeros((2, 3)))
    scn = write_scenario(tmp_path, doc)
    out = tmp_path / "proj.npz"
    cmd_project(str(scn), str(dump), str(out))
    with np.load(out) as data:
        assert np.allclose(data["P_rad0"], np.eye(3))
        assert data["leakage_rad0"] == pytest.approx(0.0)


def test_project_diagonal_mask(tmp_path):
    doc, dump = _dump_for(tmp_path, np.diag([3.0, 0.5]))
    scn = write_scenario(tmp_path, doc)
    out = tmp_path / "proj.npz"
    cmd_project(str(scn), str(dump), str(out))
    with np.load(out) as data:
        assert list(data["mask_rad0"]) == [0, 1]
        assert data["leakage_rad0"] == pytest.approx(0.5)


def test_project_null_space_zero_leakage(tmp_path, rng):
    H = rng.standard_normal((2, 5)) + 1j * rng.standard_normal((2, 5))
    doc, dump = _dump_for(tmp_path, H)
    doc["sigma_th"] = 0.0
    scn = write_scenario(tmp_path, doc)
    out = tmp_path / "proj.npz"
    cmd_project(str(scn), str(dump), str(out))
    with np.load(out) as data:
        assert data["leakage_rad0"] <= 1e-9


def test_project_dimension_mismatch(tmp_path):
    doc, dump = _dump_for(tmp_path, np.zeros((2, 3)))
    doc["n_rad"] = 4
    scn = write_scenario(tmp_path, doc)
    rc = main(["project", "--scenario", str(scn), "--channels", str(dump),
               "--out", str(tmp_path / "p.npz")])
    assert rc == EXIT_VALIDATION


def test_env_var_default_out_dir(tmp_path, monkeypatch):
    out = tmp_path / "envout"
    monkeypatch.setenv("RADARCOEX_OUT", str(out))
    scn = write_scenario(tmp_path, MINIMAL)
    # parser reads the env var at construction time
    assert main(["simulate", "--scenario", str(scn), "--trials", "1"]) == EXIT_OK
    assert (out / "summary.csv").exists()
