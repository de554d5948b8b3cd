"""Smoke tests for the python bindings: closed forms, one tiny simulation,
config validation, and an exactly solvable benchmarking case."""

import json
import math

import numpy as np
import pytest

import crcal


def table_device():
    cfg = crcal.DeviceConfig()
    cfg.q1.frequency = 6.509e9
    cfg.q1.anharmonicity = -300e6
    cfg.q2.frequency = 5.963e9
    cfg.q2.anharmonicity = -314e6
    cfg.j = 10.7e6
    return cfg


def fast_pair_json(**overrides):
    doc = {
        "schema_version": 1,
        "device": {
            "q1": {"frequency": 5.2e9, "anharmonicity": -400e6},
            "q2": {"frequency": 5.0e9, "anharmonicity": -320e6},
            "j": 18e6,
            "m12": 0.04,
            "phi": 0.5,
        },
        "target_rate": 4e6,
        "stages": [],
    }
    doc.update(overrides)
    return doc


def test_couplings_closed_form():
    dc = crcal.derived_couplings(table_device())
    assert dc.delta12 == pytest.approx(546e6)
    assert dc.mu == pytest.approx(0.023899, abs=1e-5)
    assert dc.nu == pytest.approx(-0.043496, abs=1e-5)
    assert dc.epsilon == pytest.approx(-332280, rel=1e-3)


def test_ideal_zx_matrix():
    angle = -math.pi / 2
    zx = np.kron(np.diag([1, -1]), np.array([[0, 1], [1, 0]]))
    expected = math.cos(angle / 2) * np.eye(4) - 1j * math.sin(angle / 2) * zx
    assert np.allclose(crcal.ideal_zx(angle), expected, atol=1e-12)


def test_config_errors_name_the_field():
    doc = fast_pair_json()
    del doc["device"]["q1"]["frequency"]
    with pytest.raises(crcal.ConfigInvalid, match=r"device\.q1\.frequency"):
        crcal.RunConfig.from_json_text(json.dumps(doc))
    with pytest.raises(crcal.ConfigInvalid, match="stages"):
        crcal.RunConfig.from_json_text(json.dumps(fast_pair_json(stages=["bogus"])))


def test_trajectory_starts_at_the_north_pole():
    cfg = crcal.RunConfig.from_json_text(json.dumps(fast_pair_json())).device
    drive = crcal.DriveSettings()
    drive.cr_amp = 5e6
    opts = crcal.AcquireOptions()
    opts.step_cycles = 0.04
    traj = crcal.acquire_continuous(cfg, drive, 0, [0.0, 20e-9], opts)
    assert traj.ticks == [0.0, 20e-9]
    assert traj.z[0] == pytest.approx(1.0, abs=1e-9)
    r2 = traj.x[1] ** 2 + traj.y[1] ** 2 + traj.z[1] ** 2
    assert r2 <= 1.0 + 1e-9


def test_pipeline_reports_couplings(tmp_path):
    doc = fast_pair_json(output_dir=str(tmp_path), noise="unitary")
    result = crcal.run_pipeline(crcal.RunConfig.from_json_text(json.dumps(doc)))
    names = [a.rsplit("/", 1)[-1] for a in result.artifacts]
    assert "session.log" in names and "summary.json" in names
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["couplings"]["mu"] == pytest.approx(result.couplings.mu)
    assert summary["fidelity"] is None


def test_interleaved_rb_recovers_a_known_depolarizing_strength():
    f0 = 0.9
    strength = 4 * (1 - f0) / 3
    channel = crcal.ideal_channel_with_depolarizing(
        crcal.ideal_zx(-math.pi / 2), strength, levels=2
    )
    opts = crcal.RbOptions()
    opts.lengths = [2, 4]
    opts.n_sequences = 4
    ref = crcal.run_rb(None, opts, levels=2)
    il = crcal.run_rb(channel, opts, levels=2)
    fid = crcal.interleaved_fidelity(ref, il, bootstrap=50)
    assert fid.value == pytest.approx(f0, abs=1e-6)
