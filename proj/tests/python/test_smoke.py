# Copyright 2026 The polarmat Authors
# SPDX-License-Identifier: Apache-2.0

import json
import math

import numpy as np
import pytest

import polarmat as pm


def test_malus_and_mueller():
    assert pm.malus_intensity(2.0, math.pi / 3) == pytest.approx(0.5)
    m = pm.polarizer_mueller(0.0)
    assert m.shape == (4, 4)
    crossed = pm.polarizer_mueller(math.pi / 2) @ m @ np.array([1.0, 0, 0, 0])
    assert abs(crossed[0]) < 1e-15


def test_separate():
    d, s = pm.separate([[0.3, 0.3, 0.3], [0.1, 0.1, 0.1]], [[0.5, 0.5, 0.5], [0.08, 0.08, 0.08]])
    np.testing.assert_allclose(d, [[0.6] * 3, [0.2] * 3])
    np.testing.assert_allclose(s, [[0.4] * 3, [0.0] * 3], atol=1e-12)
    with pytest.raises(pm.PolarmatError, match="LengthMismatch"):
        pm.separate([[0.1] * 3], [])


def test_spiral():
    dirs = pm.spiral_directions(1000)
    assert dirs.shape == (1000, 3)
    np.testing.assert_allclose(np.linalg.norm(dirs, axis=1), 1.0)
    assert np.all(np.diff(dirs[:, 2]) < 0)
    assert np.mean(np.maximum(dirs[:, 2], 0)) == pytest.approx(0.25, abs=1e-3)


def test_ward_and_derived():
    peak = pm.ward_brdf([0, 0, 1], [0, 0, 1], 0.1, 0.1)
    assert peak == pytest.approx(1 / (4 * math.pi * 0.01))
    assert pm.derive_anisotropy_roughness(0.3, 0.1) == pytest.approx((0.5, 0.1))


def test_overexposure_hand_trace():
    signal = np.array([[0.1] * 3, [0.2] * 3, [0.3] * 3, [5.0] * 3])
    cleaned, removed = pm.remove_overexposure(signal, epsilon=1.0, iterations=1, delta=0.05)
    np.testing.assert_allclose(cleaned[3], 0.35)
    assert removed[:, 0].tolist() == [False, False, False, True]


def test_pfm_round_trip(tmp_path):
    img = np.random.default_rng(0).random((5, 4, 3), dtype=np.float32)
    pm.write_pfm(tmp_path / "a.pfm", img)
    back = pm.read_pfm(tmp_path / "a.pfm")
    assert back.dtype == np.float32
    assert np.array_equal(back, img)
    grey = img[..., 0].copy()
    pm.write_pfm(tmp_path / "g.pfm", grey)
    assert np.array_equal(pm.read_pfm(tmp_path / "g.pfm"), grey)
    with pytest.raises(pm.PolarmatError, match="CorruptImage"):
        pm.write_pfm(tmp_path / "nan.pfm", np.full((2, 2), np.nan, dtype=np.float32))


def test_pipeline(tmp_path):
    manifest = pm.synthesize(tmp_path / "cap", preset="lambertian", height=6, width=6, lights=96, seed=1)
    assert json.loads(manifest.read_text())["count"] == 96
    assert pm.run_pipeline(tmp_path / "cap", tmp_path / "pre", stages="separate,preprocess") == "preprocess"
    assert not (tmp_path / "pre" / "rho_d.pfm").exists()
    assert pm.run_pipeline(manifest, tmp_path / "out") == "optimize"
    assert pm.check_bundle(tmp_path / "out") == []
    normal = pm.read_pfm(tmp_path / "out" / "normal.pfm")
    assert normal.shape == (6, 6, 3)
    np.testing.assert_allclose(np.linalg.norm(normal, axis=2), 1.0, atol=1e-5)
    with pytest.raises(pm.PolarmatError, match="MissingFile"):
        pm.run_pipeline(tmp_path / "nowhere.json", tmp_path / "x")
