# SPDX-License-Identifier: Apache-2.0
"""Smoke tests for the Python bindings."""

import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", ".."))

import pywloc as wl  # noqa: E402


def single_path_csi(aoa_deg, num_antennas=8):
    profile = wl.MultipathProfile()
    path = wl.PathComponent()
    path.aoa_deg = aoa_deg
    path.delay_s = 0.0
    path.gain = 1.0 + 0.0j
    profile.paths = [path]
    layout = wl.ArrayLayout()
    layout.num_antennas = num_antennas
    return wl.synth_csi(profile, layout, wl.SubcarrierGrid())


def test_steering_vector_examples():
    v = wl.steering_vector(90.0, 4)
    assert np.allclose(v, np.ones(4))
    v = wl.steering_vector(60.0, 4)
    assert np.allclose(v, [1.0, -1.0j, -1.0, 1.0j])


def test_music_recovers_single_path():
    csi = single_path_csi(75.0)
    est = wl.estimate_aoa_music(csi, 1)
    assert abs(est - 75.0) <= 0.1


def test_phase_calibration_is_impairment_invariant():
    csi = single_path_csi(60.0)
    spec = wl.ImpairmentSpec()
    spec.sfo_delta_t = 0.4
    spec.cfo_beta = 1.1
    spec.snr_db = math.inf
    impaired = wl.apply_impairments(csi, spec, wl.SubcarrierGrid())
    clean = wl.calibrate_phase_matrix(wl.extract_phase(csi))
    dirty = wl.calibrate_phase_matrix(wl.extract_phase(impaired))
    assert np.max(np.abs(clean - dirty)) < 1e-9


def test_phase_diff_estimator():
    csi = single_path_csi(120.0)
    result = wl.phase_diff_aoa(wl.extract_phase(csi))
    assert abs(result.aoa_deg - 120.0) < 1e-6


def test_schedule_partition():
    schedule = wl.make_schedule(3, 4)
    flat = sorted(a for slot in schedule.slots for a in slot)
    assert flat == list(range(12))


def test_mlp_train_and_grad_check():
    rng = np.random.default_rng(5)
    features = rng.normal(size=(64, 4))
    targets = features @ rng.normal(size=(4, 2))
    spec = wl.MlpSpec()
    spec.layer_widths = [4, 16, 2]
    model = wl.init_model(spec, 3)
    cfg = wl.TrainConfig()
    cfg.epochs = 30
    result = wl.train(model, features, targets, cfg)
    assert result.loss_history[-1] < result.loss_history[0]
    err = wl.grad_check(model, rng.normal(size=4), rng.normal(size=2))
    assert err <= 1e-4


def test_metrics_and_scenario():
    assert wl.compute_mae([10.0, 20.0], [12.0, 16.0]) == pytest.approx(3.0)
    rmse, mean_dist = wl.compute_rmse(
        [wl.Point2D(0.0, 0.0)], [wl.Point2D(3.0, 4.0)]
    )
    assert rmse == pytest.approx(5.0)
    assert mean_dist == pytest.approx(5.0)
    cfg = wl.gen_scenario()
    assert len(cfg.reference_points) == 20
    assert len(cfg.test_points) == 9
