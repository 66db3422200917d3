import math

import numpy as np
import pytest

from binloc.errors import ValidationError
from binloc.metrics import accuracy, mae, make_report, pd_far, sdr


# ------------------------------------------------------------- accuracy

def test_accuracy_all_equal():
    assert accuracy([30.0, -45.0, 0.0], [30.0, -45.0, 0.0]) == 1.0


def test_accuracy_none_equal():
    assert accuracy([30.0, -45.0], [25.0, -40.0]) == 0.0


def test_accuracy_two_of_three():
    assert accuracy([0.0, 5.0, 10.0], [0.0, 5.0, -10.0]) == pytest.approx(2.0 / 3.0)


def test_accuracy_exact_equality_not_tolerance():
    assert accuracy([30.0000001], [30.0]) == 0.0


def test_accuracy_validation():
    with pytest.raises(ValidationError):
        accuracy([1.0], [1.0, 2.0])
    with pytest.raises(ValidationError):
        accuracy([], [])


# ------------------------------------------------------------------ mae

def test_mae_identical():
    assert mae([10.0, -20.0], [10.0, -20.0]) == 0.0


def test_mae_constant_offset():
    truth = [-45.0, 0.0, 30.0]
    est = [t + 5.0 for t in truth]
    assert mae(est, truth) == pytest.approx(5.0)


def test_mae_mixed():
    assert mae([0.0, 10.0], [5.0, 5.0]) == pytest.approx(5.0)


# --------------------------------------------------------------- pd_far

def test_pd_far_perfect_track():
    truth = [10.0] * 8
    vad = [True] * 8
    pd, far = pd_far(truth, truth, vad, tolerance_deg=5.0, frame_rate_hz=2.0)
    assert pd == 1.0
    assert far == 0.0


def test_pd_far_all_wrong_ten_seconds():
    # 10 s of voice activity at 2 estimates/s, every estimate off by > tol
    n = 20
    truth = [0.0] * n
    est = [90.0] * n
    vad = [True] * n
    pd, far = pd_far(est, truth, vad, tolerance_deg=30.0, frame_rate_hz=2.0)
    assert pd == 0.0
    assert far == pytest.approx(2.0)


def test_pd_far_missing_estimates_lower_pd_not_far():
    truth = [0.0, 0.0, 0.0, 0.0]
    est = [0.0, None, 0.0, None]
    vad = [True] * 4
    pd, far = pd_far(est, truth, vad, tolerance_deg=5.0, frame_rate_hz=1.0)
    assert pd == 0.5
    assert far == 0.0


def test_pd_far_ignores_inactive_frames():
    truth = [0.0] * 6
    est = [90.0, 0.0, 90.0, 0.0, 90.0, 0.0]
    vad = [False, True, False, True, False, True]
    pd, far = pd_far(est, truth, vad, tolerance_deg=5.0, frame_rate_hz=1.0)
    assert pd == 1.0
    assert far == 0.0


def test_pd_far_tolerance_monotonicity():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = 30
        truth = rng.uniform(-80, 80, n)
        est = [None if rng.random() < 0.2 else t + rng.normal(0, 20) for t in truth]
        vad = rng.random(n) < 0.7
        if not vad.any():
            continue
        pd_w, far_w = pd_far(est, truth, vad, tolerance_deg=30.0, frame_rate_hz=5.0)
        pd_n, far_n = pd_far(est, truth, vad, tolerance_deg=10.0, frame_rate_hz=5.0)
        assert pd_w >= pd_n
        assert far_w <= far_n
        assert 0.0 <= pd_n <= pd_w <= 1.0
        assert far_n >= far_w >= 0.0


def test_pd_far_requires_active_frames():
    with pytest.raises(ValidationError):
        pd_far([0.0], [0.0], [False], tolerance_deg=5.0, frame_rate_hz=1.0)


def test_pd_far_length_mismatch():
    with pytest.raises(ValidationError):
        pd_far([0.0, 1.0], [0.0], [True], tolerance_deg=5.0, frame_rate_hz=1.0)


# ------------------------------------------------------------------ sdr

def test_sdr_identical_is_infinite():
    rng = np.random.default_rng(1)
    ref = rng.standard_normal(4096)
    assert math.isinf(sdr(ref.copy(), ref))


def test_sdr_equal_power_orthogonal_noise_is_zero_db():
    rng = np.random.default_rng(2)
    ref = rng.standard_normal(8192)
    noise = rng.standard_normal(8192)
    noise -= (noise @ ref) / (ref @ ref) * ref      # exactly orthogonal
    noise *= np.linalg.norm(ref) / np.linalg.norm(noise)  # exactly equal power
    assert sdr(ref + noise, ref) == pytest.approx(0.0, abs=1e-9)


def test_sdr_scale_invariant_in_estimate():
    rng = np.random.default_rng(3)
    ref = rng.standard_normal(2048)
    est = ref + 0.3 * rng.standard_normal(2048)
    assert sdr(3.0 * est, ref) == pytest.approx(sdr(est, ref))


def test_sdr_known_snr():
    # est = ref + noise at 10 dB: projection error is the orthogonal part
    rng = np.random.default_rng(4)
    ref = rng.standard_normal(65536)
    noise = rng.standard_normal(65536)
    noise *= np.linalg.norm(ref) / np.linalg.norm(noise) / math.sqrt(10.0)
    assert sdr(ref + noise, ref) == pytest.approx(10.0, abs=0.3)


def test_sdr_zero_energy_errors():
    ref = np.ones(100)
    with pytest.raises(ValidationError):
        sdr(np.zeros(100), ref)
    with pytest.raises(ValidationError):
        sdr(ref, np.zeros(100))
    with pytest.raises(ValidationError):
        sdr(np.ones(50), np.ones(51))


# ----------------------------------------------------------------- report

def test_report_static_shape():
    rep = make_report(acc=0.8, mae_deg=3.5, n_instances=50, condition={"rt60_s": 0.3})
    assert rep == {
        "acc": 0.8,
        "mae_deg": 3.5,
        "pd": None,
        "far_per_s": None,
        "n_instances": 50,
        "condition": {"rt60_s": 0.3},
    }


def test_report_with_track_metrics():
    rep = make_report(acc=1.0, mae_deg=0.0, n_instances=3, condition={}, pd=0.9, far_per_s=0.1)
    assert rep["pd"] == 0.9
    assert rep["far_per_s"] == 0.1
