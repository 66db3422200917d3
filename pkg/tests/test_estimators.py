import numpy as np
import pytest

from binloc.dprtf import build_dictionary, encode_real, match_doa
from binloc.errors import ValidationError
from binloc.estimators import dprtf_errors, estimate_dprtf_cpsd, gcc_phat, vad_mask
from binloc.hrir import synth_spherical_head
from binloc.roomsim import RoomConfig, render_source, simulate_brir
from binloc.signals import Spectrogram, StftConfig, select_band, stft_forward

CFG = StftConfig()


def band_spec(data):
    return Spectrogram(data=np.asarray(data, dtype=np.complex128), config=CFG, first_bin=CFG.band_lo)


# ---------------------------------------------------------------- vad_mask

def test_vad_all_equal_magnitudes_all_active():
    data = np.full((2, 7, 16), 3.0 + 0j)
    mask = vad_mask(band_spec(data))
    assert mask.shape == (7, 16)
    assert mask.all()


def test_vad_single_nonzero_bin():
    data = np.zeros((2, 5, 12), dtype=np.complex128)
    data[:, 2, 7] = 1.0
    mask = vad_mask(band_spec(data), threshold_db=30.0)
    expect = np.zeros((5, 12), dtype=bool)
    expect[2, 7] = True
    assert np.array_equal(mask, expect)


def test_vad_all_zero_input_gives_empty_mask():
    data = np.zeros((2, 4, 8), dtype=np.complex128)
    assert not vad_mask(band_spec(data)).any()


def test_vad_threshold_zero_keeps_the_peak():
    rng = np.random.default_rng(0)
    data = rng.standard_normal((2, 6, 10)) + 1j * rng.standard_normal((2, 6, 10))
    mask = vad_mask(band_spec(data), threshold_db=0.0)
    assert mask.sum() >= 1


def test_vad_density_monotone_in_threshold():
    rng = np.random.default_rng(1)
    mags = np.exp(rng.normal(0.0, 2.0, size=(2, 40, 64)))
    spec = band_spec(mags.astype(np.complex128))
    densities = [vad_mask(spec, threshold_db=t).mean() for t in (60.0, 40.0, 20.0, 10.0)]
    for wide, narrow in zip(densities, densities[1:]):
        assert narrow <= wide
    assert densities[-1] < densities[0]


# --------------------------------------------------- estimate_dprtf_cpsd

def random_binaural(rng, n_frames=20, n_bins=32):
    x1 = rng.standard_normal((n_frames, n_bins)) + 1j * rng.standard_normal((n_frames, n_bins))
    return x1


def test_identical_channels_give_zero_iid_zero_ipd():
    rng = np.random.default_rng(2)
    x1 = random_binaural(rng)
    spec = band_spec(np.stack([x1, x1]))
    vec, reliable = estimate_dprtf_cpsd(spec)
    f = x1.shape[1]
    assert reliable.all()
    np.testing.assert_allclose(vec[:f], 0.0, atol=1e-12)          # delta-I
    np.testing.assert_allclose(vec[f:2 * f], 0.0, atol=1e-12)     # sin
    np.testing.assert_allclose(vec[2 * f:], 1.0, atol=1e-12)      # cos


def test_pure_delay_phase_matches_closed_form():
    # X2(n,f) = X1(n,f) * exp(-2j pi f_k * d / fs) for a 2-sample delay
    rng = np.random.default_rng(3)
    x1 = random_binaural(rng, n_bins=CFG.n_band_bins)
    freqs = CFG.band_freqs_hz
    phase = np.exp(-2j * np.pi * freqs * 2.0 / CFG.fs)
    spec = band_spec(np.stack([x1, x1 * phase]))
    vec, reliable = estimate_dprtf_cpsd(spec)
    f = len(freqs)
    assert reliable.all()
    np.testing.assert_allclose(vec[:f], 0.0, atol=1e-10)
    np.testing.assert_allclose(vec[f:2 * f], np.sin(-2 * np.pi * freqs * 2 / CFG.fs), atol=1e-10)
    np.testing.assert_allclose(vec[2 * f:], np.cos(-2 * np.pi * freqs * 2 / CFG.fs), atol=1e-10)


def test_estimator_matches_exact_per_bin_ratio():
    # X2 = c(f) * X1 makes the cross-PSD ratio exactly c(f) regardless of mask
    rng = np.random.default_rng(4)
    x1 = random_binaural(rng, n_bins=16)
    c = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    spec = band_spec(np.stack([x1, x1 * c]))
    vec, reliable = estimate_dprtf_cpsd(spec)
    assert reliable.all()
    np.testing.assert_allclose(vec, encode_real(c), atol=1e-12)


def test_scale_invariance():
    rng = np.random.default_rng(5)
    x1 = random_binaural(rng)
    c = rng.standard_normal(x1.shape[1]) + 1j * rng.standard_normal(x1.shape[1])
    data = np.stack([x1, x1 * c])
    vec_a, _ = estimate_dprtf_cpsd(band_spec(data))
    vec_b, _ = estimate_dprtf_cpsd(band_spec(data * (3.7 - 0.4j)))
    np.testing.assert_allclose(vec_a, vec_b, atol=1e-9)


def test_channel_swap_negates_iid_and_sin():
    rng = np.random.default_rng(6)
    x1 = random_binaural(rng, n_bins=24)
    c = (0.5 + rng.random(24)) * np.exp(1j * rng.uniform(-3, 3, 24))
    data = np.stack([x1, x1 * c])
    vec, _ = estimate_dprtf_cpsd(band_spec(data))
    swapped, _ = estimate_dprtf_cpsd(band_spec(data[::-1]))
    f = 24
    np.testing.assert_allclose(swapped[:f], -vec[:f], atol=1e-9)
    np.testing.assert_allclose(swapped[f:2 * f], -vec[f:2 * f], atol=1e-9)
    np.testing.assert_allclose(swapped[2 * f:], vec[2 * f:], atol=1e-9)


def test_mask_restricts_the_frame_sum():
    rng = np.random.default_rng(7)
    x1 = random_binaural(rng, n_frames=10, n_bins=8)
    c = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    x2 = x1 * c
    x2[5:] = rng.standard_normal((5, 8))  # frames a mask should ignore
    mask = np.zeros((10, 8), dtype=bool)
    mask[:5] = True
    vec, reliable = estimate_dprtf_cpsd(band_spec(np.stack([x1, x2])), mask=mask)
    assert reliable.all()
    np.testing.assert_allclose(vec, encode_real(c), atol=1e-12)


def test_unreliable_bins_are_neutral_and_flagged():
    rng = np.random.default_rng(8)
    x1 = random_binaural(rng, n_frames=6, n_bins=5)
    mask = np.ones((6, 5), dtype=bool)
    mask[:, 2] = False
    vec, reliable = estimate_dprtf_cpsd(band_spec(np.stack([x1, 2.0 * x1])), mask=mask)
    assert reliable.tolist() == [True, True, False, True, True]
    neutral = encode_real(np.ones(1))
    assert vec[2] == pytest.approx(neutral[0])      # delta-I of R=1 is 0
    assert vec[5 + 2] == pytest.approx(neutral[1])  # sin 0
    assert vec[10 + 2] == pytest.approx(neutral[2])  # cos 1


def test_zero_denominator_bin_is_unreliable():
    data = np.ones((2, 4, 3), dtype=np.complex128)
    data[0, :, 1] = 0.0
    vec, reliable = estimate_dprtf_cpsd(band_spec(data))
    assert reliable.tolist() == [True, False, True]


def test_single_channel_rejected():
    data = np.ones((1, 4, 3), dtype=np.complex128)
    with pytest.raises(ValidationError):
        estimate_dprtf_cpsd(band_spec(data))


def test_clean_anechoic_estimate_hits_dictionary_entry():
    hset = synth_spherical_head(0.0875)
    dic = build_dictionary(hset, CFG)
    room = RoomConfig(size_m=(5.0, 7.0, 3.0), rt60_s=0.0, array_center_m=(2.4, 3.2, 1.5))
    brir = simulate_brir(room, 30.0, 1.0, hset, max_order=8)
    rng = np.random.default_rng(9)
    x = render_source(brir, rng.standard_normal(8192))
    spec = select_band(stft_forward(x, CFG))
    vec, reliable = estimate_dprtf_cpsd(spec)
    assert reliable.all()
    entry = dic.entries[30.0]
    assert np.linalg.norm(vec - entry) < 0.05
    assert match_doa(vec, dic) == 30.0


# ------------------------------------------------------------- gcc_phat

def test_gcc_phat_integer_shift():
    rng = np.random.default_rng(10)
    x1 = rng.standard_normal(4096)
    x2 = np.roll(x1, 5)  # x2[n] = x1[n-5], x2 lags x1
    tdoa, cc = gcc_phat(x1, x2, max_lag=32)
    assert tdoa == pytest.approx(5.0 / 16000.0)
    assert len(cc) == 65
    assert np.argmax(cc) == 32 + 5


def test_gcc_phat_identical_inputs_zero_tdoa():
    rng = np.random.default_rng(11)
    x1 = rng.standard_normal(2048)
    tdoa, _ = gcc_phat(x1, x1, max_lag=20)
    assert tdoa == 0.0


def test_gcc_phat_antisymmetric_under_swap():
    rng = np.random.default_rng(12)
    x1 = rng.standard_normal(4096)
    x2 = np.roll(x1, 7)
    t_ab, _ = gcc_phat(x1, x2, max_lag=32)
    t_ba, _ = gcc_phat(x2, x1, max_lag=32)
    assert t_ab == pytest.approx(-t_ba)


def test_gcc_phat_noise_robustness_monte_carlo():
    # 10-sample shift, independent noise at 0 dB SNR: within 1 sample >= 95/100
    hits = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        x1 = rng.standard_normal(8192)
        x2 = np.roll(x1, 10)
        n1 = rng.standard_normal(8192)
        n2 = rng.standard_normal(8192)
        tdoa, _ = gcc_phat(x1 + n1, x2 + n2, max_lag=64)
        if abs(tdoa * 16000.0 - 10.0) <= 1.0:
            hits += 1
    assert hits >= 95


def test_gcc_phat_rejects_zero_input_and_bad_lengths():
    x = np.zeros(1024)
    with pytest.raises(ValidationError):
        gcc_phat(x, x, max_lag=16)
    rng = np.random.default_rng(13)
    with pytest.raises(ValidationError):
        gcc_phat(rng.standard_normal(100), rng.standard_normal(101), max_lag=16)
    with pytest.raises(ValidationError):
        gcc_phat(rng.standard_normal(20), rng.standard_normal(20), max_lag=16)


def test_gcc_phat_custom_sample_rate():
    rng = np.random.default_rng(14)
    x1 = rng.standard_normal(4096)
    x2 = np.roll(x1, 3)
    tdoa, _ = gcc_phat(x1, x2, max_lag=16, fs=8000)
    assert tdoa == pytest.approx(3.0 / 8000.0)


# --------------------------------------------------------- dprtf_errors

def test_errors_zero_for_identical_vectors():
    rng = np.random.default_rng(15)
    vec = encode_real(rng.standard_normal(12) + 1j * rng.standard_normal(12))
    active = np.ones(12, dtype=bool)
    assert dprtf_errors(vec, vec, active) == (0.0, 0.0)


def test_single_flipped_bin_arithmetic():
    # sin -1 vs +1 at one of K active bins, cos equal: ipd = 4 / (2K) = 2/K
    k = 8
    ratio = np.exp(1j * (np.pi / 2)) * np.ones(k)  # sin=1, cos=0
    truth = encode_real(ratio)
    pred = truth.copy()
    pred[k] = -1.0  # flip sin of bin 0
    active = np.ones(k, dtype=bool)
    iid, ipd = dprtf_errors(pred, truth, active)
    assert iid == 0.0
    assert ipd == pytest.approx(2.0 / k)


def test_all_bins_maximally_flipped_gives_two():
    k = 6
    truth = encode_real(np.exp(1j * (np.pi / 2)) * np.ones(k))
    pred = truth.copy()
    pred[k:2 * k] = -1.0
    iid, ipd = dprtf_errors(pred, truth, np.ones(k, dtype=bool))
    assert ipd == pytest.approx(2.0)


def test_iid_is_mse_over_active_delta_i():
    k = 4
    truth = encode_real(np.ones(k))
    pred = truth.copy()
    pred[0] += 0.3
    pred[2] += 0.1
    active = np.array([True, False, True, True])
    iid, ipd = dprtf_errors(pred, truth, active)
    assert iid == pytest.approx((0.3 ** 2 + 0.1 ** 2) / 3.0)
    assert ipd == 0.0


def test_inactive_bins_are_ignored():
    k = 5
    truth = encode_real(np.ones(k))
    pred = truth.copy()
    pred[1] = 0.9       # delta-I of an inactive bin
    pred[k + 1] = -0.5  # sin of the same bin
    active = np.ones(k, dtype=bool)
    active[1] = False
    assert dprtf_errors(pred, truth, active) == (0.0, 0.0)


def test_errors_validation():
    truth = encode_real(np.ones(4))
    with pytest.raises(ValidationError):
        dprtf_errors(truth[:-1], truth, np.ones(4, dtype=bool))
    with pytest.raises(ValidationError):
        dprtf_errors(truth, truth, np.zeros(4, dtype=bool))
