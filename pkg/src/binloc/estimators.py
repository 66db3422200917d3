"""DP-RTF estimation from binaural spectrograms, plus baselines and errors.

The cross-PSD ratio estimator divides frame-summed X2*conj(X1) by the
frame-summed |X1|^2 per bin, which is numerically stable when individual
frames of the reference channel are small and reduces to the plain
coefficient ratio in the single-frame case.
"""

import numpy as np

from .dprtf import encode_real
from .errors import ValidationError

VAD_THRESHOLD_DB = 40.0


def vad_mask(spec, threshold_db=VAD_THRESHOLD_DB):
    """Binary (frames, bins) activity mask from channel-averaged level.

    A TF bin is active when its channel-averaged log-magnitude is within
    threshold_db of the loudest bin. All-zero input yields an all-zero mask.
    """
    mags = np.abs(spec.data)
    with np.errstate(divide="ignore"):
        level_db = 20.0 * np.log10(mags).mean(axis=0)
    peak = level_db.max()
    if not np.isfinite(peak):
        return np.zeros(level_db.shape, dtype=bool)
    return level_db >= peak - float(threshold_db)


def estimate_dprtf_cpsd(spec, mask=None):
    """Estimate the encoded DP-RTF vector from a binaural spectrogram.

    Per bin f: R(f) = sum_n m(n,f) X2 conj(X1) / sum_n m(n,f) |X1|^2,
    then the real encoding. Bins with no usable frames (empty mask column,
    zero denominator, or a vanishing ratio) are encoded from R = 1 and
    reported False in the returned reliability vector.
    """
    if spec.n_channels != 2:
        raise ValidationError("DP-RTF estimation needs exactly 2 channels")
    x1 = spec.data[0]
    x2 = spec.data[1]
    if mask is None:
        m = np.ones(x1.shape, dtype=np.float64)
    else:
        m = np.asarray(mask, dtype=np.float64)
        if m.shape != x1.shape:
            raise ValidationError("mask shape must match (frames, bins)")
    num = (m * x2 * np.conj(x1)).sum(axis=0)
    den = (m * np.abs(x1) ** 2).sum(axis=0)
    reliable = den > 0.0
    ratio = np.ones(x1.shape[1], dtype=np.complex128)
    np.divide(num, den, out=ratio, where=reliable)
    degenerate = np.abs(ratio) < 1e-12
    ratio[degenerate] = 1.0
    reliable &= ~degenerate
    return encode_real(ratio), reliable


def gcc_phat(x1, x2, max_lag, fs=16000):
    """PHAT-weighted TDOA estimate, positive when x2 lags x1.

    Returns (tdoa_seconds, correlation curve over lags -max_lag..+max_lag).
    """
    a = np.asarray(x1, dtype=np.float64).ravel()
    b = np.asarray(x2, dtype=np.float64).ravel()
    if len(a) != len(b):
        raise ValidationError("gcc_phat inputs must have equal length")
    if max_lag < 1 or len(a) < 2 * max_lag:
        raise ValidationError("inputs must be at least 2*max_lag samples")
    if not (a.any() and b.any()):
        raise ValidationError("gcc_phat input is all zero")
    nfft = 2 * len(a)
    spectrum = np.fft.rfft(b, nfft) * np.conj(np.fft.rfft(a, nfft))
    mag = np.abs(spectrum)
    floor = 1e-15 * max(mag.max(), 1e-300)
    cc = np.fft.irfft(spectrum / np.maximum(mag, floor), nfft)
    curve = np.concatenate([cc[-max_lag:], cc[:max_lag + 1]])
    lag = int(np.argmax(curve)) - max_lag
    return lag / float(fs), curve


def dprtf_errors(pred, truth, active_bins):
    """(iid_error, ipd_error) between encoded DP-RTF vectors.

    iid_error is the MSE over the level-difference components on active
    bins; ipd_error is the MSE over the sin and cos components together,
    so one maximally flipped bin among K active contributes 2/K.
    """
    active = np.asarray(active_bins, dtype=bool).ravel()
    f = len(active)
    p = np.asarray(pred, dtype=np.float64).ravel()
    t = np.asarray(truth, dtype=np.float64).ravel()
    if p.shape != (3 * f,) or t.shape != (3 * f,):
        raise ValidationError("encoded vectors must have 3x the mask length")
    if not active.any():
        raise ValidationError("no active bins to score")
    diff = p - t
    iid = float(np.mean(diff[:f][active] ** 2))
    phase = np.concatenate([diff[f:2 * f][active], diff[2 * f:][active]])
    ipd = float(np.mean(phase ** 2))
    return iid, ipd
