"""Waveform synthesis and fidelity scoring for stored spectrograms.

Stored instances are 512/256 weighted-overlap-add analyses at 16 kHz,
band-limited to the 128 bins covering (0, 4 kHz]. Reconstruction embeds
the band into an otherwise zero full spectrum, so outputs are band-limited
versions of the originals; fidelity comparisons stay fair as long as the
estimate and the reference get the same treatment.
"""

import math

import numpy as np

SAMPLE_RATE = 16000
WINDOW_LEN = 512
HOP = 256
FULL_BINS = WINDOW_LEN // 2 + 1
BAND_LO = 1  # DC excluded from the stored band
N_BINS = 128


def _analysis_window():
    n = np.arange(WINDOW_LEN)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / WINDOW_LEN)


def _synthesis_window():
    # least-squares dual of the analysis window: divide by the hop-periodic
    # sum of squared analysis values so overlap-added frames sum to one
    wa = _analysis_window()
    power = wa * wa
    period = power.reshape(WINDOW_LEN // HOP, HOP).sum(axis=0)
    return wa / np.tile(period, WINDOW_LEN // HOP)


def istft(spec):
    """Overlap-add synthesis of a (frames, bins) or (channels, frames, bins)
    spectrogram. 257-bin input is used directly; 128-bin input is treated as
    the stored band and zero-filled around it.
    """
    s = np.asarray(spec)
    if s.ndim == 2:
        return _istft_one(s)
    if s.ndim == 3:
        return np.stack([_istft_one(ch) for ch in s])
    raise ValueError("expected a 2-d or 3-d spectrogram")


def _istft_one(s):
    n_frames, n_bins = s.shape
    if n_bins == N_BINS:
        full = np.zeros((n_frames, FULL_BINS), dtype=np.complex128)
        full[:, BAND_LO:BAND_LO + N_BINS] = s
    elif n_bins == FULL_BINS:
        full = s.astype(np.complex128)
    else:
        raise ValueError(f"unsupported bin count {n_bins}")
    frames = np.fft.irfft(full, n=WINDOW_LEN, axis=-1) * _synthesis_window()
    out = np.zeros((n_frames - 1) * HOP + WINDOW_LEN)
    for m in range(n_frames):
        out[m * HOP:m * HOP + WINDOW_LEN] += frames[m]
    return out


def sdr(est, ref):
    """Signal-to-distortion ratio in dB with the projection convention:
    the target is the orthogonal projection of the estimate onto the
    reference, everything else is distortion. Scale-invariant.
    """
    e = np.asarray(est, dtype=np.float64).ravel()
    r = np.asarray(ref, dtype=np.float64).ravel()
    if e.shape != r.shape:
        raise ValueError("estimate and reference lengths differ")
    r_energy = float(np.dot(r, r))
    e_energy = float(np.dot(e, e))
    if r_energy == 0.0 or e_energy == 0.0:
        raise ValueError("sdr undefined for all-zero signals")
    target = (np.dot(e, r) / r_energy) * r
    distortion = e - target
    d_energy = float(np.dot(distortion, distortion))
    t_energy = float(np.dot(target, target))
    if d_energy == 0.0:
        return math.inf
    return 10.0 * math.log10(t_energy / d_energy)
