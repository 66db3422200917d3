"""STFT analysis/synthesis and band selection.

All downstream features live on a fixed 16 kHz, 512/256 Hann framing with the
128 bins covering (0, 4 kHz]. The analysis window is periodic Hann; synthesis
uses its weighted-overlap-add dual so the interior of a round trip is exact.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class StftConfig:
    """Framing and band-selection parameters."""

    fs: int = 16000
    window_len: int = 512
    hop: int = 256
    band_lo: int = 1
    band_hi: int = 128

    def __post_init__(self):
        if self.fs <= 0:
            raise ValidationError("fs must be positive")
        if self.window_len <= 0 or self.hop <= 0:
            raise ValidationError("window_len and hop must be positive")
        if self.window_len % self.hop != 0:
            raise ValidationError("hop must divide window_len")
        if not (1 <= self.band_lo <= self.band_hi <= self.window_len // 2):
            raise ValidationError("band must satisfy 1 <= band_lo <= band_hi <= window_len/2")

    @property
    def n_full_bins(self):
        return self.window_len // 2 + 1

    @property
    def n_band_bins(self):
        return self.band_hi - self.band_lo + 1

    @property
    def bin_hz(self):
        return self.fs / self.window_len

    @property
    def band_freqs_hz(self):
        return np.arange(self.band_lo, self.band_hi + 1) * self.bin_hz

    @property
    def frame_rate_hz(self):
        return self.fs / self.hop


@dataclass
class Spectrogram:
    """Complex STFT data of shape (channels, frames, bins).

    first_bin is 0 for full spectra and band_lo after band selection, so the
    physical frequency of column j is (first_bin + j) * fs / window_len.
    """

    data: np.ndarray
    config: StftConfig
    first_bin: int = 0

    def __post_init__(self):
        if self.data.ndim != 3:
            raise ValidationError("spectrogram data must be (channels, frames, bins)")

    @property
    def n_channels(self):
        return self.data.shape[0]

    @property
    def n_frames(self):
        return self.data.shape[1]

    @property
    def n_bins(self):
        return self.data.shape[2]

    @property
    def band_selected(self):
        return self.first_bin != 0

    @property
    def freqs_hz(self):
        return (self.first_bin + np.arange(self.n_bins)) * self.config.bin_hz


def analysis_window(config):
    """Periodic Hann window of length window_len."""
    n = config.window_len
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def synthesis_window(config):
    """WOLA dual of the analysis window.

    Dividing by the hop-periodic sum of squared analysis windows makes the
    shifted analysis*synthesis products sum to one over the interior.
    """
    wa = analysis_window(config)
    n, hop = config.window_len, config.hop
    denom = np.zeros(n)
    for s in range(n // hop):
        denom += np.roll(wa, s * hop) ** 2
    return wa / denom


def stft_forward(audio, config):
    """Analyze audio into a full-band Spectrogram.

    audio may be 1-D (one channel) or (channels, samples); frames are
    N = (samples - window_len) // hop + 1 with no padding, so the signal
    must be at least one window long.
    """
    x = np.atleast_2d(np.asarray(audio, dtype=np.float64))
    if x.ndim != 2:
        raise ValidationError("audio must be 1-D or (channels, samples)")
    n_samples = x.shape[1]
    if n_samples < config.window_len:
        raise ValidationError("audio shorter than one analysis window")
    n_frames = (n_samples - config.window_len) // config.hop + 1
    wa = analysis_window(config)
    idx = (np.arange(n_frames)[:, None] * config.hop + np.arange(config.window_len)[None, :])
    frames = x[:, idx] * wa
    data = np.fft.rfft(frames, axis=-1)
    return Spectrogram(data=data, config=config, first_bin=0)


def stft_inverse(spec):
    """Weighted overlap-add synthesis back to (channels, samples).

    Requires a full-band spectrogram; the reconstruction is exact on the
    interior (one window away from either edge).
    """
    if spec.band_selected:
        raise ValidationError("cannot invert a band-selected spectrogram")
    cfg = spec.config
    if spec.n_bins != cfg.n_full_bins:
        raise ValidationError("bin count does not match config")
    ws = synthesis_window(cfg)
    frames = np.fft.irfft(spec.data, n=cfg.window_len, axis=-1) * ws
    out_len = (spec.n_frames - 1) * cfg.hop + cfg.window_len
    out = np.zeros((spec.n_channels, out_len))
    for k in range(spec.n_frames):
        out[:, k * cfg.hop:k * cfg.hop + cfg.window_len] += frames[:, k, :]
    return out


def select_band(spec):
    """Keep bins band_lo..band_hi (DC excluded), preserving values bit-exactly."""
    if spec.band_selected:
        raise ValidationError("spectrogram is already band-selected")
    cfg = spec.config
    if spec.n_bins != cfg.n_full_bins:
        raise ValidationError("bin count does not match config")
    data = spec.data[:, :, cfg.band_lo:cfg.band_hi + 1]
    return Spectrogram(data=data, config=cfg, first_bin=cfg.band_lo)
