"""Shoebox room simulation, diffuse noise, and mixing utilities.

Binaural room impulse responses come from the image-source method with a
uniform wall reflection coefficient calibrated from the target RT60. Every
image is placed with a fractional-delay kernel, looked up against the nearest
HRIR grid direction, and scaled by beta^reflections / distance. The order-0
contribution is kept separately so the clean direct-path signal can be
rendered for targets and for enhancement references.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import butter, fftconvolve, sosfilt

from .errors import ValidationError
from .hrir import SPEED_OF_SOUND, KERNEL_HALF, _wrap_deg

SABINE_CONST = 0.161
PRUNE_REL_AMPLITUDE = 1e-3  # -60 dB relative to the direct path
DC_BLOCK_HZ = 20.0
_CHUNK = 200_000


@dataclass(frozen=True)
class RoomConfig:
    """Shoebox geometry with a reverberation target and the array placement."""

    size_m: tuple
    rt60_s: float
    array_center_m: tuple
    array_yaw_deg: float = 0.0

    def __post_init__(self):
        size = np.asarray(self.size_m, dtype=np.float64)
        center = np.asarray(self.array_center_m, dtype=np.float64)
        if size.shape != (3,) or center.shape != (3,):
            raise ValidationError("size_m and array_center_m must be 3-vectors")
        if np.any(size <= 0):
            raise ValidationError("room dimensions must be positive")
        if self.rt60_s < 0:
            raise ValidationError("rt60 must be non-negative")
        if np.any(center <= 0) or np.any(center >= size):
            raise ValidationError("array center must lie strictly inside the room")

    @property
    def volume(self):
        a, b, c = self.size_m
        return a * b * c

    @property
    def surface(self):
        a, b, c = self.size_m
        return 2.0 * (a * b + a * c + b * c)


def rt60_to_reflectivity(size_m, rt60_s):
    """Uniform absorption and reflection coefficients for a target RT60.

    Inverts the Sabine relation RT60 = 0.161 V / (S alpha); alpha at or
    above one means the target is infeasible for this geometry. rt60 = 0 is
    the anechoic case (full absorption, beta 0).
    """
    size = np.asarray(size_m, dtype=np.float64)
    if size.shape != (3,) or np.any(size <= 0):
        raise ValidationError("room size must be three positive lengths")
    if rt60_s < 0:
        raise ValidationError("rt60 must be non-negative")
    if rt60_s == 0:
        return 1.0, 0.0
    volume = float(np.prod(size))
    surface = 2.0 * float(size[0] * size[1] + size[0] * size[2] + size[1] * size[2])
    alpha = SABINE_CONST * volume / (surface * rt60_s)
    if alpha >= 1.0:
        raise ValidationError(f"rt60 {rt60_s} s infeasible for this room (alpha {alpha:.3f})")
    return alpha, math.sqrt(1.0 - alpha)


@dataclass
class Brir:
    """Binaural room impulse response plus its direct-path-only part."""

    fs: int
    taps: np.ndarray
    direct: np.ndarray

    @property
    def direct_len(self):
        return self.direct.shape[1]


def _delay_kernel_rows(delays, gains, n_cols):
    """Windowed-sinc rows, one fractional-delay impulse per image."""
    centers = np.floor(delays).astype(np.int64)
    lo = centers - KERNEL_HALF + 1
    offs = np.arange(2 * KERNEL_HALF)
    arg = (lo[:, None] + offs[None, :]) - delays[:, None]
    rows = np.sinc(arg) * (0.5 + 0.5 * np.cos(np.pi * arg / (KERNEL_HALF + 1)))
    rows *= gains[:, None]
    idx = lo[:, None] + offs[None, :]
    return np.bincount(idx.ravel(), weights=rows.ravel(), minlength=n_cols)[:n_cols]


def _accumulate_brir(delays, gains, dir_idx, hset, train_len):
    """Sum per-direction impulse trains convolved with their HRIRs."""
    n_taps = hset.n_taps
    out = np.zeros((2, train_len + n_taps - 1))
    for g in np.unique(dir_idx):
        sel = dir_idx == g
        train = np.zeros(train_len)
        where = np.flatnonzero(sel)
        for s in range(0, len(where), _CHUNK):
            part = where[s:s + _CHUNK]
            train += _delay_kernel_rows(delays[part], gains[part], train_len)
        h = hset.taps[g].astype(np.float64)
        for ch in (0, 1):
            out[ch] += fftconvolve(train, h[ch])
    return out


def simulate_brir(room, source_az_deg, distance_m, hset, max_order=8):
    """Image-source binaural room impulse response.

    The source sits at array height, distance_m from the array center at
    azimuth source_az_deg relative to the array yaw. max_order bounds the
    image lattice per axis; images weaker than -60 dB relative to the direct
    path are pruned. Each image's direction is snapped to the nearest HRIR
    grid azimuth in the horizontal plane.
    """
    fs = hset.fs
    if distance_m <= 0:
        raise ValidationError("source distance must be positive")
    if max_order < 0:
        raise ValidationError("max_order must be non-negative")
    alpha, beta = rt60_to_reflectivity(room.size_m, room.rt60_s)

    size = np.asarray(room.size_m, dtype=np.float64)
    center = np.asarray(room.array_center_m, dtype=np.float64)
    world = math.radians(room.array_yaw_deg + source_az_deg)
    src = center + distance_m * np.array([math.cos(world), math.sin(world), 0.0])
    if np.any(src <= 0) or np.any(src >= size):
        raise ValidationError("source position lands outside the room")

    direct_delay = distance_m / SPEED_OF_SOUND * fs
    if math.floor(direct_delay) - KERNEL_HALF + 1 < 0:
        raise ValidationError("source too close for the fractional-delay kernel")

    if beta == 0.0:
        positions = src[None, :]
        refl = np.zeros(1)
    else:
        # reflections grow at least linearly with the lattice index, so axes
        # can be capped where every image is provably below the prune level
        n60 = -3.0 / math.log10(beta)
        cap = min(int(max_order), int(math.ceil((n60 + 2.0) / 2.0)))
        rng = np.arange(-cap, cap + 1)
        par = np.array([0, 1])
        rx, ry, rz, px, py, pz = np.meshgrid(rng, rng, rng, par, par, par, indexing="ij")
        rx, ry, rz = rx.ravel(), ry.ravel(), rz.ravel()
        px, py, pz = px.ravel(), py.ravel(), pz.ravel()
        positions = np.stack([
            (1 - 2 * px) * (src[0] + 2 * rx * size[0]),
            (1 - 2 * py) * (src[1] + 2 * ry * size[1]),
            (1 - 2 * pz) * (src[2] + 2 * rz * size[2]),
        ], axis=1)
        refl = (np.abs(rx + px) + np.abs(rx)
                + np.abs(ry + py) + np.abs(ry)
                + np.abs(rz + pz) + np.abs(rz)).astype(np.float64)

    v = positions - center
    dist = np.sqrt(np.sum(v ** 2, axis=1))
    dist = np.maximum(dist, 1e-6)
    # prune on accumulated wall absorption alone; folding in the spreading
    # loss would chop the decay tail long before it reaches -60 dB
    keep = beta ** refl >= PRUNE_REL_AMPLITUDE
    v, dist, refl = v[keep], dist[keep], refl[keep]
    gains = beta ** refl / dist

    az_world = np.degrees(np.arctan2(v[:, 1], v[:, 0]))
    az_rel = _wrap_deg(az_world - room.array_yaw_deg)
    grid = hset.azimuths_deg
    dir_idx = np.empty(len(az_rel), dtype=np.int64)
    for s in range(0, len(az_rel), _CHUNK):
        d = np.abs(_wrap_deg(az_rel[s:s + _CHUNK, None] - grid[None, :]))
        dir_idx[s:s + _CHUNK] = np.argmin(d, axis=1)

    delays = dist / SPEED_OF_SOUND * fs
    train_len = int(math.ceil(delays.max())) + KERNEL_HALF + 2
    taps = _accumulate_brir(delays, gains, dir_idx, hset, train_len)

    d0 = np.flatnonzero(refl == 0)
    direct_train_len = int(math.ceil(delays[d0].max())) + KERNEL_HALF + 2
    direct = _accumulate_brir(delays[d0], gains[d0], dir_idx[d0], hset, direct_train_len)

    if len(refl) > 1:
        # the image sum piles up spurious energy below a few hertz (gains are
        # all positive); block it on the reflected part, leaving the direct
        # path untouched
        reverb = taps.copy()
        reverb[:, :direct.shape[1]] -= direct
        sos = butter(2, DC_BLOCK_HZ, "highpass", fs=fs, output="sos")
        taps = sosfilt(sos, reverb, axis=-1)
        taps[:, :direct.shape[1]] += direct
    return Brir(fs=fs, taps=taps, direct=direct)


def render_source(brir, source):
    """Convolve a mono source with the full response, truncated to source length."""
    return _render(brir.taps, source)


def render_direct(brir, source):
    """Convolve a mono source with the direct-path part only."""
    return _render(brir.direct, source)


def _render(taps, source):
    src = np.asarray(source, dtype=np.float64)
    if src.ndim != 1 or len(src) == 0:
        raise ValidationError("source must be a non-empty 1-D signal")
    out = np.stack([fftconvolve(src, taps[ch]) for ch in (0, 1)])
    return out[:, :len(src)]


NOISE_KINDS = ("white", "babble", "factory")


def _noise_shape(kind, freqs):
    if kind == "white":
        return np.ones_like(freqs)
    if kind == "babble":
        # speech-weighted proxy, about -6 dB/octave above 400 Hz
        return 1.0 / np.sqrt(1.0 + (freqs / 400.0) ** 2)
    if kind == "factory":
        # shallower tilt with a broad machinery resonance
        tilt = (1.0 + (freqs / 900.0) ** 2) ** -0.25
        bump = 1.0 + 1.2 * np.exp(-(((freqs - 1250.0) / 450.0) ** 2))
        return tilt * bump
    raise ValidationError(f"unknown noise kind {kind!r}")


def generate_diffuse_noise(n_samples, mic_distance_m, kind, seed, config):
    """Two-channel noise with the spherically isotropic coherence profile.

    Per frequency, two independent spectra are mixed through the symmetric
    square root of [[1, g], [g, 1]] with g = sinc(2 pi f d / c), then shaped
    by the noise kind's spectral envelope. Channel coherence follows the sinc
    profile; each channel's spectrum follows the envelope.
    """
    if n_samples < config.window_len:
        raise ValidationError("noise length must cover at least one analysis window")
    if mic_distance_m < 0:
        raise ValidationError("mic distance must be non-negative")
    shape = _noise_shape(kind, np.fft.rfftfreq(n_samples, 1.0 / config.fs))

    rng = np.random.default_rng(seed)
    n_bins = n_samples // 2 + 1
    a = rng.standard_normal((2, n_bins)) + 1j * rng.standard_normal((2, n_bins))
    a[:, 0] = a[:, 0].real
    if n_samples % 2 == 0:
        a[:, -1] = a[:, -1].real

    freqs = np.fft.rfftfreq(n_samples, 1.0 / config.fs)
    gamma = np.sinc(2.0 * freqs * mic_distance_m / SPEED_OF_SOUND)
    s = np.sqrt(np.maximum(0.0, 1.0 + gamma))
    t = np.sqrt(np.maximum(0.0, 1.0 - gamma))
    z1 = 0.5 * ((s + t) * a[0] + (s - t) * a[1])
    z2 = 0.5 * ((s - t) * a[0] + (s + t) * a[1])
    x = np.fft.irfft(np.stack([z1, z2]) * shape, n=n_samples)
    return x / math.sqrt(np.mean(x ** 2))


def mix_at_snr(speech, noise, snr_db):
    """Add noise scaled so the speech-to-noise power ratio hits snr_db.

    Powers are averaged over both channels and the whole segment. A +inf
    target returns the speech untouched.
    """
    s = np.asarray(speech, dtype=np.float64)
    n = np.asarray(noise, dtype=np.float64)
    if s.shape != n.shape:
        raise ValidationError("speech and noise must have the same shape")
    p_speech = float(np.mean(s ** 2))
    if p_speech <= 0:
        raise ValidationError("speech has no energy")
    if snr_db == math.inf:
        return s.copy()
    p_noise = float(np.mean(n ** 2))
    if p_noise <= 0:
        raise ValidationError("noise has no energy at a finite target SNR")
    scale = math.sqrt(p_speech / (p_noise * 10.0 ** (snr_db / 10.0)))
    return s + scale * n


def schroeder_rt60(ir, fs, fit_lo_db=-5.0, fit_hi_db=-25.0):
    """RT60 from the Schroeder backward integral.

    Fits a line to the energy decay curve between fit_lo_db and fit_hi_db
    and extrapolates to -60 dB. The default range is the T20 reading;
    image-model decays curve away from a single exponential late in the
    tail, so the early-decay fit is the one that tracks the Sabine target.
    """
    h = np.atleast_2d(np.asarray(ir, dtype=np.float64))
    energy = np.sum(h ** 2, axis=0)
    total = energy.sum()
    if total <= 0:
        raise ValidationError("impulse response has no energy")
    edc = np.cumsum(energy[::-1])[::-1] / total
    with np.errstate(divide="ignore"):
        edc_db = 10.0 * np.log10(edc)
    below_lo = np.flatnonzero(edc_db <= fit_lo_db)
    below_hi = np.flatnonzero(edc_db <= fit_hi_db)
    if len(below_lo) == 0 or len(below_hi) == 0:
        raise ValidationError("decay does not reach the fit range")
    i0, i1 = below_lo[0], below_hi[0]
    if i1 <= i0 + 8:
        raise ValidationError("decay range too short for a slope fit")
    t = np.arange(i0, i1 + 1) / fs
    slope, _ = np.polyfit(t, edc_db[i0:i1 + 1], 1)
    if slope >= 0:
        raise ValidationError("energy decay curve has no negative slope")
    return -60.0 / slope
