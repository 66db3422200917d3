"""Head-related impulse responses: synthesis, file I/O, direct-path transforms.

The synthetic head is a rigid sphere: each ear gets a Woodworth path delay
(line of sight on the bright side, arc length in the shadow) realized as a
windowed-sinc fractional-delay filter, plus a frequency-tilted level
difference standing in for head shadowing. Real measured sets can be carried
through the same HrirSet container and .hrs file format.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError, FormatError

SPEED_OF_SOUND = 343.0

HRS_MAGIC = b"HRS1"

# windowed-sinc fractional delay support; 32 taps either side of the center
KERNEL_HALF = 32


def default_grid():
    """The 25 candidate azimuths in degrees, dense in front, sparse at the sides."""
    return np.array([-80.0, -65.0, -55.0] + list(range(-45, 50, 5)) + [55.0, 65.0, 80.0])


@dataclass
class HrirSet:
    """A set of two-channel impulse responses indexed by direction.

    taps has shape (directions, 2, n_taps) and is kept in float32 so that
    file round trips are bit-exact.
    """

    fs: int
    azimuths_deg: np.ndarray
    elevations_deg: np.ndarray
    taps: np.ndarray
    head_id: str

    def __post_init__(self):
        self.azimuths_deg = np.asarray(self.azimuths_deg, dtype=np.float64)
        self.elevations_deg = np.asarray(self.elevations_deg, dtype=np.float64)
        self.taps = np.asarray(self.taps)
        if self.taps.dtype != np.float32:
            self.taps = self.taps.astype(np.float32)
        if self.fs <= 0:
            raise ValidationError("fs must be positive")
        if self.taps.ndim != 3 or self.taps.shape[1] != 2:
            raise ValidationError("taps must be (directions, 2, n_taps)")
        if len(self.azimuths_deg) != self.taps.shape[0] or len(self.elevations_deg) != self.taps.shape[0]:
            raise ValidationError("direction table length does not match taps")
        if not np.all(np.isfinite(self.taps)):
            raise ValidationError("taps must be finite")
        pairs = set(zip(self.azimuths_deg.tolist(), self.elevations_deg.tolist()))
        if len(pairs) != self.taps.shape[0]:
            raise ValidationError("duplicate directions in HRIR set")

    @property
    def n_directions(self):
        return self.taps.shape[0]

    @property
    def n_taps(self):
        return self.taps.shape[2]

    def direction_index(self, azimuth_deg, elevation_deg=0.0):
        hit = np.flatnonzero(np.isclose(self.azimuths_deg, azimuth_deg, atol=1e-6)
                             & np.isclose(self.elevations_deg, elevation_deg, atol=1e-6))
        if len(hit) == 0:
            raise ValidationError(f"direction {azimuth_deg} deg not in HRIR set")
        return int(hit[0])


def _wrap_deg(a):
    return (a + 180.0) % 360.0 - 180.0


def _sphere_path(gamma_deg):
    """Woodworth path term per ear: -cos on the bright side, arc in the shadow."""
    g = np.radians(gamma_deg)
    if gamma_deg <= 90.0:
        return -np.cos(g)
    return g - np.pi / 2.0


def _frac_delay(delay_samples, n_taps):
    """Place a windowed-sinc unit impulse at a fractional sample position."""
    center = int(np.floor(delay_samples))
    lo = center - KERNEL_HALF + 1
    hi = center + KERNEL_HALF
    if lo < 0 or hi >= n_taps:
        raise ValidationError("delay exceeds HRIR capacity, increase n_taps")
    idx = np.arange(lo, hi + 1)
    arg = idx - delay_samples
    w = 0.5 + 0.5 * np.cos(np.pi * arg / (KERNEL_HALF + 1))
    out = np.zeros(n_taps)
    out[idx] = np.sinc(arg) * w
    return out


def synth_spherical_head(radius_m, mic_azimuths_deg=(-90.0, 90.0), grid_deg=None,
                         fs=16000, n_taps=256, ild_max_db=6.0, head_id=None):
    """Synthesize a two-channel spherical-head HRIR set over a grid of azimuths.

    Each channel is a unit-energy fractional-delay impulse; a zero-phase gain
    with log-linear tilt min(1, f/4 kHz) then applies up to +-ild_max_db/2 of
    level difference per channel. Directions on opposite sides come out as
    channel-swapped mirrors of each other.
    """
    if radius_m <= 0:
        raise ValidationError("radius must be positive")
    if len(mic_azimuths_deg) != 2:
        raise ValidationError("exactly two microphone azimuths required")
    grid = default_grid() if grid_deg is None else np.asarray(grid_deg, dtype=np.float64)
    if head_id is None:
        head_id = f"sphere-r{radius_m * 1000:.0f}mm"

    # base delay keeps every kernel inside the buffer for any grid direction
    base = int(np.ceil(radius_m * fs / SPEED_OF_SOUND)) + KERNEL_HALF + 2
    freqs = np.arange(n_taps // 2 + 1) * (fs / n_taps)
    tilt = np.minimum(1.0, freqs / 4000.0)

    taps = np.zeros((len(grid), 2, n_taps), dtype=np.float64)
    for d, az in enumerate(grid):
        lateral = np.sin(np.radians(az))
        for m, mic_az in enumerate(mic_azimuths_deg):
            gamma = abs(_wrap_deg(az - mic_az))
            delay = base + radius_m * fs / SPEED_OF_SOUND * _sphere_path(gamma)
            h = _frac_delay(delay, n_taps)
            h /= np.sqrt(np.sum(h ** 2))
            # level difference split evenly across the two channels
            sign = 1.0 if m == 1 else -1.0
            gain_db = sign * 0.5 * ild_max_db * lateral * tilt
            spec = np.fft.rfft(h) * 10.0 ** (gain_db / 20.0)
            taps[d, m] = np.fft.irfft(spec, n=n_taps)
    return HrirSet(fs=fs, azimuths_deg=grid, elevations_deg=np.zeros(len(grid)),
                   taps=taps.astype(np.float32), head_id=head_id)


def direct_path_tf(hset, azimuth_deg, config, elevation_deg=0.0):
    """Band-selected transfer function of the HRIR at one grid direction.

    Returns a (2, F) complex array on the config band; the direction must
    match a grid entry exactly, there is no interpolation.
    """
    if hset.n_taps > config.window_len:
        raise ValidationError("HRIR longer than the analysis window")
    d = hset.direction_index(azimuth_deg, elevation_deg)
    spec = np.fft.rfft(hset.taps[d].astype(np.float64), n=config.window_len, axis=-1)
    return spec[:, config.band_lo:config.band_hi + 1]


def save_hrir_set(hset, path):
    """Write an HrirSet as an .hrs file (magic HRS1, little-endian, f32 taps)."""
    head = hset.head_id.encode("utf-8")
    if len(head) > 0xFFFF:
        raise ValidationError("head_id too long")
    dirs = np.column_stack([hset.azimuths_deg, hset.elevations_deg]).astype("<f4")
    with open(path, "wb") as f:
        f.write(HRS_MAGIC)
        f.write(struct.pack("<III", hset.fs, hset.n_directions, hset.n_taps))
        f.write(dirs.tobytes())
        f.write(hset.taps.astype("<f4").tobytes())
        f.write(struct.pack("<H", len(head)))
        f.write(head)


def load_hrir_set(path):
    """Read an .hrs file back into an HrirSet, verifying structure and length."""
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < 4 or blob[:4] != HRS_MAGIC:
        raise FormatError("not an HRS1 file")
    off = 4
    if len(blob) < off + 12:
        raise FormatError("truncated HRS1 header")
    fs, n_dir, n_taps = struct.unpack_from("<III", blob, off)
    off += 12
    need = n_dir * 2 * 4
    if len(blob) < off + need:
        raise FormatError("truncated HRS1 direction table")
    dirs = np.frombuffer(blob, dtype="<f4", count=n_dir * 2, offset=off).reshape(n_dir, 2)
    off += need
    need = n_dir * 2 * n_taps * 4
    if len(blob) < off + need:
        raise FormatError("truncated HRS1 tap data")
    taps = np.frombuffer(blob, dtype="<f4", count=n_dir * 2 * n_taps, offset=off)
    taps = taps.reshape(n_dir, 2, n_taps).copy()
    off += need
    if len(blob) < off + 2:
        raise FormatError("truncated HRS1 head_id")
    (head_len,) = struct.unpack_from("<H", blob, off)
    off += 2
    if len(blob) != off + head_len:
        raise FormatError("HRS1 length mismatch")
    head_id = blob[off:off + head_len].decode("utf-8")
    try:
        return HrirSet(fs=fs, azimuths_deg=dirs[:, 0].astype(np.float64),
                       elevations_deg=dirs[:, 1].astype(np.float64),
                       taps=taps, head_id=head_id)
    except ValidationError as e:
        raise FormatError(f"invalid HRS1 content: {e}") from e
