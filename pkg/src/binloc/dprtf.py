"""Direct-path relative transfer function features and dictionary matching.

The feature for a direction is the ratio of the two direct-path transfer
functions. Its real encoding stacks the normalized level difference with the
sine and cosine of the phase difference, giving a bounded vector of length
3F that is insensitive to phase wrapping.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError, FormatError
from .hrir import direct_path_tf

DEGENERATE_EPS = 1e-12


def dprtf_complex(tf):
    """Complex ratio channel2/channel1 of a (2, F) transfer function."""
    tf = np.asarray(tf)
    if tf.ndim != 2 or tf.shape[0] != 2:
        raise ValidationError("transfer function must be (2, F)")
    if np.any(np.abs(tf[0]) < DEGENERATE_EPS):
        raise ValidationError("degenerate transfer function: reference channel has a zero bin")
    return tf[1] / tf[0]


def encode_real(ratio, delta_i_max=20.0):
    """Encode a complex ratio as [level, sin phase, cos phase] of length 3F.

    The level part is 20*log10|r| divided by delta_i_max and clipped to
    [-1, 1]; the phase enters through sin/cos so wrapping never shows up.
    """
    r = np.asarray(ratio, dtype=complex).ravel()
    mag = np.abs(r)
    if np.any(mag < DEGENERATE_EPS):
        raise ValidationError("cannot encode a zero ratio")
    level = np.clip(20.0 * np.log10(mag) / delta_i_max, -1.0, 1.0)
    phase = np.angle(r)
    return np.concatenate([level, np.sin(phase), np.cos(phase)])


@dataclass
class Dictionary:
    """Ground-truth feature vectors for every candidate direction of one head."""

    fs: int
    n_bins: int
    delta_i_max: float
    head_id: str
    grid_deg: list
    entries: dict

    def __post_init__(self):
        self.grid_deg = [float(a) for a in self.grid_deg]
        if sorted(self.grid_deg) != self.grid_deg:
            raise ValidationError("grid must be ascending")
        if set(self.entries) != set(self.grid_deg):
            raise ValidationError("entries do not cover the grid")
        want = 3 * self.n_bins
        for az, vec in self.entries.items():
            vec = np.asarray(vec, dtype=np.float64)
            if vec.shape != (want,):
                raise ValidationError(f"entry {az} has length {vec.shape}, want {want}")
            self.entries[az] = vec


def build_dictionary(hset, config, delta_i_max=20.0):
    """Encode the direct-path feature of every grid direction of one HRIR set."""
    entries = {}
    for az in hset.azimuths_deg:
        tf = direct_path_tf(hset, az, config)
        entries[float(az)] = encode_real(dprtf_complex(tf), delta_i_max)
    return Dictionary(fs=config.fs, n_bins=config.n_band_bins, delta_i_max=delta_i_max,
                      head_id=hset.head_id, grid_deg=sorted(entries), entries=entries)


def average_dictionary(dicts):
    """Elementwise mean over dictionaries of different heads on the same grid.

    The result stands in for an unseen head; its sin/cos parts are generally
    no longer on the unit circle, which is fine for nearest-entry lookup.
    """
    if len(dicts) == 0:
        raise ValidationError("no dictionaries to average")
    first = dicts[0]
    for d in dicts[1:]:
        if d.grid_deg != first.grid_deg:
            raise ValidationError("dictionaries disagree on the grid")
        if d.fs != first.fs or d.n_bins != first.n_bins or d.delta_i_max != first.delta_i_max:
            raise ValidationError("dictionaries disagree on fs, F, or delta_i_max")
    entries = {az: np.mean([d.entries[az] for d in dicts], axis=0) for az in first.grid_deg}
    head_id = "avg(" + ",".join(d.head_id for d in dicts) + ")"
    return Dictionary(fs=first.fs, n_bins=first.n_bins, delta_i_max=first.delta_i_max,
                      head_id=head_id, grid_deg=first.grid_deg, entries=entries)


def match_doa(vec, dictionary):
    """Nearest dictionary entry in squared L2 distance; ties go to the smaller azimuth."""
    vec = np.asarray(vec, dtype=np.float64).ravel()
    want = 3 * dictionary.n_bins
    if vec.shape != (want,):
        raise ValidationError(f"feature vector must have length {want}")
    best_az = None
    best_d = math.inf
    for az in dictionary.grid_deg:  # ascending, so strict < keeps the smaller azimuth on ties
        d = float(np.sum((vec - dictionary.entries[az]) ** 2))
        if d < best_d:
            best_d = d
            best_az = az
    return best_az


def _sig9(x):
    return float(f"{x:.9g}")


def save_dictionary(dictionary, path):
    """Serialize to JSON with nine significant digits per float."""
    doc = {
        "fs": dictionary.fs,
        "F": dictionary.n_bins,
        "delta_i_max": _sig9(dictionary.delta_i_max),
        "head_id": dictionary.head_id,
        "grid_deg": [_sig9(a) for a in dictionary.grid_deg],
        "entries": {f"{az:g}": [_sig9(v) for v in dictionary.entries[az]]
                    for az in dictionary.grid_deg},
    }
    with open(path, "w") as f:
        json.dump(doc, f)
        f.write("\n")


def load_dictionary(path):
    """Read a dictionary JSON written by save_dictionary."""
    with open(path) as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise FormatError(f"dictionary is not valid JSON: {e}") from e
    try:
        entries = {float(az): np.asarray(vec, dtype=np.float64)
                   for az, vec in doc["entries"].items()}
        return Dictionary(fs=int(doc["fs"]), n_bins=int(doc["F"]),
                          delta_i_max=float(doc["delta_i_max"]),
                          head_id=str(doc["head_id"]),
                          grid_deg=sorted(float(a) for a in doc["grid_deg"]),
                          entries=entries)
    except (KeyError, TypeError, ValueError, ValidationError) as e:
        raise FormatError(f"invalid dictionary content: {e}") from e
