"""Localization and enhancement scoring.

ACC counts exact grid equality because estimates come from a discrete
dictionary match; MAE averages absolute error over every instance, wrong
ones included. PD/FAR score per-frame tracks over voice-active periods
only. SDR projects the estimate onto the reference before measuring
distortion, so it is invariant to the estimate's overall scale.
"""

import math

import numpy as np

from .errors import ValidationError


def _paired(est, truth):
    e = np.asarray(est, dtype=np.float64).ravel()
    t = np.asarray(truth, dtype=np.float64).ravel()
    if len(e) != len(t):
        raise ValidationError("est and truth must have equal length")
    if len(e) == 0:
        raise ValidationError("nothing to score")
    return e, t


def accuracy(est, truth):
    e, t = _paired(est, truth)
    return float(np.mean(e == t))


def mae(est, truth):
    e, t = _paired(est, truth)
    return float(np.mean(np.abs(e - t)))


def pd_far(est_track, truth_track, vad, tolerance_deg, frame_rate_hz):
    """(PD, FAR/s) over voice-active frames.

    est_track entries may be None where no estimate was emitted; those
    frames count against PD but are not false alarms.
    """
    truth = np.asarray(truth_track, dtype=np.float64).ravel()
    active = np.asarray(vad, dtype=bool).ravel()
    if not (len(est_track) == len(truth) == len(active)):
        raise ValidationError("track and vad lengths must match")
    if frame_rate_hz <= 0:
        raise ValidationError("frame_rate_hz must be positive")
    n_active = int(active.sum())
    if n_active == 0:
        raise ValidationError("no voice-active frames")
    hits = 0
    alarms = 0
    for est, tru, act in zip(est_track, truth, active):
        if not act or est is None:
            continue
        if abs(float(est) - tru) <= tolerance_deg:
            hits += 1
        else:
            alarms += 1
    duration_s = n_active / float(frame_rate_hz)
    return hits / n_active, alarms / duration_s


def sdr(est, ref):
    """Signal-to-distortion ratio in dB after scalar projection onto ref."""
    e = np.asarray(est, dtype=np.float64).ravel()
    r = np.asarray(ref, dtype=np.float64).ravel()
    if len(e) != len(r):
        raise ValidationError("est and ref must have equal length")
    ref_energy = float(r @ r)
    if ref_energy <= 0 or float(e @ e) <= 0:
        raise ValidationError("sdr needs nonzero est and ref energy")
    target = (float(e @ r) / ref_energy) * r
    distortion = e - target
    num = float(target @ target)
    den = float(distortion @ distortion)
    if den <= 0:
        return math.inf
    return 10.0 * math.log10(num / den)


def make_report(acc, mae_deg, n_instances, condition, pd=None, far_per_s=None):
    """Metrics report dict; pd/far stay None for static (per-instance) runs."""
    return {
        "acc": acc,
        "mae_deg": mae_deg,
        "pd": pd,
        "far_per_s": far_per_s,
        "n_instances": n_instances,
        "condition": condition,
    }
