"""Dataset assembly: feature planes, standardization, in-memory sets."""

from pathlib import Path

import numpy as np
import torch

from .enhance import LOG_FLOOR
from .io import read_manifest, read_tensor, tensor_to_complex


def log_mag(spec):
    return np.log(np.abs(spec) + LOG_FLOOR).astype(np.float32)


def build_planes(mix, enhanced=None):
    """Stack per-channel log-magnitude and phase planes.

    mix and enhanced are complex (2, frames, bins). Plane order is
    contaminated left, contaminated right, then enhanced left and right
    when an enhanced pair is given.
    """
    specs = [mix[0], mix[1]]
    if enhanced is not None:
        specs += [enhanced[0], enhanced[1]]
    mags = np.stack([log_mag(s) for s in specs])
    phases = np.stack([np.angle(s).astype(np.float32) for s in specs])
    return mags, phases


def plane_stats(mags):
    """Per-plane scalar mean and deviation over a (n, planes, frames, bins)
    stack; computed on the training split, stored in the checkpoint.
    """
    mean = mags.mean(axis=(0, 2, 3))
    std = np.maximum(mags.std(axis=(0, 2, 3)), 1e-6)
    return mean.astype(np.float32), std.astype(np.float32)


def standardize(mags, mean, std):
    return (mags - mean[:, None, None]) / std[:, None, None]


def _apply_enhancer(mixes, enhancer, chunk=128):
    """Run the frozen enhancer over every channel of a (n, 2, frames, bins)
    complex stack once; training then never touches the enhancer again.
    """
    n, ch, frames, bins = mixes.shape
    flat = torch.from_numpy(mixes.reshape(n * ch, frames, bins))
    enhancer.eval()
    outs = []
    with torch.no_grad():
        for start in range(0, flat.shape[0], chunk):
            outs.append(enhancer(flat[start:start + chunk]).numpy())
    return np.concatenate(outs).reshape(n, ch, frames, bins)


class InstanceSet:
    """All planes and targets for one manifest slice, resident in memory."""

    def __init__(self, ids, mags, phases, targets, mixes, directs):
        self.ids = ids
        self.mags = mags        # (n, planes, frames, bins) float32, raw
        self.phases = phases    # same layout
        self.targets = targets  # (n, 384) float32
        self.mixes = mixes      # (n, 2, frames, bins) complex64
        self.directs = directs  # same layout

    def __len__(self):
        return len(self.ids)

    @property
    def in_planes(self):
        return self.mags.shape[1]

    @classmethod
    def load(cls, manifest_path, split=None, enhancer=None):
        """Read every instance of the manifest (optionally one split); with
        an enhancer the planes double up to contaminated + enhanced.
        """
        manifest_path = Path(manifest_path)
        root = manifest_path.parent
        records = [
            r for r in read_manifest(manifest_path)
            if split is None or r["split"] == split
        ]
        if not records:
            raise ValueError(f"no instances for split {split!r} in {manifest_path}")
        ids = [r["id"] for r in records]
        mixes = np.stack([
            tensor_to_complex(read_tensor(root / r["mixture_path"])) for r in records
        ])
        directs = np.stack([
            tensor_to_complex(read_tensor(root / r["direct_path"])) for r in records
        ])
        targets = np.stack([
            read_tensor(root / r["target_path"]).astype(np.float32) for r in records
        ])
        enhanced = _apply_enhancer(mixes, enhancer) if enhancer is not None else None
        mags, phases = [], []
        for i in range(len(records)):
            m, p = build_planes(mixes[i], None if enhanced is None else enhanced[i])
            mags.append(m)
            phases.append(p)
        return cls(ids, np.stack(mags), np.stack(phases), targets, mixes, directs)
