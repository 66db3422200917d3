"""Monaural mask-based enhancement.

A small recurrent net maps the log-magnitude of one channel to a bounded
complex ratio mask per TF bin. Both channels of a binaural instance pass
through the same model independently. Training approximates the stored
direct-path spectrogram, so the mask does noise reduction and
dereverberation in one step.
"""

import numpy as np
import torch
from torch import nn

MASK_LIMIT = 10.0
LOG_FLOOR = 1e-7


class MaskEnhancer(nn.Module):
    def __init__(self, n_bins=128, hidden=128, num_layers=2):
        super().__init__()
        self.n_bins = n_bins
        self.gru = nn.GRU(n_bins, hidden, num_layers=num_layers, batch_first=True)
        self.proj = nn.Linear(hidden, 2 * n_bins)
        # feature standardization and the trained flag travel with the weights
        self.register_buffer("feat_mean", torch.zeros(()))
        self.register_buffer("feat_std", torch.ones(()))
        self.register_buffer("trained", torch.tensor(False))

    def set_feature_stats(self, mean, std):
        self.feat_mean.fill_(float(mean))
        self.feat_std.fill_(max(float(std), 1e-6))

    def complex_mask(self, spec):
        # spec: complex (batch, frames, bins)
        feats = (torch.log(spec.abs() + LOG_FLOOR) - self.feat_mean) / self.feat_std
        h, _ = self.gru(feats)
        raw = self.proj(h)
        re = MASK_LIMIT * torch.tanh(raw[..., :self.n_bins])
        im = MASK_LIMIT * torch.tanh(raw[..., self.n_bins:])
        return torch.complex(re, im)

    def forward(self, spec):
        return self.complex_mask(spec) * spec


def enhance_monaural(spec, model):
    """Apply a trained enhancer to one channel (frames, bins) or to a
    channel stack (channels, frames, bins); channels are processed
    independently by the same model.
    """
    if not bool(model.trained):
        raise ValueError("enhancement model has not been trained")
    arr = np.asarray(spec)
    single = arr.ndim == 2
    if single:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[-1] != model.n_bins:
        raise ValueError(f"expected (..., frames, {model.n_bins}) complex spectrogram")
    model.eval()
    with torch.no_grad():
        out = model(torch.from_numpy(arr.astype(np.complex64))).numpy()
    return out[0] if single else out
