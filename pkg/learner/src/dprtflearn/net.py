"""Branched convolutional-recurrent DP-RTF regressor.

Log-magnitude and phase planes enter through separate branches, a
magnitude-driven attention mask gates both, and a shared convolutional
trunk with stepwise frequency pooling feeds a unidirectional GRU whose
final state regresses the 384-element feature through tanh.
"""

import torch
from torch import nn


class SinCos(nn.Module):
    """Doubles the channel axis into paired sine and cosine activations."""

    def forward(self, u):
        return torch.cat((torch.sin(u), torch.cos(u)), dim=1)


def _conv_block(in_ch, out_ch):
    return nn.Sequential(
        nn.Conv2d(in_ch, out_ch, 3, padding=1),
        nn.BatchNorm2d(out_ch),
        nn.ReLU(),
    )


class DpRtfNet(nn.Module):
    """Feature maps are laid out (batch, maps, frames, bins); pooling halves
    the bin axis only, so the frame axis survives intact to the recurrence.
    """

    def __init__(self, in_planes=4, n_bins=128, out_dim=384,
                 trunk_modules=10, pool_every=2, gru_hidden=256):
        super().__init__()
        n_pools = trunk_modules // pool_every
        if n_bins % (1 << n_pools) != 0:
            raise ValueError(f"{n_bins} bins do not survive {n_pools} halvings")
        self.in_planes = in_planes
        self.n_bins = n_bins

        self.mag_in = nn.Sequential(nn.Conv2d(in_planes, 32, 1), nn.Tanh())
        self.mag_conv = _conv_block(32, 64)
        self.phase_in = nn.Sequential(nn.Conv2d(in_planes, 32, 1), SinCos())
        self.phase_conv = _conv_block(64, 64)
        self.mask_net = nn.Sequential(
            _conv_block(in_planes, 64),
            nn.Conv2d(64, 64, 3, padding=1),
            nn.BatchNorm2d(64),
            nn.Sigmoid(),
        )

        trunk = []
        ch = 128
        for i in range(trunk_modules):
            trunk.append(_conv_block(ch, 64))
            ch = 64
            if (i + 1) % pool_every == 0:
                trunk.append(nn.MaxPool2d((1, 2)))
        self.trunk = nn.Sequential(*trunk)

        pooled_bins = n_bins >> n_pools
        self.gru = nn.GRU(64 * pooled_bins, gru_hidden, batch_first=True)
        self.fc = nn.Linear(gru_hidden, out_dim)

    def forward(self, mag, phase):
        if mag.shape != phase.shape:
            raise ValueError("magnitude and phase plane shapes differ")
        if mag.ndim != 4 or mag.shape[1] != self.in_planes or mag.shape[3] != self.n_bins:
            raise ValueError(
                f"expected (batch, {self.in_planes}, frames, {self.n_bins}) planes, "
                f"got {tuple(mag.shape)}"
            )
        gate = self.mask_net(mag)
        m = self.mag_conv(self.mag_in(mag)) * gate
        p = self.phase_conv(self.phase_in(phase)) * gate
        z = self.trunk(torch.cat((m, p), dim=1))
        z = z.permute(0, 2, 1, 3).flatten(2)  # (batch, frames, maps * bins)
        h, _ = self.gru(z)
        return torch.tanh(self.fc(h[:, -1]))
