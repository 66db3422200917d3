"""Training loops and checkpoints for the enhancer and the regressor."""

from dataclasses import asdict, dataclass

import numpy as np
import torch
from torch import nn

from .data import plane_stats, standardize
from .enhance import LOG_FLOOR, MaskEnhancer
from .net import DpRtfNet


@dataclass
class TrainConfig:
    epochs: int
    lr: float = 1e-3
    batch_size: int = 32
    seed: int = 0
    stop_mse: float = None  # stop once the epoch-average loss dips below


def train_enhancer(dataset, cfg, log=None):
    """Fit the monaural enhancer on every channel of the training set,
    approximating the stored direct-path spectrograms.
    """
    torch.manual_seed(cfg.seed)
    n_bins = dataset.mixes.shape[-1]
    model = MaskEnhancer(n_bins=n_bins)

    feats = np.log(np.abs(dataset.mixes) + LOG_FLOOR)
    model.set_feature_stats(feats.mean(), feats.std())

    frames = dataset.mixes.shape[2]
    x = torch.from_numpy(dataset.mixes.reshape(-1, frames, n_bins))
    y = torch.from_numpy(dataset.directs.reshape(-1, frames, n_bins))
    gen = torch.Generator().manual_seed(cfg.seed + 1)
    opt = torch.optim.Adam(model.parameters(), lr=cfg.lr)

    history = []
    model.train()
    for epoch in range(cfg.epochs):
        perm = torch.randperm(x.shape[0], generator=gen)
        total = 0.0
        for start in range(0, x.shape[0], cfg.batch_size):
            idx = perm[start:start + cfg.batch_size]
            out = model(x[idx])
            loss = nn.functional.mse_loss(
                torch.view_as_real(out), torch.view_as_real(y[idx])
            )
            opt.zero_grad()
            loss.backward()
            opt.step()
            total += loss.item() * idx.shape[0]
        epoch_loss = total / x.shape[0]
        history.append(epoch_loss)
        if log:
            log(epoch, epoch_loss)
        if cfg.stop_mse is not None and epoch_loss < cfg.stop_mse:
            break
    model.trained.fill_(True)
    return model, history


def save_checkpoint(path, model, optimizer, shuffle_gen, epoch, history,
                    plane_mean, plane_std, cfg, enhancer=None):
    torch.save({
        "in_planes": model.in_planes,
        "model": model.state_dict(),
        "optimizer": optimizer.state_dict(),
        "shuffle_gen": shuffle_gen.get_state(),
        "rng_torch": torch.get_rng_state(),
        "epoch": epoch,
        "history": list(history),
        "plane_mean": torch.from_numpy(np.asarray(plane_mean)),
        "plane_std": torch.from_numpy(np.asarray(plane_std)),
        "enhancer": None if enhancer is None else enhancer.state_dict(),
        "config": asdict(cfg),
    }, path)


def load_checkpoint(path):
    """Rebuild the regressor (and the frozen enhancer, if stored) in
    evaluation mode, plus the raw checkpoint dict.
    """
    ck = torch.load(path)
    model = DpRtfNet(in_planes=ck["in_planes"])
    model.load_state_dict(ck["model"])
    model.eval()
    enhancer = None
    if ck["enhancer"] is not None:
        enhancer = MaskEnhancer()
        enhancer.load_state_dict(ck["enhancer"])
        enhancer.eval()
    return model, enhancer, ck


def train_dprtf(dataset, cfg, checkpoint_path=None, enhancer=None,
                resume_from=None, log=None):
    """Fit the regressor on an in-memory InstanceSet with MSE loss.

    Standardization statistics come from this dataset and ride along in the
    checkpoint. Resuming restores the model, optimizer, and shuffle state,
    so a split run reproduces an unbroken one exactly; pass the same config
    with cfg.epochs set to the new total budget.
    """
    if resume_from is not None:
        ck = torch.load(resume_from)
        model = DpRtfNet(in_planes=ck["in_planes"])
        model.load_state_dict(ck["model"])
        opt = torch.optim.Adam(model.parameters(), lr=cfg.lr)
        opt.load_state_dict(ck["optimizer"])
        gen = torch.Generator()
        gen.set_state(ck["shuffle_gen"])
        torch.set_rng_state(ck["rng_torch"])
        history = list(ck["history"])
        start_epoch = ck["epoch"]
        mean = ck["plane_mean"].numpy()
        std = ck["plane_std"].numpy()
    else:
        torch.manual_seed(cfg.seed)
        model = DpRtfNet(in_planes=dataset.in_planes)
        opt = torch.optim.Adam(model.parameters(), lr=cfg.lr)
        gen = torch.Generator().manual_seed(cfg.seed + 1)
        history = []
        start_epoch = 0
        mean, std = plane_stats(dataset.mags)

    x_mag = torch.from_numpy(standardize(dataset.mags, mean, std))
    x_phase = torch.from_numpy(dataset.phases)
    y = torch.from_numpy(dataset.targets)
    n = len(dataset)

    model.train()
    for epoch in range(start_epoch, cfg.epochs):
        perm = torch.randperm(n, generator=gen)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = perm[start:start + cfg.batch_size]
            out = model(x_mag[idx], x_phase[idx])
            loss = nn.functional.mse_loss(out, y[idx])
            opt.zero_grad()
            loss.backward()
            opt.step()
            total += loss.item() * idx.shape[0]
        epoch_loss = total / n
        history.append(epoch_loss)
        if log:
            log(epoch, epoch_loss)
        if checkpoint_path is not None:
            save_checkpoint(checkpoint_path, model, opt, gen, epoch + 1,
                            history, mean, std, cfg, enhancer=enhancer)
        if cfg.stop_mse is not None and epoch_loss < cfg.stop_mse:
            break
    return model, history, (mean, std)
