"""Batched inference and predictions export for the core evaluator."""

import numpy as np
import torch

from .data import InstanceSet, standardize
from .io import write_predictions
from .train import load_checkpoint


def predict_vectors(model, mags, phases, mean, std, batch=64):
    """Evaluation-mode forward over a plane stack; per-instance outputs do
    not depend on batching.
    """
    model.eval()
    x_mag = torch.from_numpy(standardize(mags, mean, std))
    x_phase = torch.from_numpy(phases)
    outs = []
    with torch.no_grad():
        for start in range(0, x_mag.shape[0], batch):
            outs.append(model(x_mag[start:start + batch],
                              x_phase[start:start + batch]).numpy())
    return np.concatenate(outs)


def predict_to_file(manifest_path, checkpoint_path, out_path, split=None):
    """Predict every instance of the manifest (optionally one split) and
    write the evaluator's JSONL predictions format. Returns the row count.
    """
    model, enhancer, ck = load_checkpoint(checkpoint_path)
    dataset = InstanceSet.load(manifest_path, split=split, enhancer=enhancer)
    if dataset.in_planes != model.in_planes:
        raise ValueError(
            f"checkpoint expects {model.in_planes} planes, dataset builds "
            f"{dataset.in_planes}"
        )
    vecs = predict_vectors(model, dataset.mags, dataset.phases,
                           ck["plane_mean"].numpy(), ck["plane_std"].numpy())
    write_predictions(out_path, zip(dataset.ids, vecs))
    return len(dataset)
