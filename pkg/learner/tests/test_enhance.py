import math
from types import SimpleNamespace

import numpy as np
import pytest
import torch

from dprtflearn import MaskEnhancer, TrainConfig, enhance_monaural, train_enhancer


def random_spec(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)).astype(np.complex64)


def identity_model():
    """Zero the projection and bias it so the mask is exactly 1 + 0j."""
    model = MaskEnhancer()
    with torch.no_grad():
        model.proj.weight.zero_()
        model.proj.bias.zero_()
        model.proj.bias[:model.n_bins] = math.atanh(0.1)
    model.trained.fill_(True)
    return model


def test_untrained_model_is_refused():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        enhance_monaural(random_spec(rng, (31, 128)), MaskEnhancer())


def test_identity_mask_returns_input():
    rng = np.random.default_rng(1)
    spec = random_spec(rng, (2, 31, 128))
    out = enhance_monaural(spec, identity_model())
    assert out.shape == spec.shape
    assert np.allclose(out, spec, rtol=1e-5, atol=1e-6)


def test_single_channel_shape():
    rng = np.random.default_rng(2)
    spec = random_spec(rng, (31, 128))
    out = enhance_monaural(spec, identity_model())
    assert out.shape == (31, 128)


def test_wrong_bin_count_rejected():
    rng = np.random.default_rng(3)
    with pytest.raises(ValueError):
        enhance_monaural(random_spec(rng, (31, 64)), identity_model())


def test_channels_share_one_model():
    torch.manual_seed(7)
    model = MaskEnhancer()
    model.trained.fill_(True)
    rng = np.random.default_rng(4)
    spec = random_spec(rng, (2, 31, 128))
    both = enhance_monaural(spec, model)
    for c in range(2):
        alone = enhance_monaural(spec[c], model)
        assert np.allclose(both[c], alone, atol=1e-6)


def test_mask_is_bounded():
    torch.manual_seed(8)
    model = MaskEnhancer()
    rng = np.random.default_rng(5)
    spec = torch.from_numpy(random_spec(rng, (3, 31, 128)) * 100.0)
    with torch.no_grad():
        mask = model.complex_mask(spec)
    assert mask.real.abs().max() <= 10.0
    assert mask.imag.abs().max() <= 10.0


def test_training_reduces_loss_and_sets_flag():
    rng = np.random.default_rng(6)
    directs = random_spec(rng, (8, 2, 31, 128))
    mixes = directs + 0.5 * random_spec(rng, (8, 2, 31, 128))
    dataset = SimpleNamespace(mixes=mixes, directs=directs)
    model, history = train_enhancer(dataset, TrainConfig(epochs=8, seed=9))
    assert bool(model.trained)
    assert history[-1] < history[0]
    # the flag and feature stats survive a state-dict round trip
    clone = MaskEnhancer()
    clone.load_state_dict(model.state_dict())
    assert bool(clone.trained)
    assert torch.equal(clone.feat_mean, model.feat_mean)
