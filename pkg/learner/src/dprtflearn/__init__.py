"""Neural DP-RTF regression over stored binaural spectrogram datasets."""

from .data import InstanceSet, build_planes, log_mag, plane_stats, standardize
from .enhance import LOG_FLOOR, MASK_LIMIT, MaskEnhancer, enhance_monaural
from .io import (
    FEATURE_LEN,
    FormatError,
    read_manifest,
    read_tensor,
    tensor_to_complex,
    write_predictions,
    write_tensor,
)
from .net import DpRtfNet, SinCos
from .predict import predict_to_file, predict_vectors
from .synthesis import istft, sdr
from .train import (
    TrainConfig,
    load_checkpoint,
    save_checkpoint,
    train_dprtf,
    train_enhancer,
)

__all__ = [
    "FEATURE_LEN",
    "FormatError",
    "InstanceSet",
    "LOG_FLOOR",
    "MASK_LIMIT",
    "MaskEnhancer",
    "DpRtfNet",
    "SinCos",
    "TrainConfig",
    "build_planes",
    "enhance_monaural",
    "istft",
    "load_checkpoint",
    "log_mag",
    "plane_stats",
    "predict_to_file",
    "predict_vectors",
    "read_manifest",
    "read_tensor",
    "save_checkpoint",
    "sdr",
    "standardize",
    "tensor_to_complex",
    "train_dprtf",
    "train_enhancer",
    "write_predictions",
    "write_tensor",
]
