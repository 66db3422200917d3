"""Binaural sound-source localization toolkit.

Direct-path relative transfer function features on a fixed 16 kHz STFT
band, spherical-head HRIR synthesis, image-method room simulation with
diffuse-noise mixing, dictionary-matching localization, and a
deterministic dataset factory with CLI plumbing.
"""

from .datagen import (
    GenConfig,
    evaluate_predictions,
    generate_dataset,
    read_manifest,
    read_tensor,
    synth_source,
    tensor_to_complex,
    write_tensor,
)
from .dprtf import (
    Dictionary,
    average_dictionary,
    build_dictionary,
    dprtf_complex,
    encode_real,
    load_dictionary,
    match_doa,
    save_dictionary,
)
from .errors import FormatError, ValidationError
from .estimators import dprtf_errors, estimate_dprtf_cpsd, gcc_phat, vad_mask
from .hrir import (
    HrirSet,
    default_grid,
    direct_path_tf,
    load_hrir_set,
    save_hrir_set,
    synth_spherical_head,
)
from .metrics import accuracy, mae, make_report, pd_far, sdr
from .roomsim import (
    Brir,
    RoomConfig,
    generate_diffuse_noise,
    mix_at_snr,
    render_direct,
    render_source,
    rt60_to_reflectivity,
    schroeder_rt60,
    simulate_brir,
)
from .signals import Spectrogram, StftConfig, select_band, stft_forward, stft_inverse

__all__ = [
    "Brir",
    "Dictionary",
    "FormatError",
    "GenConfig",
    "HrirSet",
    "RoomConfig",
    "Spectrogram",
    "StftConfig",
    "ValidationError",
    "accuracy",
    "average_dictionary",
    "build_dictionary",
    "default_grid",
    "direct_path_tf",
    "dprtf_complex",
    "dprtf_errors",
    "encode_real",
    "estimate_dprtf_cpsd",
    "evaluate_predictions",
    "gcc_phat",
    "generate_dataset",
    "generate_diffuse_noise",
    "load_dictionary",
    "load_hrir_set",
    "mae",
    "make_report",
    "match_doa",
    "mix_at_snr",
    "pd_far",
    "read_manifest",
    "read_tensor",
    "render_direct",
    "render_source",
    "rt60_to_reflectivity",
    "save_dictionary",
    "save_hrir_set",
    "schroeder_rt60",
    "sdr",
    "select_band",
    "simulate_brir",
    "stft_forward",
    "stft_inverse",
    "synth_source",
    "synth_spherical_head",
    "tensor_to_complex",
    "vad_mask",
    "write_tensor",
]
