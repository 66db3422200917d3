"""Deterministic dataset factory plus artifact serialization and evaluation.

Every instance draws its conditions from an RNG seeded by
sha256("{master_seed}:{instance_id}"), so the bytes on disk depend only on
the config, never on worker count or scheduling. Tensors go to per-instance
DPT1 files and the manifest is written once by the coordinator.
"""

import hashlib
import json
import math
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .dprtf import dprtf_complex, encode_real, match_doa
from .errors import FormatError, ValidationError
from .hrir import default_grid, direct_path_tf, synth_spherical_head
from .metrics import accuracy, mae, make_report
from .roomsim import (
    RoomConfig,
    generate_diffuse_noise,
    mix_at_snr,
    render_direct,
    render_source,
    rt60_to_reflectivity,
    simulate_brir,
)
from .signals import StftConfig, select_band, stft_forward

TENSOR_MAGIC = b"DPT1"
SPLITS = ("train", "val", "test")

# record form -> generator form; "wav" crops user-supplied recordings instead
_NOISE_KIND_ALIASES = {
    "white": "white",
    "babble": "babble-proxy",
    "babble-proxy": "babble-proxy",
    "factory": "factory-proxy",
    "factory-proxy": "factory-proxy",
    "wav": "wav",
}


# ------------------------------------------------------------ DPT1 tensors

def write_tensor(path, tensor):
    """Serialize an array as DPT1; complex input becomes a trailing (re, im) axis."""
    t = np.asarray(tensor)
    if np.iscomplexobj(t):
        t = np.stack([t.real, t.imag], axis=-1)
    t = np.ascontiguousarray(t, dtype="<f4")
    if t.ndim > 255:
        raise ValidationError("tensor rank exceeds the format's u8 ndim field")
    header = TENSOR_MAGIC + bytes([0, t.ndim])
    header += b"".join(struct.pack("<I", d) for d in t.shape)
    Path(path).write_bytes(header + t.tobytes())


def read_tensor(path):
    raw = Path(path).read_bytes()
    if len(raw) < 6 or raw[:4] != TENSOR_MAGIC:
        raise FormatError(f"{path}: not a DPT1 tensor")
    if raw[4] != 0:
        raise FormatError(f"{path}: unknown dtype byte {raw[4]}")
    ndim = raw[5]
    end = 6 + 4 * ndim
    if len(raw) < end:
        raise FormatError(f"{path}: truncated header")
    dims = struct.unpack("<" + "I" * ndim, raw[6:end])
    count = int(np.prod(dims, dtype=np.int64)) if ndim else 1
    if len(raw) - end != 4 * count:
        raise FormatError(f"{path}: payload length does not match header dims")
    return np.frombuffer(raw, dtype="<f4", offset=end).reshape(dims).copy()


def tensor_to_complex(tensor):
    """Rebuild a complex array from the trailing (re, im) planes."""
    t = np.asarray(tensor)
    if t.ndim < 1 or t.shape[-1] != 2:
        raise ValidationError("complex tensors need a trailing dimension of 2")
    return (t[..., 0] + 1j * t[..., 1]).astype(np.complex64)


# ---------------------------------------------------------------- config

@dataclass(frozen=True)
class HeadSpec:
    head_id: str
    radius_m: float


@dataclass(frozen=True)
class RoomSpec:
    room_id: str
    size_m: tuple
    array_center_m: tuple
    array_yaw_deg: float
    distances_m: tuple
    rt60_choices_s: tuple


@dataclass
class GenConfig:
    master_seed: int
    rooms: tuple
    snr_choices_db: tuple  # math.inf means noise-free (null in JSON)
    noise_kinds: tuple
    heads: dict  # split -> tuple of HeadSpec
    counts: dict  # split -> instances
    max_order: int = 8
    segment_len: int = 8192
    source_wav_dir: str = None
    noise_wav_dir: str = None

    _KEYS = {
        "master_seed", "rooms", "snr_choices_db", "noise_kinds", "heads",
        "counts", "max_order", "segment_len", "source_wav_dir", "noise_wav_dir",
    }

    @classmethod
    def from_dict(cls, d):
        unknown = set(d) - cls._KEYS
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        try:
            rooms = tuple(
                RoomSpec(
                    room_id=str(r["room_id"]),
                    size_m=tuple(float(v) for v in r["size_m"]),
                    array_center_m=tuple(float(v) for v in r["array_center_m"]),
                    array_yaw_deg=float(r.get("array_yaw_deg", 0.0)),
                    distances_m=tuple(float(v) for v in r["distances_m"]),
                    rt60_choices_s=tuple(float(v) for v in r["rt60_choices_s"]),
                )
                for r in d["rooms"]
            )
            heads = {
                split: tuple(HeadSpec(str(h["head_id"]), float(h["radius_m"])) for h in hs)
                for split, hs in d["heads"].items()
            }
            cfg = cls(
                master_seed=int(d["master_seed"]),
                rooms=rooms,
                snr_choices_db=tuple(
                    math.inf if v is None else float(v) for v in d["snr_choices_db"]
                ),
                noise_kinds=tuple(str(k) for k in d["noise_kinds"]),
                heads=heads,
                counts={str(k): int(v) for k, v in d["counts"].items()},
                max_order=int(d.get("max_order", 8)),
                segment_len=int(d.get("segment_len", 8192)),
                source_wav_dir=d.get("source_wav_dir"),
                noise_wav_dir=d.get("noise_wav_dir"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad generation config: {exc}") from exc
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path):
        try:
            with open(path, "r", encoding="utf-8") as fh:
                d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON: {exc}") from exc
        return cls.from_dict(d)

    def validate(self):
        if self.master_seed < 0:
            raise ValidationError("master_seed must be non-negative")
        if not self.counts:
            raise ValidationError("counts must name at least one split")
        for split, n in self.counts.items():
            if split not in SPLITS:
                raise ValidationError(f"unknown split {split!r}")
            if n < 1:
                raise ValidationError(f"counts[{split!r}] must be >= 1")
            if not self.heads.get(split):
                raise ValidationError(f"no heads configured for split {split!r}")
        seen = {}
        for split, hs in self.heads.items():
            for h in hs:
                if h.head_id in seen:
                    raise ValidationError(
                        f"head {h.head_id!r} appears in both {seen[h.head_id]!r} and {split!r}"
                    )
                seen[h.head_id] = split
                if h.radius_m <= 0:
                    raise ValidationError("head radius must be positive")
        if not self.rooms:
            raise ValidationError("at least one room is required")
        for room in self.rooms:
            if not room.distances_m or any(d <= 0 for d in room.distances_m):
                raise ValidationError(f"room {room.room_id!r} needs positive distances")
            if not room.rt60_choices_s:
                raise ValidationError(f"room {room.room_id!r} needs rt60 choices")
            for rt60 in room.rt60_choices_s:
                # raises for negative rt60 and Sabine-infeasible combinations
                rt60_to_reflectivity(room.size_m, rt60)
            RoomConfig(
                size_m=room.size_m,
                rt60_s=room.rt60_choices_s[0],
                array_center_m=room.array_center_m,
                array_yaw_deg=room.array_yaw_deg,
            )
        if not self.snr_choices_db:
            raise ValidationError("snr_choices_db must be non-empty")
        if not self.noise_kinds:
            raise ValidationError("noise_kinds must be non-empty")
        for kind in self.noise_kinds:
            if kind not in _NOISE_KIND_ALIASES:
                raise ValidationError(f"unknown noise kind {kind!r}")
            if _NOISE_KIND_ALIASES[kind] == "wav" and not self.noise_wav_dir:
                raise ValidationError("noise kind 'wav' needs noise_wav_dir")
        if self.max_order < 0:
            raise ValidationError("max_order must be >= 0")
        if self.segment_len < 512:
            raise ValidationError("segment_len must cover at least one STFT window")


# ------------------------------------------------------------- generation

def _instance_rng(master_seed, instance_id):
    digest = hashlib.sha256(f"{master_seed}:{instance_id}".encode("utf-8")).digest()
    return np.random.default_rng(int.from_bytes(digest, "big"))


def synth_source(rng, n_samples, fs):
    """Speech-like test source: tilted noise under on/off burst envelopes.

    -6 dB/octave above 500 Hz approximates the long-term speech slope; the
    envelope always starts voiced so rendered instances carry energy.
    """
    white = rng.standard_normal(n_samples)
    freqs = np.fft.rfftfreq(n_samples, 1.0 / fs)
    shaped = np.fft.irfft(np.fft.rfft(white) / np.sqrt(1.0 + (freqs / 500.0) ** 2), n_samples)
    env = np.zeros(n_samples)
    pos = 0
    voiced = True
    while pos < n_samples:
        dur_s = rng.uniform(0.08, 0.3) if voiced else rng.uniform(0.03, 0.12)
        seg = max(1, int(dur_s * fs))
        if voiced:
            env[pos:pos + seg] = 1.0
        pos += seg
        voiced = not voiced
    edge = int(0.005 * fs)
    if edge > 1:
        kernel = np.hanning(2 * edge + 1)
        env = np.convolve(env, kernel / kernel.sum(), mode="same")
    x = shaped * env
    return x / math.sqrt(float(x @ x) / n_samples)


def _load_wav(path, fs):
    rate, data = wavfile.read(path)
    if rate != fs:
        raise ValidationError(f"{path}: sample rate {rate} != {fs}")
    if data.dtype.kind == "i":
        data = data / float(2 ** (8 * data.dtype.itemsize - 1))
    return np.asarray(data, dtype=np.float64)


def _wav_crop(rng, wav_dir, n_samples, fs, channels):
    files = sorted(Path(wav_dir).glob("*.wav"))
    if not files:
        raise ValidationError(f"no .wav files in {wav_dir}")
    data = _load_wav(files[int(rng.integers(len(files)))], fs)
    if channels == 1:
        if data.ndim == 2:
            data = data[:, 0]
        if len(data) < n_samples:
            raise ValidationError("wav file shorter than the segment length")
        start = int(rng.integers(len(data) - n_samples + 1))
        crop = data[start:start + n_samples]
    else:
        if data.ndim != 2 or data.shape[1] < 2:
            raise ValidationError("noise wav files must have 2 channels")
        if data.shape[0] < n_samples:
            raise ValidationError("wav file shorter than the segment length")
        start = int(rng.integers(data.shape[0] - n_samples + 1))
        crop = data[start:start + n_samples, :2].T
    if not np.any(crop):
        raise ValidationError("wav crop has no energy")
    return crop


@lru_cache(maxsize=None)
def _head(head_id, radius_m):
    return synth_spherical_head(radius_m, head_id=head_id)


def _generate_one(task):
    cfg, split, index, out_dir = task
    instance_id = f"{split}-{index:06d}"
    rng = _instance_rng(cfg.master_seed, instance_id)

    room = cfg.rooms[int(rng.integers(len(cfg.rooms)))]
    heads = cfg.heads[split]
    head = heads[int(rng.integers(len(heads)))]
    grid = default_grid()
    theta = float(grid[int(rng.integers(len(grid)))])
    distance = float(room.distances_m[int(rng.integers(len(room.distances_m)))])
    rt60 = float(room.rt60_choices_s[int(rng.integers(len(room.rt60_choices_s)))])
    snr = float(cfg.snr_choices_db[int(rng.integers(len(cfg.snr_choices_db)))])
    kind = cfg.noise_kinds[int(rng.integers(len(cfg.noise_kinds)))]
    noise_seed = int(rng.integers(0, 2 ** 63))

    hset = _head(head.head_id, head.radius_m)
    stft_cfg = StftConfig(fs=hset.fs)
    if cfg.source_wav_dir:
        source = _wav_crop(rng, cfg.source_wav_dir, cfg.segment_len, hset.fs, channels=1)
    else:
        source = synth_source(rng, cfg.segment_len, hset.fs)

    room_cfg = RoomConfig(
        size_m=room.size_m,
        rt60_s=rt60,
        array_center_m=room.array_center_m,
        array_yaw_deg=room.array_yaw_deg,
    )
    brir = simulate_brir(room_cfg, theta, distance, hset, max_order=cfg.max_order)
    mixture = render_source(brir, source)
    direct = render_direct(brir, source)
    record_kind = _NOISE_KIND_ALIASES[kind]
    if math.isfinite(snr):
        if record_kind == "wav":
            noise = _wav_crop(rng, cfg.noise_wav_dir, mixture.shape[1], hset.fs, channels=2)
        else:
            noise = generate_diffuse_noise(
                mixture.shape[1],
                2.0 * head.radius_m,
                record_kind.replace("-proxy", ""),
                seed=noise_seed,
                config=stft_cfg,
            )
        mixture = mix_at_snr(mixture, noise, snr)

    spec_mix = select_band(stft_forward(mixture, stft_cfg))
    spec_dir = select_band(stft_forward(direct, stft_cfg))
    target = encode_real(dprtf_complex(direct_path_tf(hset, theta, stft_cfg)))

    paths = {
        "mixture_path": f"tensors/{instance_id}.mix.dpt",
        "direct_path": f"tensors/{instance_id}.dir.dpt",
        "target_path": f"tensors/{instance_id}.tgt.dpt",
    }
    out = Path(out_dir)
    write_tensor(out / paths["mixture_path"], spec_mix.data)
    write_tensor(out / paths["direct_path"], spec_dir.data)
    write_tensor(out / paths["target_path"], target)

    return {
        "id": instance_id,
        "theta_deg": theta,
        "rt60_s": rt60,
        "snr_db": None if math.isinf(snr) else snr,
        "room_id": room.room_id,
        "head_id": head.head_id,
        "distance_m": distance,
        "noise_kind": record_kind,
        "split": split,
        **paths,
    }


def generate_dataset(cfg, out_dir, jobs=1):
    """Generate all configured instances under out_dir; returns the manifest path."""
    cfg.validate()
    out = Path(out_dir)
    (out / "tensors").mkdir(parents=True, exist_ok=True)
    tasks = [
        (cfg, split, i, str(out))
        for split in SPLITS
        if split in cfg.counts
        for i in range(cfg.counts[split])
    ]
    if jobs <= 1:
        records = [_generate_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_generate_one, tasks))
    records.sort(key=lambda r: r["id"])
    manifest = out / "manifest.jsonl"
    with open(manifest, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")
    return manifest


# ------------------------------------------------------------- evaluation

def read_manifest(path):
    """Manifest records as a list of dicts, in file order."""
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}: bad manifest line: {exc}") from exc
    return records


def evaluate_predictions(manifest_path, predictions_path, dictionary):
    """Score a predictions file against manifest truth via dictionary matching.

    Returns {"overall": report, "strata": [reports]} with strata keyed by
    (rt60_s, snr_db, distance_m).
    """
    records = {r["id"]: r for r in read_manifest(manifest_path)}
    want_len = 3 * dictionary.n_bins
    scored = []
    with open(predictions_path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
                instance_id = row["id"]
                vec = np.asarray(row["dprtf"], dtype=np.float64)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"{predictions_path}: bad prediction line: {exc}") from exc
            record = records.get(instance_id)
            if record is None:
                raise ValidationError(f"prediction id {instance_id!r} not in manifest")
            if vec.shape != (want_len,):
                raise ValidationError(
                    f"prediction {instance_id!r} has length {vec.size}, expected {want_len}"
                )
            scored.append((record, match_doa(vec, dictionary)))
    if not scored:
        raise ValidationError("predictions file contains no predictions")

    def condition_key(record):
        return (record["rt60_s"], record["snr_db"], record["distance_m"])

    est_all = [est for _, est in scored]
    truth_all = [rec["theta_deg"] for rec, _ in scored]
    overall = make_report(
        acc=accuracy(est_all, truth_all),
        mae_deg=mae(est_all, truth_all),
        n_instances=len(scored),
        condition={},
    )
    strata = []
    groups = {}
    for rec, est in scored:
        groups.setdefault(condition_key(rec), []).append((est, rec["theta_deg"]))
    sort_key = lambda k: (k[0], math.inf if k[1] is None else k[1], k[2])
    for key in sorted(groups, key=sort_key):
        pairs = groups[key]
        est = [p[0] for p in pairs]
        tru = [p[1] for p in pairs]
        strata.append(
            make_report(
                acc=accuracy(est, tru),
                mae_deg=mae(est, tru),
                n_instances=len(pairs),
                condition={"rt60_s": key[0], "snr_db": key[1], "distance_m": key[2]},
            )
        )
    return {"overall": overall, "strata": strata}
