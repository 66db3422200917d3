"""Artifact plumbing: DPT1 tensors, JSONL manifests, JSONL predictions.

These formats are the entire boundary to the core toolkit, so they are
implemented here directly rather than imported from it.
"""

import json
import struct
from pathlib import Path

import numpy as np

TENSOR_MAGIC = b"DPT1"
FEATURE_LEN = 384


class FormatError(Exception):
    """Raised for malformed artifact files."""


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


def write_tensor(path, array):
    t = np.ascontiguousarray(np.asarray(array, dtype="<f4"))
    header = TENSOR_MAGIC + bytes([0, t.ndim])
    header += b"".join(struct.pack("<I", d) for d in t.shape)
    Path(path).write_bytes(header + t.tobytes())


def tensor_to_complex(tensor):
    """Rebuild a complex array from trailing (re, im) planes."""
    t = np.asarray(tensor)
    if t.ndim < 1 or t.shape[-1] != 2:
        raise FormatError("complex tensors need a trailing dimension of 2")
    return (t[..., 0] + 1j * t[..., 1]).astype(np.complex64)


def read_manifest(path):
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
    return records


def write_predictions(path, rows):
    """Write (instance_id, vector) pairs in the evaluator's JSONL format."""
    with open(path, "w", encoding="utf-8") as fh:
        for instance_id, vec in rows:
            vec = np.asarray(vec, dtype=np.float64).ravel()
            if vec.shape[0] != FEATURE_LEN:
                raise ValueError(
                    f"prediction for {instance_id!r} has length {vec.shape[0]}, "
                    f"expected {FEATURE_LEN}"
                )
            fh.write(json.dumps({"id": str(instance_id), "dprtf": vec.tolist()}) + "\n")
