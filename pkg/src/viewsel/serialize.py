"""Deterministic serialization helpers: canonical JSON, mask RLE, spec
hashes, and PGM heatmaps."""

from __future__ import annotations

import hashlib
import json

import numpy as np


def canonical_json(obj) -> str:
    """Stable JSON text: sorted keys, minimal separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"),
                      allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    with open(path, "w") as f:
        f.write(canonical_json(obj))


def read_json(path):
    with open(path) as f:
        return json.load(f)


def spec_hash(obj) -> str:
    """Short stable hash of a serializable configuration object."""
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()[:16]


def rle_encode(mask: np.ndarray) -> dict:
    """Row-major run-length encoding of a boolean mask. The first run has the
    value of `first`; runs alternate thereafter."""
    flat = np.asarray(mask, dtype=bool).ravel()
    if flat.size == 0:
        return {"shape": list(mask.shape), "first": False, "runs": []}
    changes = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate(([0], changes, [flat.size]))
    runs = np.diff(bounds).tolist()
    return {"shape": list(mask.shape), "first": bool(flat[0]), "runs": runs}


def rle_decode(encoded: dict) -> np.ndarray:
    shape = tuple(encoded["shape"])
    flat = np.zeros(int(np.prod(shape)) if shape else 0, dtype=bool)
    value = bool(encoded["first"])
    pos = 0
    for run in encoded["runs"]:
        flat[pos:pos + run] = value
        pos += run
        value = not value
    return flat.reshape(shape)


def write_pgm(path, values: np.ndarray) -> None:
    """8-bit binary PGM heatmap, max-normalized (flat maps render black)."""
    v = np.asarray(values, dtype=float)
    vmax = v.max()
    img = np.zeros(v.shape, dtype=np.uint8) if vmax <= 0 else \
        np.clip(v / vmax * 255.0, 0, 255).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode())
        f.write(img.tobytes())
