"""Report serialization: canonical JSON, noise-vector sidecar files, schemas.

Reports are data; rendering beyond an aligned text table is left to
consumers.  The recommended noise vector is stored next to the JSON report
as a little-endian binary sidecar (uint64 length prefix, then float64
values) because inlining tens of thousands of floats bloats the report.
"""

from __future__ import annotations

import json
import struct
from importlib import resources
from pathlib import Path

import numpy as np

__all__ = [
    "SCHEMA_VERSION",
    "dumps_report",
    "write_report",
    "write_noise_vector",
    "read_noise_vector",
    "load_schema",
]

SCHEMA_VERSION = 1

_LENGTH_PREFIX = struct.Struct("<Q")


def dumps_report(payload: dict) -> str:
    """Canonical report serialization (stable bytes for identical payloads)."""
    return json.dumps(payload, allow_nan=False, indent=2, sort_keys=False) + "\n"


def write_report(path, payload: dict) -> None:
    Path(path).write_text(dumps_report(payload), encoding="utf-8")


def write_noise_vector(path, z: np.ndarray) -> None:
    z = np.ascontiguousarray(z, dtype="<f8")
    if z.ndim != 1:
        raise ValueError(f"noise vector must be 1-D, got shape {z.shape}")
    with open(path, "wb") as fh:
        fh.write(_LENGTH_PREFIX.pack(z.size))
        fh.write(z.tobytes())


def read_noise_vector(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < _LENGTH_PREFIX.size:
        raise ValueError(f"{path}: truncated noise-vector file")
    (count,) = _LENGTH_PREFIX.unpack_from(raw)
    expected = _LENGTH_PREFIX.size + 8 * count
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes for {count} values, got {len(raw)}")
    return np.frombuffer(raw, dtype="<f8", offset=_LENGTH_PREFIX.size).astype(np.float64)


def load_schema(name: str) -> dict:
    """Load a shipped report schema by name ('run', 'bench', or 'ablate')."""
    text = resources.files("noisejector.schemas").joinpath(f"{name}_report.schema.json").read_text()
    return json.loads(text)
