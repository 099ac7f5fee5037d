"""Line-delimited JSON wire format shared by the client and fixtures.

One UTF-8 JSON object per line over the child's stdin/stdout:

    -> {"type": "init"}
    <- {"type": "init_ok", "dim": D, "patches": P, "baseline_quality": q0,
        "baseline_realism": r0, "blur": B, "supports_gradient": false,
        "max_inflight": 1}          # max_inflight optional, default 4
    -> {"type": "eval", "id": 17, "z": [... D reals ...]}
    <- {"type": "eval_ok", "id": 17, "quality": q, "realism_patches": [...]}
    -> {"type": "grad", "id": 18, "z": [...]}
    <- {"type": "grad_ok", "id": 18, "g": [... D reals ...]}
       or {"type": "error", "id": 18, "code": "unsupported"}
    -> {"type": "shutdown"}   then EOF.

All reals are JSON numbers round-tripping 64-bit floats; NaN/Infinity are
rejected on both directions.
"""

from __future__ import annotations

import json
import math
from typing import Any

__all__ = ["dumps_line", "parse_line", "WireFormatError"]


class WireFormatError(ValueError):
    """A line did not parse as a single finite-number JSON object."""


def _reject_constant(text: str) -> float:
    raise WireFormatError(f"non-finite JSON constant {text!r} is not allowed on the wire")


def dumps_line(message: dict[str, Any]) -> str:
    """Serialize one protocol message to a newline-terminated JSON line."""
    return json.dumps(message, allow_nan=False, separators=(",", ":")) + "\n"


def parse_line(line: str) -> dict[str, Any]:
    """Parse one protocol line into a message dict."""
    try:
        message = json.loads(line, parse_constant=_reject_constant)
    except WireFormatError:
        raise
    except json.JSONDecodeError as exc:
        raise WireFormatError(f"malformed JSON line: {exc}") from exc
    if not isinstance(message, dict):
        raise WireFormatError(f"protocol message must be a JSON object, got {type(message).__name__}")
    if not isinstance(message.get("type"), str):
        raise WireFormatError("protocol message is missing a string 'type' field")
    return message


def require_finite_number(message: dict, key: str) -> float:
    value = message.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise WireFormatError(f"field {key!r} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise WireFormatError(f"field {key!r} must be finite, got {value!r}")
    return value


def require_finite_vector(message: dict, key: str) -> list[float]:
    value = message.get(key)
    if not isinstance(value, list) or not value:
        raise WireFormatError(f"field {key!r} must be a non-empty array")
    out = []
    for item in value:
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise WireFormatError(f"field {key!r} must contain numbers only")
        item = float(item)
        if not math.isfinite(item):
            raise WireFormatError(f"field {key!r} contains a non-finite value")
        out.append(item)
    return out
