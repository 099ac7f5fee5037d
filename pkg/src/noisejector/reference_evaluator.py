"""Tiny fixed evaluator speaking the wire protocol, for conformance tests.

Run with ``python -m noisejector.reference_evaluator``.  Dimension 8, three
patches, deterministic closed-form scores::

    quality(z) = 5 - ||z - 0.25||^2
    patches(z) = [1 - z_0^2, 1 - 0.5 ||z||^2, 1]

which makes the zero-noise baseline quality 4.5 and baseline realism 1.0.
It answers malformed or unknown requests with error messages and keeps
serving, and exits 0 on shutdown — exactly what `noisejector protocol-check`
expects from a well-behaved evaluator.
"""

from __future__ import annotations

import json
import sys

DIMENSION = 8
BLUR = 1.25
MAX_INFLIGHT = 4


def _scores(z: list[float]) -> tuple[float, list[float]]:
    quality = 5.0 - sum((v - 0.25) ** 2 for v in z)
    norm2 = sum(v * v for v in z)
    patches = [1.0 - z[0] ** 2, 1.0 - 0.5 * norm2, 1.0]
    return quality, patches


def _valid_vector(value) -> bool:
    return (
        isinstance(value, list)
        and len(value) == DIMENSION
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
        and all(abs(float(v)) < float("inf") and float(v) == float(v) for v in value)
    )


def _reply(message: dict) -> None:
    sys.stdout.write(json.dumps(message, allow_nan=False, separators=(",", ":")) + "\n")
    sys.stdout.flush()


def _error(request_id, code: str) -> None:
    _reply({"type": "error", "id": request_id, "code": code})


def main() -> int:
    print("reference evaluator ready", file=sys.stderr, flush=True)
    quality0, patches0 = _scores([0.0] * DIMENSION)
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
            if not isinstance(request, dict):
                raise ValueError("not an object")
        except ValueError:
            _error(None, "malformed")
            continue
        rtype = request.get("type")
        request_id = request.get("id")
        if rtype == "init":
            _reply(
                {
                    "type": "init_ok",
                    "dim": DIMENSION,
                    "patches": len(patches0),
                    "baseline_quality": quality0,
                    "baseline_realism": min(patches0),
                    "blur": BLUR,
                    "supports_gradient": False,
                    "max_inflight": MAX_INFLIGHT,
                }
            )
        elif rtype == "eval":
            if not isinstance(request_id, int) or not _valid_vector(request.get("z")):
                _error(request_id if isinstance(request_id, int) else None, "bad_request")
                continue
            quality, patches = _scores([float(v) for v in request["z"]])
            _reply(
                {"type": "eval_ok", "id": request_id, "quality": quality, "realism_patches": patches}
            )
        elif rtype == "grad":
            _error(request_id if isinstance(request_id, int) else None, "unsupported")
        elif rtype == "shutdown":
            return 0
        else:
            _error(request_id if isinstance(request_id, int) else None, "unsupported")
    return 0


if __name__ == "__main__":
    sys.exit(main())
