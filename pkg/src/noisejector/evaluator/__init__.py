"""Evaluator boundary: handle contract, built-ins, and the wire-protocol client."""

from __future__ import annotations

from .base import Capabilities, EvaluatorHandle
from .errors import (
    EvaluatorError,
    EvaluatorExitError,
    EvaluatorSpawnError,
    EvaluatorTimeoutError,
    GradientUnsupportedError,
    ProtocolError,
    RemoteEvaluatorError,
)
from .external import ExternalEvaluatorHandle, open_external
from .synthetic import (
    SyntheticEvaluatorSpec,
    SyntheticHandle,
    SyntheticKind,
    builtin_spec_from_identifier,
    open_builtin,
)

__all__ = [
    "Capabilities",
    "EvaluatorHandle",
    "EvaluatorError",
    "EvaluatorSpawnError",
    "EvaluatorTimeoutError",
    "ProtocolError",
    "EvaluatorExitError",
    "RemoteEvaluatorError",
    "GradientUnsupportedError",
    "SyntheticKind",
    "SyntheticEvaluatorSpec",
    "SyntheticHandle",
    "open_builtin",
    "builtin_spec_from_identifier",
    "ExternalEvaluatorHandle",
    "open_external",
    "open_evaluator",
]


def open_evaluator(identifier: str, *, stderr_path=None, **external_options) -> EvaluatorHandle:
    """Open an evaluator from a CLI-style identifier.

    ``builtin:NAME[?dim=..&seed=..&key=value]`` opens a synthetic evaluator;
    ``exec:COMMAND`` spawns an external process speaking the wire protocol.
    """
    if identifier.startswith("builtin:"):
        return open_builtin(builtin_spec_from_identifier(identifier[len("builtin:"):]))
    if identifier.startswith("exec:"):
        command = identifier[len("exec:"):]
        return open_external(command, stderr_path=stderr_path, **external_options)
    raise ValueError(
        f"evaluator identifier must start with 'builtin:' or 'exec:', got {identifier!r}"
    )
