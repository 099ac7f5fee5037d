"""Evaluator error hierarchy; the CLI maps these to distinct exit codes."""

from __future__ import annotations

__all__ = [
    "EvaluatorError",
    "EvaluatorSpawnError",
    "EvaluatorTimeoutError",
    "ProtocolError",
    "EvaluatorExitError",
    "RemoteEvaluatorError",
    "GradientUnsupportedError",
]


class EvaluatorError(RuntimeError):
    """Base class for evaluator-side failures."""


class EvaluatorSpawnError(EvaluatorError):
    """The external evaluator process could not be started (exit code 3)."""


class EvaluatorTimeoutError(EvaluatorError):
    """Handshake or evaluation deadline missed (exit code 5)."""


class ProtocolError(EvaluatorError):
    """Malformed message, mismatched id, or other wire-contract breach (exit code 4)."""


class EvaluatorExitError(ProtocolError):
    """The child process exited while requests were outstanding; carries stderr."""

    def __init__(self, message: str, returncode: int | None = None, stderr_tail: str = ""):
        super().__init__(message)
        self.returncode = returncode
        self.stderr_tail = stderr_tail


class RemoteEvaluatorError(EvaluatorError):
    """The evaluator answered a request with an error message."""

    def __init__(self, code: str, message: str = ""):
        super().__init__(message or f"evaluator returned error code {code!r}")
        self.code = code


class GradientUnsupportedError(RemoteEvaluatorError):
    """Gradient requested from an evaluator that does not supply one."""

    def __init__(self) -> None:
        super().__init__("unsupported", "evaluator does not support gradients")
