"""Client for external evaluator processes speaking the wire protocol.

One child process serves the whole run; requests are multiplexed over its
stdin/stdout and matched to responses by id, never by order.  Child stderr
is captured verbatim (to the run log file when one is configured).  The
handshake fixes dimension, patch count and baseline for the handle's
lifetime; opening also verifies that evaluate(0) reproduces the handshake
baseline exactly (a determinism-at-zero conformance requirement).
"""

from __future__ import annotations

import itertools
import logging
import shlex
import subprocess
import threading
from collections import deque
from typing import Sequence

import numpy as np

from ..criterion import Baseline, RawEvaluation, as_noise_vector
from .base import Capabilities, EvaluatorHandle
from .errors import (
    EvaluatorExitError,
    EvaluatorSpawnError,
    EvaluatorTimeoutError,
    GradientUnsupportedError,
    ProtocolError,
    RemoteEvaluatorError,
)
from .protocol import (
    WireFormatError,
    dumps_line,
    parse_line,
    require_finite_number,
    require_finite_vector,
)

__all__ = ["ExternalEvaluatorHandle", "open_external"]

logger = logging.getLogger(__name__)

HANDSHAKE_TIMEOUT = 60.0
EVAL_TIMEOUT = 600.0
DEFAULT_WINDOW = 4
_HANDSHAKE_KEY = -1  # init has no id; the reader routes init_ok here


class _Slot:
    __slots__ = ("event", "message", "error")

    def __init__(self) -> None:
        self.event = threading.Event()
        self.message: dict | None = None
        self.error: Exception | None = None


class ExternalEvaluatorHandle(EvaluatorHandle):
    def __init__(
        self,
        command: str | Sequence[str],
        *,
        handshake_timeout: float = HANDSHAKE_TIMEOUT,
        eval_timeout: float = EVAL_TIMEOUT,
        max_inflight: int = DEFAULT_WINDOW,
        stderr_path=None,
    ) -> None:
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        if not argv:
            raise EvaluatorSpawnError("empty evaluator command")
        self.evaluator_id = "exec:" + shlex.join(argv)
        self._eval_timeout = eval_timeout
        self._requested_window = max(1, int(max_inflight))
        self._ids = itertools.count(1)
        self._lock = threading.Lock()
        self._write_lock = threading.Lock()
        self._slots: dict[int, _Slot] = {}
        self._fatal: Exception | None = None
        self._closing = False
        self._stderr_tail: deque[str] = deque(maxlen=200)
        self._stderr_file = open(stderr_path, "w", encoding="utf-8") if stderr_path else None
        self.stderr_path = str(stderr_path) if stderr_path else None

        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            if self._stderr_file:
                self._stderr_file.close()
            raise EvaluatorSpawnError(f"could not spawn evaluator {argv!r}: {exc}") from exc

        self._stdout_thread = threading.Thread(target=self._read_stdout, daemon=True)
        self._stderr_thread = threading.Thread(target=self._read_stderr, daemon=True)
        self._stdout_thread.start()
        self._stderr_thread.start()

        try:
            self._handshake(handshake_timeout)
            self._check_baseline_conformance()
        except BaseException:
            self.close(kill=True)
            raise

    # -- handshake ------------------------------------------------------------

    def _handshake(self, timeout: float) -> None:
        slot = self._register(_HANDSHAKE_KEY)
        self._send({"type": "init"})
        reply = self._wait(slot, timeout, phase="handshake")
        try:
            dim = reply.get("dim")
            patches = reply.get("patches")
            if not isinstance(dim, int) or dim < 1:
                raise WireFormatError(f"init_ok 'dim' must be a positive integer, got {dim!r}")
            if not isinstance(patches, int) or patches < 1:
                raise WireFormatError(
                    f"init_ok 'patches' must be a positive integer, got {patches!r}"
                )
            quality0 = require_finite_number(reply, "baseline_quality")
            realism0 = require_finite_number(reply, "baseline_realism")
            blur = require_finite_number(reply, "blur")
            if blur < 0:
                raise WireFormatError(f"init_ok 'blur' must be >= 0, got {blur}")
            supports_gradient = bool(reply.get("supports_gradient", False))
            declared_window = reply.get("max_inflight", DEFAULT_WINDOW)
            if not isinstance(declared_window, int) or declared_window < 1:
                raise WireFormatError(
                    f"init_ok 'max_inflight' must be a positive integer, got {declared_window!r}"
                )
        except WireFormatError as exc:
            raise ProtocolError(str(exc)) from exc
        self.dimension = dim
        self.patch_count = patches
        self.baseline = Baseline(quality0=quality0, realism0=realism0, blur=blur)
        # Never exceed what the evaluator declared it can serve concurrently.
        window = max(1, min(self._requested_window, declared_window))
        self.capabilities = Capabilities(
            supports_gradient=supports_gradient, supports_batch=True, max_inflight=window
        )
        self._window = threading.BoundedSemaphore(window)

    def _check_baseline_conformance(self) -> None:
        zero = np.zeros(self.dimension)
        evaluation = self.evaluate(zero)
        if (
            evaluation.quality != self.baseline.quality0
            or evaluation.min_patch != self.baseline.realism0
        ):
            raise ProtocolError(
                "baseline conformance failed: evaluate(0) returned "
                f"(quality={evaluation.quality!r}, min patch={evaluation.min_patch!r}) "
                f"but the handshake declared (quality={self.baseline.quality0!r}, "
                f"min patch={self.baseline.realism0!r})"
            )

    # -- request plumbing -------------------------------------------------------

    def _register(self, key: int) -> _Slot:
        slot = _Slot()
        with self._lock:
            if self._fatal is not None:
                raise self._fatal
            if key in self._slots:
                raise ProtocolError(f"duplicate in-flight request id {key}")
            self._slots[key] = slot
        return slot

    def _send(self, message: dict) -> None:
        line = dumps_line(message)
        try:
            with self._write_lock:
                self._proc.stdin.write(line)
                self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise self._exit_error("evaluator stdin closed") from exc

    def _wait(self, slot: _Slot, timeout: float, *, phase: str) -> dict:
        if not slot.event.wait(timeout):
            self._proc.kill()
            raise EvaluatorTimeoutError(f"evaluator {phase} timed out after {timeout:g}s")
        if slot.error is not None:
            raise slot.error
        assert slot.message is not None
        return slot.message

    def _fail(self, error: Exception) -> None:
        with self._lock:
            if self._fatal is None:
                self._fatal = error
            slots = list(self._slots.values())
            self._slots.clear()
        for slot in slots:
            if slot.error is None and slot.message is None:
                slot.error = error
            slot.event.set()

    def _exit_error(self, reason: str) -> EvaluatorExitError:
        tail = "".join(self._stderr_tail)
        return EvaluatorExitError(
            f"{reason} (exit status {self._proc.poll()!r}); last stderr:\n{tail}",
            returncode=self._proc.poll(),
            stderr_tail=tail,
        )

    # -- reader threads ---------------------------------------------------------

    def _read_stdout(self) -> None:
        stream = self._proc.stdout
        while True:
            line = stream.readline()
            if line == "":
                break
            line = line.strip()
            if not line:
                continue
            try:
                message = parse_line(line)
            except WireFormatError as exc:
                self._fail(ProtocolError(f"malformed evaluator reply: {exc}"))
                return
            self._dispatch(message)
            if self._fatal is not None:
                return
        if not self._closing:
            self._fail(self._exit_error("evaluator exited mid-run"))

    def _dispatch(self, message: dict) -> None:
        mtype = message["type"]
        if mtype == "init_ok":
            key = _HANDSHAKE_KEY
        elif mtype in ("eval_ok", "grad_ok", "error"):
            key = message.get("id")
            if not isinstance(key, int):
                self._fail(ProtocolError(f"evaluator reply {mtype!r} without integer id"))
                return
        else:
            self._fail(ProtocolError(f"unexpected evaluator message type {mtype!r}"))
            return
        with self._lock:
            slot = self._slots.pop(key, None)
        if slot is None:
            self._fail(ProtocolError(f"evaluator reply with unknown id {key!r} ({mtype})"))
            return
        if mtype == "error":
            code = str(message.get("code", "unknown"))
            if code == "unsupported":
                slot.error = GradientUnsupportedError()
            else:
                slot.error = RemoteEvaluatorError(code, f"evaluator error reply: {message!r}")
        else:
            slot.message = message
        slot.event.set()

    def _read_stderr(self) -> None:
        stream = self._proc.stderr
        while True:
            line = stream.readline()
            if line == "":
                break
            self._stderr_tail.append(line)
            sink = self._stderr_file
            if sink is not None:
                try:
                    sink.write(line)
                    sink.flush()
                except ValueError:  # sink closed during shutdown
                    pass
            logger.debug("evaluator stderr: %s", line.rstrip("\n"))

    # -- public surface ---------------------------------------------------------

    def _submit(self, mtype: str, z: np.ndarray) -> _Slot:
        request_id = next(self._ids)
        slot = self._register(request_id)
        try:
            self._send({"type": mtype, "id": request_id, "z": [float(v) for v in z]})
        except Exception:
            with self._lock:
                self._slots.pop(request_id, None)
            raise
        return slot

    def _finish_eval(self, slot: _Slot) -> RawEvaluation:
        reply = self._wait(slot, self._eval_timeout, phase="evaluation")
        try:
            quality = require_finite_number(reply, "quality")
            patches = require_finite_vector(reply, "realism_patches")
        except WireFormatError as exc:
            raise ProtocolError(str(exc)) from exc
        if len(patches) != self.patch_count:
            raise ProtocolError(
                f"evaluator returned {len(patches)} patch scores, handshake declared "
                f"{self.patch_count}"
            )
        return RawEvaluation(quality=quality, realism_patches=tuple(patches))

    def evaluate(self, z: np.ndarray) -> RawEvaluation:
        z = as_noise_vector(z, self.dimension)
        with self._window:
            return self._finish_eval(self._submit("eval", z))

    def evaluate_batch(self, batch: Sequence[np.ndarray]) -> list[RawEvaluation]:
        """Pipeline a batch through the declared in-flight window, in order."""
        results: list[RawEvaluation] = []
        pending: deque[_Slot] = deque()
        try:
            for z in batch:
                z = as_noise_vector(z, self.dimension)
                while not self._window.acquire(blocking=False):
                    if not pending:
                        # permits held by concurrent evaluate() callers
                        self._window.acquire()
                        break
                    slot = pending.popleft()
                    try:
                        results.append(self._finish_eval(slot))
                    finally:
                        self._window.release()
                pending.append(self._submit("eval", z))
            while pending:
                slot = pending.popleft()
                try:
                    results.append(self._finish_eval(slot))
                finally:
                    self._window.release()
        except Exception:
            while pending:
                pending.popleft()
                self._window.release()
            raise
        return results

    def combined_score_gradient(self, z: np.ndarray) -> np.ndarray:
        """Wire gradient: d(quality + min-patch realism)/dz as one vector."""
        z = as_noise_vector(z, self.dimension)
        with self._window:
            reply = self._wait(self._submit("grad", z), self._eval_timeout, phase="gradient")
        try:
            g = require_finite_vector(reply, "g")
        except WireFormatError as exc:
            raise ProtocolError(str(exc)) from exc
        if len(g) != self.dimension:
            raise ProtocolError(f"gradient has length {len(g)}, expected {self.dimension}")
        return np.asarray(g, dtype=np.float64)

    def close(self, kill: bool = False) -> None:
        if getattr(self, "_proc", None) is None:
            return
        self._closing = True
        if not kill and self._proc.poll() is None:
            try:
                self._send({"type": "shutdown"})
            except Exception:
                pass
        try:
            if self._proc.stdin:
                self._proc.stdin.close()
        except Exception:
            pass
        try:
            self._proc.wait(timeout=10)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait()
        for thread in (self._stdout_thread, self._stderr_thread):
            thread.join(timeout=2)
        if self._stderr_file is not None:
            self._stderr_file.close()
            self._stderr_file = None

    @property
    def returncode(self):
        return self._proc.poll()


def open_external(
    command: str | Sequence[str],
    *,
    handshake_timeout: float = HANDSHAKE_TIMEOUT,
    eval_timeout: float = EVAL_TIMEOUT,
    max_inflight: int = DEFAULT_WINDOW,
    stderr_path=None,
) -> ExternalEvaluatorHandle:
    """Spawn an external evaluator and perform the protocol handshake."""
    return ExternalEvaluatorHandle(
        command,
        handshake_timeout=handshake_timeout,
        eval_timeout=eval_timeout,
        max_inflight=max_inflight,
        stderr_path=stderr_path,
    )
