"""Wire-protocol conformance suite for external evaluators.

Drives the child process with raw lines (deliberately including garbage) and
checks: handshake shape, id echo, baseline consistency (evaluate(0) equals
the handshake baseline exactly), error handling that keeps the process
alive, gradient support or a clean "unsupported" reply, and exit 0 after
shutdown.
"""

from __future__ import annotations

import json
import queue
import shlex
import subprocess
import threading
from dataclasses import dataclass

__all__ = ["CheckResult", "run_protocol_check"]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


class _Driver:
    def __init__(self, command: str, timeout: float) -> None:
        self.timeout = timeout
        self.proc = subprocess.Popen(
            shlex.split(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            text=True,
            encoding="utf-8",
            bufsize=1,
        )
        self._lines: queue.Queue[str | None] = queue.Queue()
        threading.Thread(target=self._pump, daemon=True).start()

    def _pump(self) -> None:
        while True:
            line = self.proc.stdout.readline()
            if line == "":
                self._lines.put(None)
                return
            if line.strip():
                self._lines.put(line.strip())

    def send_raw(self, text: str) -> None:
        self.proc.stdin.write(text + "\n")
        self.proc.stdin.flush()

    def send(self, message: dict) -> None:
        self.send_raw(json.dumps(message, allow_nan=False, separators=(",", ":")))

    def read(self) -> dict:
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            raise TimeoutError(f"no reply within {self.timeout:g}s")
        if line is None:
            raise ConnectionError("evaluator closed stdout")
        message = json.loads(line)
        if not isinstance(message, dict) or not isinstance(message.get("type"), str):
            raise ValueError(f"reply is not a protocol object: {line!r}")
        return message

    def close(self) -> None:
        try:
            if self.proc.poll() is None:
                self.proc.kill()
        except Exception:
            pass
        self.proc.wait()


def _is_finite_number(value) -> bool:
    return (
        isinstance(value, (int, float))
        and not isinstance(value, bool)
        and abs(float(value)) != float("inf")
        and float(value) == float(value)
    )


def run_protocol_check(command: str, timeout: float = 60.0) -> list[CheckResult]:
    results: list[CheckResult] = []

    def record(name: str, passed: bool, detail: str = "") -> bool:
        results.append(CheckResult(name=name, passed=passed, detail=detail))
        return passed

    try:
        driver = _Driver(command, timeout)
    except OSError as exc:
        record("spawn", False, str(exc))
        return results
    record("spawn", True)

    init = None
    try:
        driver.send({"type": "init"})
        init = driver.read()
        problems = []
        if init.get("type") != "init_ok":
            problems.append(f"reply type {init.get('type')!r}")
        if not isinstance(init.get("dim"), int) or init.get("dim", 0) < 1:
            problems.append(f"dim={init.get('dim')!r}")
        if not isinstance(init.get("patches"), int) or init.get("patches", 0) < 1:
            problems.append(f"patches={init.get('patches')!r}")
        for key in ("baseline_quality", "baseline_realism", "blur"):
            if not _is_finite_number(init.get(key)):
                problems.append(f"{key}={init.get(key)!r}")
        if _is_finite_number(init.get("blur")) and float(init["blur"]) < 0:
            problems.append("blur is negative")
        if not isinstance(init.get("supports_gradient"), bool):
            problems.append("supports_gradient missing")
        if "max_inflight" in init and (
            not isinstance(init["max_inflight"], int) or init["max_inflight"] < 1
        ):
            problems.append(f"max_inflight={init['max_inflight']!r}")
        record("handshake", not problems, "; ".join(problems))
    except Exception as exc:
        record("handshake", False, f"{type(exc).__name__}: {exc}")
        driver.close()
        return results
    if not results[-1].passed:
        driver.close()
        return results

    dim = init["dim"]
    declared_patches = init["patches"]

    def run_eval(request_id: int, z: list[float]):
        driver.send({"type": "eval", "id": request_id, "z": z})
        return driver.read()

    try:
        reply = run_eval(1, [0.0] * dim)
        problems = []
        if reply.get("type") != "eval_ok" or reply.get("id") != 1:
            problems.append(f"reply {reply!r}")
        else:
            patches = reply.get("realism_patches")
            if not isinstance(patches, list) or len(patches) != declared_patches:
                problems.append(f"patch count {len(patches) if isinstance(patches, list) else patches!r}")
            elif not all(_is_finite_number(p) for p in patches):
                problems.append("non-finite patch score")
            elif reply.get("quality") != init["baseline_quality"]:
                problems.append(
                    f"quality {reply.get('quality')!r} != baseline {init['baseline_quality']!r}"
                )
            elif min(patches) != init["baseline_realism"]:
                problems.append(
                    f"min patch {min(patches)!r} != baseline {init['baseline_realism']!r}"
                )
        record("baseline-consistency", not problems, "; ".join(problems))
    except Exception as exc:
        record("baseline-consistency", False, f"{type(exc).__name__}: {exc}")

    try:
        ok = True
        detail = ""
        for request_id in (7, 19, 3):
            reply = run_eval(request_id, [0.1] * dim)
            if reply.get("type") != "eval_ok" or reply.get("id") != request_id:
                ok = False
                detail = f"sent id {request_id}, got {reply!r}"
                break
        record("id-echo", ok, detail)
    except Exception as exc:
        record("id-echo", False, f"{type(exc).__name__}: {exc}")

    try:
        driver.send_raw("this is not json")
        reply = driver.read()
        ok = reply.get("type") == "error"
        detail = "" if ok else f"expected an error reply, got {reply!r}"
        if ok:
            follow = run_eval(23, [0.0] * dim)
            if follow.get("type") != "eval_ok" or follow.get("id") != 23:
                ok, detail = False, f"process unusable after malformed input: {follow!r}"
        record("malformed-input", ok, detail)
    except Exception as exc:
        record("malformed-input", False, f"{type(exc).__name__}: {exc}")

    try:
        driver.send({"type": "frobnicate", "id": 42})
        reply = driver.read()
        ok = reply.get("type") == "error" and reply.get("id") == 42
        record("unknown-type", ok, "" if ok else f"got {reply!r}")
    except Exception as exc:
        record("unknown-type", False, f"{type(exc).__name__}: {exc}")

    try:
        driver.send({"type": "eval", "id": 24, "z": [0.0] * (dim + 1)})
        reply = driver.read()
        ok = reply.get("type") == "error"
        detail = "" if ok else f"wrong-length z answered with {reply!r}"
        if ok:
            follow = run_eval(25, [0.0] * dim)
            if follow.get("type") != "eval_ok" or follow.get("id") != 25:
                ok, detail = False, f"process unusable after bad eval request: {follow!r}"
        record("bad-eval-request", ok, detail)
    except Exception as exc:
        record("bad-eval-request", False, f"{type(exc).__name__}: {exc}")

    try:
        driver.send({"type": "grad", "id": 55, "z": [0.0] * dim})
        reply = driver.read()
        if init.get("supports_gradient"):
            g = reply.get("g")
            ok = (
                reply.get("type") == "grad_ok"
                and reply.get("id") == 55
                and isinstance(g, list)
                and len(g) == dim
                and all(_is_finite_number(v) for v in g)
            )
        else:
            ok = (
                reply.get("type") == "error"
                and reply.get("id") == 55
                and reply.get("code") == "unsupported"
            )
        record("grad-handling", ok, "" if ok else f"got {reply!r}")
    except Exception as exc:
        record("grad-handling", False, f"{type(exc).__name__}: {exc}")

    try:
        driver.send({"type": "shutdown"})
        driver.proc.stdin.close()
        returncode = driver.proc.wait(timeout=15)
        record("shutdown", returncode == 0, f"exit status {returncode}" if returncode else "")
    except subprocess.TimeoutExpired:
        record("shutdown", False, "process did not exit within 15s of shutdown")
    except Exception as exc:
        record("shutdown", False, f"{type(exc).__name__}: {exc}")
    finally:
        driver.close()

    return results
