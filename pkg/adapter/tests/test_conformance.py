"""The adapter in fallback mode must pass the primary's protocol-check suite.

This consumes the primary component strictly through its CLI, the sanctioned
external interface.
"""

import subprocess
import sys


def test_protocol_check_passes_in_fallback_mode(large_image):
    adapter_command = (
        f"{sys.executable} -m evaluator_adapter.cli "
        f"--image {large_image} --dim 8 --fallback"
    )
    proc = subprocess.run(
        [
            sys.executable,
            "-m",
            "noisejector.cli",
            "protocol-check",
            "--evaluator",
            f"exec:{adapter_command}",
            "--timeout",
            "60",
        ],
        capture_output=True,
        text=True,
        timeout=180,
    )
    assert proc.returncode == 0, proc.stdout + proc.stderr
    lines = [line for line in proc.stdout.splitlines() if line]
    assert len(lines) == 9
    assert all(line.startswith("PASS") for line in lines), proc.stdout


def test_optimization_run_against_adapter(tmp_path, large_image):
    adapter_command = (
        f"{sys.executable} -m evaluator_adapter.cli "
        f"--image {large_image} --dim 8 --fallback"
    )
    out = tmp_path / "adapter_run.json"
    proc = subprocess.run(
        [
            sys.executable, "-m", "noisejector.cli", "run",
            "--evaluator", f"exec:{adapter_command}",
            "--optimizer", "oneplusone",
            "--budget", "30",
            "--seed", "1",
            "--out", str(out),
        ],
        capture_output=True,
        text=True,
        timeout=180,
    )
    assert proc.returncode == 0, proc.stdout + proc.stderr
    import json

    report = json.loads(out.read_text())
    # the fallback evaluator is flat in z: the criterion stays at baseline 0
    assert report["final"]["criterion"] == 0.0
    assert len(report["trace"]) == 30
