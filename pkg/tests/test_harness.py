import json
import math
import subprocess
import sys

import jsonschema
import numpy as np
import pytest
import scipy.optimize

from noisejector.cli import main as cli_main
from noisejector.criterion import CriterionConfig
from noisejector.harness import (
    BenchConfig,
    RunSettings,
    execute_run,
    load_schema,
    read_noise_vector,
    run_ablation,
    run_bench,
    write_noise_vector,
)
from noisejector.harness.bench import derive_seed
from noisejector.harness.protocol_check import run_protocol_check

SMALL_EVALUATOR = "builtin:separable-quadratic?dim=6&seed=3"


def small_run(**overrides):
    settings = dict(
        evaluator=SMALL_EVALUATOR,
        optimizer="dcma",
        criterion=CriterionConfig(),
        budget=300,
        seed=1,
    )
    settings.update(overrides)
    return execute_run(RunSettings(**settings))


class TestRunReports:
    def test_trace_length_equals_budget_and_is_monotone(self):
        result = small_run()
        trace = result.report["trace"]
        assert len(trace) == 300
        assert [row[0] for row in trace] == list(range(1, 301))
        best = -math.inf
        for _, value, running_best in trace:
            best = max(best, value)
            assert running_best == best
        assert result.report["final"]["criterion"] == trace[-1][2]

    def test_report_validates_against_schema(self):
        result = small_run()
        jsonschema.validate(result.report, load_schema("run"))

    def test_identical_config_identical_trace(self):
        a = small_run()
        b = small_run()
        assert a.report["trace"] == b.report["trace"]
        np.testing.assert_array_equal(a.recommended, b.recommended)

    def test_wall_time_recorded(self):
        result = small_run()
        assert result.report["wall_time_s"] > 0

    def test_final_parts_recompute(self):
        from noisejector.criterion import criterion_parts
        from noisejector.evaluator import open_evaluator

        result = small_run()
        handle = open_evaluator(SMALL_EVALUATOR)
        parts = criterion_parts(
            result.recommended,
            handle.evaluate(result.recommended),
            handle.baseline,
            CriterionConfig(),
        )
        final = result.report["final"]
        assert final["criterion"] == pytest.approx(parts.value, abs=1e-12)
        assert final["s_q"] == pytest.approx(parts.s_q, abs=1e-12)
        assert final["s_r"] == pytest.approx(parts.s_r, abs=1e-12)
        assert final["penalty"] == pytest.approx(parts.penalty, abs=1e-12)

    def test_dcma_reaches_closed_form_optimum(self):
        # Flat patches, unit curvature, known z*: maximize
        # l_plus(G - ||z - z*||^2) - ||z||^2/d with an independent solver.
        evaluator = "builtin:separable-quadratic?dim=10&seed=1&z_star=0.8"
        z_star = np.full(10, 0.8)
        gain = float(np.sum(z_star**2))

        def negated(z):
            delta = gain - float(np.sum((z - z_star) ** 2))
            s_q = math.log1p(delta) if delta > 0 else delta
            return -(s_q - float(np.sum(z**2)) / 10.0)

        solution = scipy.optimize.minimize(
            negated, z_star, method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 20000, "maxfev": 40000},
        )
        optimum = -solution.fun
        result = execute_run(
            RunSettings(evaluator=evaluator, optimizer="dcma",
                        criterion=CriterionConfig(), budget=2000, seed=1)
        )
        assert result.report["final"]["criterion"] == pytest.approx(optimum, abs=1e-3)

    def test_external_gradient_mode_counts_one_eval_per_step(self):
        evaluator = "builtin:separable-quadratic?dim=6&seed=3&gradients=1"
        result = small_run(evaluator=evaluator, optimizer="adam", budget=120)
        assert len(result.report["trace"]) == 120
        assert result.report["optimizer"]["hyperparams"]["external_gradient"] == 1.0
        # with exact gradients and one evaluation per step Adam should beat
        # its finite-difference budget equivalent comfortably
        fd = small_run(optimizer="adam", budget=120)
        assert result.report["final"]["criterion"] >= fd.report["final"]["criterion"]


class TestNoiseVectorSidecar:
    def test_round_trip(self, tmp_path):
        z = np.random.default_rng(0).normal(size=257)
        path = tmp_path / "vec.z.bin"
        write_noise_vector(path, z)
        np.testing.assert_array_equal(read_noise_vector(path), z)
        raw = path.read_bytes()
        assert len(raw) == 8 + 257 * 8
        assert int.from_bytes(raw[:8], "little") == 257

    def test_truncated_rejected(self, tmp_path):
        path = tmp_path / "vec.z.bin"
        write_noise_vector(path, np.zeros(4))
        path.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(ValueError):
            read_noise_vector(path)


class TestBench:
    CONFIG = dict(
        suite="separable",
        optimizers=("dcma", "random"),
        criteria=("c1", "c2"),
        reps=2,
        master_seed=5,
        budget=120,
        dimension=6,
        jobs=1,
    )

    def test_matrix_shape_and_schema(self):
        result = run_bench(BenchConfig(**self.CONFIG))
        jsonschema.validate(result.payload, load_schema("bench"))
        assert len(result.payload["cells"]) == 4
        for cell in result.payload["cells"]:
            assert len(cell["values"]) == 2
            assert not cell["failed"]
        assert not result.any_failed

    def test_single_rep_std_is_zero(self):
        config = dict(self.CONFIG, reps=1)
        result = run_bench(BenchConfig(**config))
        for cell in result.payload["cells"]:
            assert cell["std"] == 0.0

    def test_byte_identical_repetition(self):
        from noisejector.harness.reports import dumps_report

        a = run_bench(BenchConfig(**self.CONFIG))
        b = run_bench(BenchConfig(**self.CONFIG))
        assert dumps_report(a.payload) == dumps_report(b.payload)
        assert a.csv_text == b.csv_text
        assert a.table_text == b.table_text

    def test_parallel_matches_serial(self):
        serial = run_bench(BenchConfig(**self.CONFIG))
        parallel = run_bench(BenchConfig(**dict(self.CONFIG, jobs=4)))
        assert serial.payload["cells"] == parallel.payload["cells"]

    def test_seed_derivation_is_stable_per_cell(self):
        # adding a row must not reshuffle existing cells' seeds
        assert derive_seed(5, "dcma", "c1", 0) == derive_seed(5, "dcma", "c1", 0)
        assert derive_seed(5, "dcma", "c1", 0) != derive_seed(5, "dcma", "c1", 1)
        assert derive_seed(5, "dcma", "c1", 0) != derive_seed(5, "dcma", "c2", 0)
        assert derive_seed(5, "dcma", "c1", 0) != derive_seed(6, "dcma", "c1", 0)

    def test_failed_cell_recorded_and_matrix_continues(self):
        config = dict(self.CONFIG, optimizers=("dcma", "de"), budget=20)
        result = run_bench(BenchConfig(**config))  # DE needs budget >= 30
        assert result.any_failed
        by_optimizer = {}
        for cell in result.payload["cells"]:
            by_optimizer.setdefault(cell["optimizer"], []).append(cell)
        assert all(cell["failed"] for cell in by_optimizer["de"])
        assert all(not cell["failed"] for cell in by_optimizer["dcma"])


class TestAblation:
    def test_grid_and_consistency(self):
        base = RunSettings(
            evaluator="builtin:plateau-artifact?dim=2&seed=9",
            optimizer="dcma",
            criterion=CriterionConfig(),
            budget=400,
            seed=7,
        )
        payload, cells = run_ablation(base)
        jsonschema.validate(payload, load_schema("ablate"))
        assert len(cells) == 10
        full = next(c for c in cells if c.label == "full" and c.pessimistic)
        plain = execute_run(base)
        assert full.run.report["trace"] == plain.report["trace"]
        penalty_only = next(
            c.summary for c in cells
            if c.label == "no_quality" and c.pessimistic
        )
        # with quality zeroed the optimizer has no reason to leave the origin
        assert penalty_only["norm2_over_d"] < 0.25  # well under sigma0^2

    def test_pure_penalty_cell_contracts_to_origin(self):
        base = RunSettings(
            evaluator="builtin:separable-quadratic?dim=4&seed=2",
            optimizer="dcma",
            criterion=CriterionConfig(lambda_q=0.0, lambda_r=0.0, lambda_p=1.0),
            budget=400,
            seed=3,
        )
        result = execute_run(base)
        assert float(np.dot(result.recommended, result.recommended)) / 4 < 0.25


class TestProtocolCheckSuite:
    def test_reference_evaluator_passes(self, reference_evaluator_command):
        results = run_protocol_check(reference_evaluator_command, timeout=30)
        assert [r.name for r in results] == [
            "spawn", "handshake", "baseline-consistency", "id-echo",
            "malformed-input", "unknown-type", "bad-eval-request",
            "grad-handling", "shutdown",
        ]
        failed = [r for r in results if not r.passed]
        assert not failed, failed

    def test_broken_evaluator_fails(self, tmp_path):
        script = tmp_path / "broken.py"
        script.write_text("import sys\nsys.exit(3)\n")
        results = run_protocol_check(f"{sys.executable} {script}", timeout=5)
        assert any(not r.passed for r in results)


class TestCli:
    def test_run_writes_report_and_sidecar(self, tmp_path):
        out = tmp_path / "report.json"
        code = cli_main([
            "run", "--evaluator", SMALL_EVALUATOR, "--optimizer", "dcma",
            "--budget", "150", "--seed", "2", "--out", str(out),
            "--trace-csv", str(tmp_path / "trace.csv"),
        ])
        assert code == 0
        report = json.loads(out.read_text())
        jsonschema.validate(report, load_schema("run"))
        assert report["final"]["z_file"] == "report.z.bin"
        z = read_noise_vector(tmp_path / "report.z.bin")
        assert z.shape == (6,)
        trace_lines = (tmp_path / "trace.csv").read_text().splitlines()
        assert len(trace_lines) == 151  # header + one row per evaluation

    def test_zero_budget_is_usage_error(self, tmp_path):
        code = cli_main([
            "run", "--evaluator", SMALL_EVALUATOR, "--budget", "0",
            "--out", str(tmp_path / "r.json"),
        ])
        assert code == 2
        assert not (tmp_path / "r.json").exists()

    def test_bad_weights_usage_error(self, tmp_path):
        code = cli_main([
            "run", "--evaluator", SMALL_EVALUATOR, "--weights", "1,2",
            "--out", str(tmp_path / "r.json"),
        ])
        assert code == 2

    def test_spawn_failure_exit_code(self, tmp_path):
        code = cli_main([
            "run", "--evaluator", "exec:/does/not/exist", "--budget", "10",
            "--out", str(tmp_path / "r.json"),
        ])
        assert code == 3

    def test_handshake_timeout_exit_code(self, tmp_path):
        script = tmp_path / "sleeper.py"
        script.write_text("import time\ntime.sleep(30)\n")
        code = cli_main([
            "run", "--evaluator", f"exec:{sys.executable} {script}",
            "--budget", "10", "--handshake-timeout", "0.5",
            "--out", str(tmp_path / "r.json"),
        ])
        assert code == 5

    def test_protocol_violation_exit_code(self, tmp_path):
        script = tmp_path / "garbage.py"
        script.write_text(
            "import sys\n"
            "sys.stdin.readline()\n"
            "print('{{ not a protocol line')\n"
            "sys.stdout.flush()\n"
            "sys.stdin.read()\n"
        )
        code = cli_main([
            "run", "--evaluator", f"exec:{sys.executable} {script}",
            "--budget", "10", "--out", str(tmp_path / "r.json"),
        ])
        assert code == 4

    def test_bench_cli_outputs(self, tmp_path):
        out_dir = tmp_path / "bench"
        code = cli_main([
            "bench", "--suite", "separable", "--optimizers", "dcma,random",
            "--criteria", "c1", "--reps", "1", "--master-seed", "3",
            "--budget", "100", "--dim", "5", "--jobs", "1",
            "--out-dir", str(out_dir),
        ])
        assert code == 0
        payload = json.loads((out_dir / "bench.json").read_text())
        jsonschema.validate(payload, load_schema("bench"))
        csv_text = (out_dir / "bench.csv").read_text()
        assert csv_text.splitlines()[0] == "optimizer,c1_mean,c1_std"

    def test_bench_cell_failure_exit_code(self, tmp_path):
        code = cli_main([
            "bench", "--suite", "separable", "--optimizers", "de",
            "--criteria", "c1", "--reps", "1", "--budget", "20",
            "--dim", "5", "--jobs", "1", "--out-dir", str(tmp_path / "bench"),
        ])
        assert code == 6

    def test_ablate_cli(self, tmp_path):
        out_dir = tmp_path / "ablate"
        code = cli_main([
            "ablate", "--evaluator", "builtin:plateau-artifact?dim=2&seed=4",
            "--budget", "200", "--seed", "5", "--out-dir", str(out_dir),
        ])
        assert code == 0
        payload = json.loads((out_dir / "ablate.json").read_text())
        jsonschema.validate(payload, load_schema("ablate"))
        assert len(list(out_dir.glob("*_pessimistic.json"))) == 5
        assert len(list(out_dir.glob("*_raw.json"))) == 5
        assert len(list(out_dir.glob("*.z.bin"))) == 10

    def test_protocol_check_cli(self, reference_evaluator_command):
        code = cli_main([
            "protocol-check", "--evaluator", f"exec:{reference_evaluator_command}",
            "--timeout", "30",
        ])
        assert code == 0

    def test_run_with_external_evaluator(self, tmp_path, reference_evaluator_command):
        out = tmp_path / "ext.json"
        code = cli_main([
            "run", "--evaluator", f"exec:{reference_evaluator_command}",
            "--optimizer", "oneplusone", "--budget", "40", "--seed", "3",
            "--out", str(out),
        ])
        assert code == 0
        report = json.loads(out.read_text())
        assert report["evaluator"]["dimension"] == 8
        assert report["stderr_log"] == "ext.stderr.log"
        assert "reference evaluator ready" in (tmp_path / "ext.stderr.log").read_text()

    def test_console_script_help(self):
        proc = subprocess.run(
            [sys.executable, "-m", "noisejector.cli", "--help"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert "protocol-check" in proc.stdout
