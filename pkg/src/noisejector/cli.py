"""noisejector command line: run, bench, ablate, protocol-check.

Exit codes: 0 ok, 2 usage, 3 evaluator spawn failure, 4 protocol violation,
5 timeout, 6 bench cell failures.  NOISEJECTOR_LOG sets log verbosity
(debug/info/warning/error).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .criterion import CriterionConfig, Variant
from .evaluator import (
    EvaluatorError,
    EvaluatorSpawnError,
    EvaluatorTimeoutError,
    ProtocolError,
)
from .harness.ablate import run_ablation
from .harness.bench import SUITE_NAMES, BenchConfig, run_bench
from .harness.protocol_check import run_protocol_check
from .harness.reports import write_noise_vector, write_report
from .harness.run import RunSettings, execute_run
from .optimizers import OptimizerKind

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SPAWN = 3
EXIT_PROTOCOL = 4
EXIT_TIMEOUT = 5
EXIT_BENCH_FAILURES = 6

logger = logging.getLogger("noisejector")

_OPTIMIZER_CHOICES = [kind.value for kind in OptimizerKind]


class UsageError(ValueError):
    pass


def _configure_logging() -> None:
    level_name = os.environ.get("NOISEJECTOR_LOG", "warning").strip().lower()
    level = {
        "debug": logging.DEBUG,
        "info": logging.INFO,
        "warning": logging.WARNING,
        "error": logging.ERROR,
    }.get(level_name, logging.WARNING)
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise UsageError(f"expected true or false, got {text!r}")


def _parse_weights(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise UsageError(f"--weights expects Q,R,P (three numbers), got {text!r}")
    try:
        q, r, p = (float(v) for v in parts)
    except ValueError as exc:
        raise UsageError(f"--weights expects numbers, got {text!r}") from exc
    if min(q, r, p) < 0:
        raise UsageError("criterion weights must be >= 0")
    return q, r, p


def _parse_list(text: str, choices: list[str], what: str) -> list[str]:
    items = [item.strip() for item in text.split(",") if item.strip()]
    if not items:
        raise UsageError(f"empty {what} list")
    for item in items:
        if item not in choices:
            raise UsageError(f"unknown {what} {item!r}; choose from {', '.join(choices)}")
    return items


def _criterion_from_args(args: argparse.Namespace) -> CriterionConfig:
    q, r, p = _parse_weights(args.weights)
    return CriterionConfig(
        lambda_q=q,
        lambda_r=r,
        lambda_p=p,
        variant=Variant(args.criterion),
        pessimistic=_parse_bool(args.pessimistic),
    )


def _check_budget(budget: int) -> None:
    if budget < 1:
        raise UsageError(f"--budget must be >= 1, got {budget}")


def _cmd_run(args: argparse.Namespace) -> int:
    _check_budget(args.budget)
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    stderr_path = None
    if args.evaluator.startswith("exec:"):
        stderr_path = str(out_path.with_name(out_path.stem + ".stderr.log"))
    settings = RunSettings(
        evaluator=args.evaluator,
        optimizer=OptimizerKind(args.optimizer),
        criterion=_criterion_from_args(args),
        budget=args.budget,
        seed=args.seed,
        handshake_timeout=args.handshake_timeout,
        eval_timeout=args.eval_timeout,
        stderr_path=stderr_path,
    )
    result = execute_run(settings)
    z_path = out_path.with_name(out_path.stem + ".z.bin")
    write_noise_vector(z_path, result.recommended)
    result.report["final"]["z_file"] = z_path.name
    if result.report["stderr_log"]:
        result.report["stderr_log"] = Path(result.report["stderr_log"]).name
    write_report(out_path, result.report)
    if args.trace_csv:
        _write_trace_csv(args.trace_csv, result.report["trace"])
    final = result.report["final"]
    print(
        f"final criterion {final['criterion']:.6g} "
        f"(s_q {final['s_q']:.6g}, s_r {final['s_r']:.6g}, penalty {final['penalty']:.6g}) "
        f"after {len(result.report['trace'])} evaluations -> {out_path}"
    )
    return EXIT_OK


def _write_trace_csv(path: str, trace: list[list[float]]) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["evaluation", "criterion", "best_so_far"])
        for row in trace:
            writer.writerow([row[0], repr(row[1]), repr(row[2])])


def _cmd_bench(args: argparse.Namespace) -> int:
    _check_budget(args.budget)
    config = BenchConfig(
        suite=args.suite,
        optimizers=tuple(
            OptimizerKind(k) for k in _parse_list(args.optimizers, _OPTIMIZER_CHOICES, "optimizer")
        ),
        criteria=tuple(Variant(v) for v in _parse_list(args.criteria, ["c1", "c2"], "criterion")),
        reps=args.reps,
        master_seed=args.master_seed,
        budget=args.budget,
        dimension=args.dim,
        jobs=args.jobs,
    )
    result = run_bench(config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_report(out_dir / "bench.json", result.payload)
    (out_dir / "bench.csv").write_text(result.csv_text, encoding="utf-8")
    sys.stdout.write(result.table_text)
    if result.any_failed:
        logger.error("bench: one or more cells failed; see %s", out_dir / "bench.json")
        return EXIT_BENCH_FAILURES
    return EXIT_OK


def _cmd_ablate(args: argparse.Namespace) -> int:
    _check_budget(args.budget)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    base = RunSettings(
        evaluator=args.evaluator,
        optimizer=OptimizerKind(args.optimizer),
        criterion=CriterionConfig(variant=Variant(args.criterion)),
        budget=args.budget,
        seed=args.seed,
        handshake_timeout=args.handshake_timeout,
        eval_timeout=args.eval_timeout,
    )
    payload, cells = run_ablation(base)
    write_report(out_dir / "ablate.json", payload)
    for cell in cells:
        mode = "pessimistic" if cell.pessimistic else "raw"
        stem = f"{cell.label}_{mode}"
        z_path = out_dir / f"{stem}.z.bin"
        write_noise_vector(z_path, cell.run.recommended)
        cell.run.report["final"]["z_file"] = z_path.name
        write_report(out_dir / f"{stem}.json", cell.run.report)
    print(f"wrote {len(cells)} ablation cells to {out_dir}")
    return EXIT_OK


def _cmd_protocol_check(args: argparse.Namespace) -> int:
    if not args.evaluator.startswith("exec:"):
        raise UsageError("protocol-check expects --evaluator exec:COMMAND")
    command = args.evaluator[len("exec:"):]
    results = run_protocol_check(command, timeout=args.timeout)
    failed = False
    for check in results:
        status = "PASS" if check.passed else "FAIL"
        detail = f": {check.detail}" if check.detail else ""
        print(f"{status} {check.name}{detail}")
        failed = failed or not check.passed
    return EXIT_PROTOCOL if failed else EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noisejector",
        description="Optimize injected noise against a pessimistic quality+realism criterion.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common_run_options(p: argparse.ArgumentParser) -> None:
        p.add_argument("--budget", type=int, default=10_000, help="criterion evaluations (default 10000)")
        p.add_argument("--seed", type=int, default=0, help="optimizer seed (default 0)")
        p.add_argument("--handshake-timeout", type=float, default=60.0)
        p.add_argument("--eval-timeout", type=float, default=600.0)

    run_p = sub.add_parser("run", help="one optimization run")
    run_p.add_argument("--evaluator", required=True, help="builtin:NAME[?k=v&..] or exec:COMMAND")
    run_p.add_argument("--optimizer", choices=_OPTIMIZER_CHOICES, default="dcma")
    run_p.add_argument("--criterion", choices=["c1", "c2"], default="c1")
    run_p.add_argument("--pessimistic", default="true", metavar="true|false")
    run_p.add_argument("--weights", default="1,1,1", metavar="Q,R,P")
    add_common_run_options(run_p)
    run_p.add_argument("--out", default="report.json", help="report path (default report.json)")
    run_p.add_argument("--trace-csv", default=None, help="also write the trace as CSV")
    run_p.set_defaults(func=_cmd_run)

    bench_p = sub.add_parser("bench", help="optimizer x criterion benchmark matrix")
    bench_p.add_argument("--suite", choices=list(SUITE_NAMES), required=True)
    bench_p.add_argument("--optimizers", default=",".join(_OPTIMIZER_CHOICES))
    bench_p.add_argument("--criteria", default="c1,c2")
    bench_p.add_argument("--reps", type=int, default=5)
    bench_p.add_argument("--master-seed", type=int, default=0)
    bench_p.add_argument("--budget", type=int, default=10_000)
    bench_p.add_argument("--dim", type=int, default=None, help="override the suite dimension")
    bench_p.add_argument("--jobs", type=int, default=0, help="worker processes (default: all cores)")
    bench_p.add_argument("--out-dir", required=True)
    bench_p.set_defaults(func=_cmd_bench)

    ablate_p = sub.add_parser("ablate", help="weight-zeroing and raw-score ablation grid")
    ablate_p.add_argument("--evaluator", required=True)
    ablate_p.add_argument("--optimizer", choices=_OPTIMIZER_CHOICES, default="dcma")
    ablate_p.add_argument("--criterion", choices=["c1", "c2"], default="c1")
    add_common_run_options(ablate_p)
    ablate_p.add_argument("--out-dir", required=True)
    ablate_p.set_defaults(func=_cmd_ablate)

    check_p = sub.add_parser("protocol-check", help="conformance suite for external evaluators")
    check_p.add_argument("--evaluator", required=True, help="exec:COMMAND")
    check_p.add_argument("--timeout", type=float, default=60.0)
    check_p.set_defaults(func=_cmd_protocol_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EvaluatorSpawnError as exc:
        print(f"error: evaluator spawn failed: {exc}", file=sys.stderr)
        return EXIT_SPAWN
    except EvaluatorTimeoutError as exc:
        print(f"error: evaluator timeout: {exc}", file=sys.stderr)
        return EXIT_TIMEOUT
    except ProtocolError as exc:
        print(f"error: protocol violation: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except EvaluatorError as exc:
        print(f"error: evaluator failure: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
