"""Acceptance gate: one test per release criterion, each printing PASS/FAIL.

Run with ``pytest tests/test_acceptance.py -v -s``.  Every tolerance and
budget is pinned here; the suite uses built-in evaluators only.
"""

import time

import numpy as np

from noisejector.criterion import (
    Baseline,
    CriterionConfig,
    RawEvaluation,
    Variant,
    criterion,
    l_plus,
)
from noisejector.harness import BenchConfig, RunSettings, execute_run, run_bench
from noisejector.harness.bench import derive_seed, suite_evaluator_id
from noisejector.harness.reports import dumps_report
from noisejector.evaluator import open_evaluator
from noisejector.imageops import Image, blur_factor, laplacian, tile_patches
from noisejector.optimizers import (
    BudgetExhaustedError,
    OptimizerKind,
    OptimizerSpec,
    make_optimizer,
)

from oracles import oracle_blur_factor, oracle_criterion, oracle_laplacian


def report(name: str, passed: bool, detail: str = "") -> None:
    tag = "PASS" if passed else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"{tag}: {name}{suffix}")
    assert passed, f"{name}{suffix}"


def test_criterion_oracle_equivalence():
    rng = np.random.default_rng(2024)
    started = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        d = int(rng.integers(1, 64))
        z = rng.uniform(-2.0, 2.0, d)
        quality = float(rng.uniform(0.0, 100.0))
        patches = [float(v) for v in rng.uniform(-20.0, 20.0, int(rng.integers(1, 12)))]
        base = Baseline(
            quality0=float(rng.uniform(0.0, 100.0)),
            realism0=float(rng.uniform(-20.0, 20.0)),
            blur=float(rng.uniform(0.0, 3.0)),
        )
        cfg = CriterionConfig(
            lambda_q=float(rng.choice([0.0, 0.5, 1.0, 2.0])),
            lambda_r=float(rng.choice([0.0, 0.5, 1.0, 2.0])),
            lambda_p=float(rng.choice([0.0, 0.5, 1.0, 2.0])),
            variant=Variant.C2 if rng.random() < 0.5 else Variant.C1,
            pessimistic=bool(rng.random() < 0.5),
        )
        ours = criterion(z, RawEvaluation(quality, tuple(patches)), base, cfg)
        expected = oracle_criterion(
            [float(v) for v in z], quality, patches,
            base.quality0, base.realism0, base.blur,
            cfg.lambda_q, cfg.lambda_r, cfg.lambda_p,
            cfg.variant.value, cfg.pessimistic,
        )
        worst = max(worst, abs(ours - expected))
    elapsed = time.perf_counter() - started
    report(
        "criterion oracle equivalence (1000 instances, 1e-12)",
        worst <= 1e-12 and elapsed < 5.0,
        f"worst |diff| {worst:.2e}, {elapsed:.2f}s",
    )


def test_l_plus_property_suite():
    continuity = abs(l_plus(1e-9)) <= 2e-9 and abs(l_plus(-1e-9)) <= 2e-9
    rng = np.random.default_rng(7)
    xs = rng.uniform(-1e6, 1e6, 100_000)
    gaps = rng.uniform(1e-9, 1e3, 100_000)
    # non-decreasing on every pair; strict whenever the increment is above
    # the float64 output resolution of the log-damped branch
    monotone = all(
        l_plus(x + g) >= l_plus(x)
        and (g <= (1.0 + abs(x)) * 1e-13 or l_plus(x + g) > l_plus(x))
        for x, g in zip(xs, gaps)
    )
    negatives = rng.uniform(-1e9, 0.0, 10_000)
    identity = all(l_plus(x) == x for x in negatives) and l_plus(0.0) == 0.0
    report(
        "L+ property suite (continuity, monotonicity, identity on negatives)",
        continuity and monotone and identity,
    )


def test_image_ops_oracles():
    rng = np.random.default_rng(11)
    worst = 0.0
    for i in range(20):
        h = int(rng.integers(1, 33))
        w = int(rng.integers(1, 33))
        channels = 3 if i % 3 == 0 else 1
        img = Image(rng.random((h, w, channels)))
        gray = img if channels == 1 else None
        if gray is not None:
            lap = laplacian(gray)
            expected = np.array(oracle_laplacian(gray.data[:, :, 0].tolist()))
            worst = max(worst, float(np.max(np.abs(lap - expected))))
        if channels == 1:
            blur_expected = oracle_blur_factor(img.data[:, :, 0].tolist())
            worst = max(worst, abs(blur_factor(img) - blur_expected))
    oracles_ok = worst <= 1e-12

    coverage_ok = True
    for w in range(128, 301):
        xs = [x for x, _ in tile_patches(w, 128).origins]
        mask = np.zeros(w, dtype=bool)
        for x in xs:
            if x < 0 or x + 128 > w:
                coverage_ok = False
            mask[x : x + 128] = True
        if not mask.all():
            coverage_ok = False
            break
    if coverage_ok:
        for w in range(128, 301):
            for h in range(128, 301):
                grid = tile_patches(w, h)
                xs = sorted({x for x, _ in grid.origins})
                ys = sorted({y for _, y in grid.origins})
                # product structure + per-axis coverage == full 2-D coverage
                if len(grid.origins) != len(xs) * len(ys):
                    coverage_ok = False
                if xs[0] != 0 or ys[0] != 0:
                    coverage_ok = False
                if xs[-1] + 128 < w or ys[-1] + 128 < h:
                    coverage_ok = False
                if any(b - a > 128 for a, b in zip(xs, xs[1:])):
                    coverage_ok = False
                if any(b - a > 128 for a, b in zip(ys, ys[1:])):
                    coverage_ok = False
                if not coverage_ok:
                    break
            if not coverage_ok:
                break
    report(
        "image-ops oracles (laplacian/blur 1e-12; tiling covers 128..300 exhaustively)",
        oracles_ok and coverage_ok,
        f"worst |diff| {worst:.2e}",
    )


def test_optimizer_ordering_table_shape():
    started = time.perf_counter()
    config = BenchConfig(
        suite="separable",
        optimizers=(
            OptimizerKind.DCMA,
            OptimizerKind.RANDOM_SEARCH,
            OptimizerKind.GD,
            OptimizerKind.ADAM,
            OptimizerKind.ONE_PLUS_ONE,
            OptimizerKind.CMA,
        ),
        criteria=(Variant.C1,),
        reps=5,
        master_seed=0,
        budget=10_000,
        dimension=50,
        jobs=0,
    )
    result = run_bench(config)
    medians = {
        cell["optimizer"]: float(np.median(cell["values"]))
        for cell in result.payload["cells"]
    }
    means = {cell["optimizer"]: cell["mean"] for cell in result.payload["cells"]}
    elapsed = time.perf_counter() - started
    ordered = all(medians["dcma"] > v for k, v in medians.items() if k != "dcma")
    mean_row_greatest = all(means["dcma"] > v for k, v in means.items() if k != "dcma")
    detail = ", ".join(f"{k}={v:.3f}" for k, v in medians.items()) + f"; {elapsed:.0f}s"
    report(
        "optimizer ordering on separable-ellipsoid suite (DCMA above all, d=50, 10k evals)",
        ordered and mean_row_greatest and elapsed < 120.0,
        detail,
    )


def test_dcma_sphere_convergence():
    started = time.perf_counter()
    finals = []
    for seed in range(5):
        spec = OptimizerSpec(kind=OptimizerKind.DCMA, dimension=10, budget=2000, seed=seed)
        opt = make_optimizer(spec)
        while True:
            try:
                batch = opt.ask()
            except BudgetExhaustedError:
                break
            opt.tell([(z, -float(np.sum((z - 1.0) ** 2))) for z in batch])
        finals.append(opt.best_value)
    elapsed = time.perf_counter() - started
    report(
        "DCMA sphere convergence (d=10, 2000 evals, within 1e-2, 5/5 seeds)",
        all(value > -1e-2 for value in finals) and elapsed < 5.0,
        f"worst {min(finals):.2e}, {elapsed:.2f}s",
    )


def test_pessimistic_vs_naive_ablation():
    started = time.perf_counter()
    ok = True
    details = []
    for rep in range(5):
        evaluator = suite_evaluator_id("plateau", derive_seed(0, "evaluator", "plateau", rep))
        threshold = open_evaluator(evaluator).artifact_threshold
        pessimistic = execute_run(RunSettings(
            evaluator=evaluator, optimizer=OptimizerKind.DCMA,
            criterion=CriterionConfig(), budget=1500,
            seed=derive_seed(0, "acceptance-pess", rep), include_wall_time=False,
        ))
        raw = execute_run(RunSettings(
            evaluator=evaluator, optimizer=OptimizerKind.DCMA,
            criterion=CriterionConfig(lambda_r=0.0, lambda_p=0.0, pessimistic=False),
            budget=1500,
            seed=derive_seed(0, "acceptance-raw", rep), include_wall_time=False,
        ))
        p_min = pessimistic.report["final"]["min_patch"]
        r_min = raw.report["final"]["min_patch"]
        ok = ok and (p_min > threshold) and (r_min < threshold)
        details.append(f"rep{rep}: {p_min:.3f} vs {r_min:.3g}")
    elapsed = time.perf_counter() - started
    report(
        "pessimistic-vs-naive ablation on plateau evaluator (min patch vs artifact threshold)",
        ok and elapsed < 30.0,
        f"{elapsed:.1f}s",
    )


def test_bench_determinism():
    config = BenchConfig(
        suite="separable",
        optimizers=(OptimizerKind.DCMA, OptimizerKind.RANDOM_SEARCH),
        criteria=(Variant.C1, Variant.C2),
        reps=2,
        master_seed=17,
        budget=200,
        dimension=8,
        jobs=1,
    )
    first = run_bench(config)
    second = run_bench(config)
    identical = (
        dumps_report(first.payload) == dumps_report(second.payload)
        and first.csv_text == second.csv_text
        and first.table_text == second.table_text
    )
    report("bench determinism (repeated matrix is byte-identical)", identical)


def test_budget_exactness_all_optimizers():
    budget = 157  # prime, so every natural batch size gets truncated
    ok = True
    details = []
    for kind in OptimizerKind:
        result = execute_run(RunSettings(
            evaluator="builtin:separable-quadratic?dim=10&seed=5",
            optimizer=kind,
            criterion=CriterionConfig(),
            budget=budget,
            seed=3,
            include_wall_time=False,
        ))
        n = len(result.report["trace"])
        details.append(f"{kind.value}={n}")
        ok = ok and n == budget
    report(
        "budget exactness (trace length == budget for all 7 optimizers)",
        ok,
        " ".join(details),
    )
