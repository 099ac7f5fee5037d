"""Independent brute-force oracles used by the test suite.

Deliberately written in plain Python (loops, math module, no numpy) so they
share no code path with the implementations they check.
"""

from __future__ import annotations

import math


def oracle_l_plus(x: float) -> float:
    return math.log(1.0 + x) if x > 0 else x


def oracle_criterion(
    z,
    quality,
    patches,
    quality0,
    realism0,
    blur,
    lambda_q,
    lambda_r,
    lambda_p,
    variant,
    pessimistic,
) -> float:
    """Line-by-line recomputation of the penalized criterion."""
    dq = quality - quality0
    s_q = oracle_l_plus(dq) if pessimistic else dq
    r_min = patches[0]
    for p in patches[1:]:
        if p < r_min:
            r_min = p
    dr = r_min - realism0
    s_r = oracle_l_plus(dr) if pessimistic else dr
    norm2 = 0.0
    for v in z:
        norm2 += v * v
    coef = lambda_p * blur if variant == "c2" else lambda_p
    return lambda_q * s_q + lambda_r * s_r - coef * norm2 / len(z)


def oracle_laplacian(field):
    """Quadruple-loop 4-neighbor Laplacian with clamped (replicate) edges.

    ``field`` is a list of rows of floats; returns the same structure.
    """
    h = len(field)
    w = len(field[0])

    def at(y: int, x: int) -> float:
        y = min(max(y, 0), h - 1)
        x = min(max(x, 0), w - 1)
        return field[y][x]

    out = []
    for y in range(h):
        row = []
        for x in range(w):
            row.append(at(y - 1, x) + at(y + 1, x) + at(y, x - 1) + at(y, x + 1) - 4.0 * at(y, x))
        out.append(row)
    return out


def oracle_grayscale(pixels):
    """pixels: rows of (r, g, b) tuples -> rows of floats."""
    return [[0.299 * r + 0.587 * g + 0.114 * b for (r, g, b) in row] for row in pixels]


def oracle_population_std(values) -> float:
    """Two-pass population standard deviation over a flat iterable."""
    values = list(values)
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / n
    return math.sqrt(var)


def oracle_blur_factor(field) -> float:
    lap = oracle_laplacian(field)
    flat = [v for row in lap for v in row]
    return oracle_population_std(flat) / math.sqrt(1000.0)
