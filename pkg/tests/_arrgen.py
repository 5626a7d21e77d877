"""Seeded random central arrangements and an LP feasibility oracle independent of Fourier-Motzkin."""

from __future__ import annotations

import random

import numpy as np
from scipy.optimize import linprog

from fanfire.arrangement import Arrangement


def _parallel(a, b) -> bool:
    return np.linalg.matrix_rank(np.array([a, b], dtype=float)) < 2


def random_arrangement(seed: int, max_n: int = 4, max_m: int = 7, coeff: int = 3) -> Arrangement:
    rng = random.Random(seed)
    n = rng.randint(1, max_n)
    target = rng.randint(1, max_m)
    rows: list[tuple[int, ...]] = []
    for _ in range(200):
        if len(rows) == target:
            break
        a = tuple(rng.randint(-coeff, coeff) for _ in range(n))
        if not any(a) or any(_parallel(a, b) for b in rows):
            continue
        rows.append(a)
    return Arrangement(n, tuple(rows))


def lp_feasible(arr: Arrangement, s) -> bool:
    """Maximize a slack t with s_i <a_i, x> >= t on strict rows, equality on zero rows, |x| <= 1."""
    A = np.array([[float(v) for v in a] for a in arr.normals]).reshape(arr.m, arr.n)
    strict = [i for i, v in enumerate(s) if v != 0]
    zero = [i for i, v in enumerate(s) if v == 0]
    c = np.zeros(arr.n + 1)
    c[-1] = -1.0
    A_ub = np.array([np.append(-s[i] * A[i], 1.0) for i in strict]).reshape(len(strict), arr.n + 1)
    b_ub = np.zeros(len(strict))
    A_eq = np.array([np.append(A[i], 0.0) for i in zero]).reshape(len(zero), arr.n + 1) if zero else None
    b_eq = np.zeros(len(zero)) if zero else None
    bounds = [(-1, 1)] * arr.n + [(None, 1)]
    res = linprog(c, A_ub=A_ub if strict else None, b_ub=b_ub if strict else None, A_eq=A_eq, b_eq=b_eq, bounds=bounds)
    if not strict:
        return res.status == 0
    return res.status == 0 and -res.fun > 1e-9
