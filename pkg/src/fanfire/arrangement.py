"""Exact central hyperplane arrangements over the rationals.

Chambers (full-dimensional cells) are encoded by their all-nonzero sign
vectors.  Feasibility of a sign vector is decided exactly: equalities are
eliminated by a rational nullspace parametrization, then the remaining
strict homogeneous inequalities go through Fourier-Motzkin elimination on
primitive integer rows, and a witness is rebuilt by back-substitution.
"""

from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .symmetry import Group, SignedPermutation, SignVector, act, format_signs

MAX_DIM = 8
MAX_HYPERPLANES = 20
BRUTEFORCE_LIMIT = 20
FULL_CHECK_LIMIT = 12
SAMPLE_SIZE = 512

Point = tuple[Fraction, ...]


class ArrangementError(ValueError):
    pass


def parse_rational(text) -> Fraction:
    if isinstance(text, bool):
        raise ArrangementError(f"invalid rational {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise ArrangementError(f"invalid rational {text!r}")
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ArrangementError(f"invalid rational {text!r}") from None


def _primitive(row: Sequence[Fraction | int]) -> tuple[int, ...]:
    """Positive multiple of ``row`` with coprime integer entries."""
    den = 1
    for v in row:
        den = den * Fraction(v).denominator // math.gcd(den, Fraction(v).denominator)
    ints = [int(Fraction(v) * den) for v in row]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    if g > 1:
        ints = [v // g for v in ints]
    return tuple(ints)


def _sign(v) -> int:
    return (v > 0) - (v < 0)


@dataclass(frozen=True)
class Arrangement:
    n: int
    normals: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        normals = tuple(tuple(Fraction(x) for x in a) for a in self.normals)
        object.__setattr__(self, "normals", normals)
        if not 1 <= self.n <= MAX_DIM:
            raise ArrangementError(f"dimension {self.n} outside 1..{MAX_DIM}")
        if len(normals) > MAX_HYPERPLANES:
            raise ArrangementError(f"{len(normals)} hyperplanes exceed the limit {MAX_HYPERPLANES}")
        for i, a in enumerate(normals):
            if len(a) != self.n:
                raise ArrangementError(f"normal {i} has length {len(a)}, expected {self.n}")
            if not any(a):
                raise ArrangementError(f"normal {i} is zero")
        for i, j in itertools.combinations(range(len(normals)), 2):
            a, b = normals[i], normals[j]
            if all(a[p] * b[q] == a[q] * b[p] for p, q in itertools.combinations(range(self.n), 2)):
                raise ArrangementError(f"normals {i} and {j} are parallel")
        object.__setattr__(self, "_int_normals", tuple(_primitive(a) for a in normals))

    @property
    def m(self) -> int:
        return len(self.normals)

    @classmethod
    def from_json(cls, data: dict) -> Arrangement:
        try:
            n = int(data["n"])
            normals = [tuple(parse_rational(x) for x in row) for row in data["normals"]]
        except (KeyError, TypeError) as exc:
            raise ArrangementError(f"malformed arrangement: {exc}") from None
        return cls(n, tuple(normals))

    def to_json(self) -> dict:
        return {"n": self.n, "normals": [[f"{x.numerator}/{x.denominator}" for x in a] for a in self.normals]}


def load_arrangement(path) -> Arrangement:
    with open(path) as fh:
        return Arrangement.from_json(json.load(fh))


def coordinate_arrangement(n: int) -> Arrangement:
    return Arrangement(n, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))


def braid_arrangement(n: int) -> Arrangement:
    """Normals ``e_i - e_j`` for ``i < j``, in lexicographic order of ``(i, j)``."""
    rows = []
    for i, j in itertools.combinations(range(n), 2):
        rows.append(tuple(1 if k == i else -1 if k == j else 0 for k in range(n)))
    return Arrangement(n, tuple(rows))


@dataclass(frozen=True)
class Chamber:
    signs: SignVector
    witness: Point

    def to_json(self) -> dict:
        return {"signs": format_signs(self.signs), "witness": [f"{x.numerator}/{x.denominator}" for x in self.witness]}


def sign_of_point(arr: Arrangement, x: Sequence) -> SignVector:
    if len(x) != arr.n:
        raise ArrangementError(f"point of dimension {len(x)}, expected {arr.n}")
    return tuple(_sign(sum(a_k * Fraction(x_k) for a_k, x_k in zip(a, x))) for a in arr.normals)


# ---------------------------------------------------------------- feasibility

def _nullspace(rows: list[tuple[int, ...]], n: int) -> list[tuple[int, ...]]:
    """Integer basis of ``{x : row . x = 0 for all rows}``."""
    mat = [[Fraction(v) for v in r] for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(n):
        piv = next((k for k in range(r, len(mat)) if mat[k][c] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = 1 / mat[r][c]
        mat[r] = [v * inv for v in mat[r]]
        for k in range(len(mat)):
            if k != r and mat[k][c] != 0:
                f = mat[k][c]
                mat[k] = [a - f * b for a, b in zip(mat[k], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * n
        v[fc] = Fraction(1)
        for row_i, pc in enumerate(pivots):
            v[pc] = -mat[row_i][fc]
        basis.append(_primitive(v))
    return basis


def _fm_eliminate(rows: list[tuple[int, ...]], nvars: int):
    """Fourier-Motzkin on strict homogeneous rows ``c . y > 0``.

    Returns ``(feasible, stages)``; ``stages`` lists ``(var, rows_before)``
    in elimination order for witness recovery.
    """
    current = set(rows)
    remaining = list(range(nvars))
    stages = []
    while remaining:
        if any(not any(r) for r in current):
            return False, stages
        best = None
        for v in remaining:
            pos = sum(1 for r in current if r[v] > 0)
            neg = sum(1 for r in current if r[v] < 0)
            cost = pos * neg - pos - neg
            if best is None or cost < best[0]:
                best = (cost, v)
        v = best[1]
        stages.append((v, list(current)))
        remaining.remove(v)
        pos = [r for r in current if r[v] > 0]
        neg = [r for r in current if r[v] < 0]
        nxt = {r for r in current if r[v] == 0}
        for p in pos:
            for q in neg:
                a, b = p[v], -q[v]
                combo = tuple(b * pi + a * qi for pi, qi in zip(p, q))
                nxt.add(_primitive(combo))
        current = nxt
    # all variables gone: any surviving row reads 0 > 0
    return not current, stages


def _back_substitute(stages, nvars: int) -> list[Fraction]:
    y = [Fraction(0)] * nvars
    for v, rows in reversed(stages):
        lo = None
        hi = None
        for r in rows:
            coef = r[v]
            if coef == 0:
                continue
            rest = sum((c * y[k] for k, c in enumerate(r) if k != v and c), Fraction(0))
            bound = -rest / coef
            if coef > 0:
                lo = bound if lo is None or bound > lo else lo
            else:
                hi = bound if hi is None or bound < hi else hi
        if lo is not None and hi is not None:
            y[v] = (lo + hi) / 2
        elif lo is not None:
            y[v] = lo + 1
        elif hi is not None:
            y[v] = hi - 1
        else:
            y[v] = Fraction(0)
    return y


def feasible(arr: Arrangement, s: Sequence[int]) -> Point | None:
    """Exact point realizing the sign vector ``s``, or ``None`` if the cell is empty."""
    if len(s) != arr.m:
        raise ArrangementError(f"sign vector of length {len(s)}, expected {arr.m}")
    A = arr._int_normals
    eqs = [A[i] for i, v in enumerate(s) if v == 0]
    if eqs:
        basis = _nullspace(eqs, arr.n)
    else:
        basis = [tuple(int(i == j) for j in range(arr.n)) for i in range(arr.n)]
    d = len(basis)
    strict = []
    for i, v in enumerate(s):
        if v == 0:
            continue
        row = tuple(v * sum(A[i][k] * b[k] for k in range(arr.n)) for b in basis)
        strict.append(_primitive(row))
    if d == 0:
        return tuple(Fraction(0) for _ in range(arr.n)) if not strict else None
    if not strict:
        return tuple(Fraction(0) for _ in range(arr.n))
    ok, stages = _fm_eliminate(strict, d)
    if not ok:
        return None
    y = _back_substitute(stages, d)
    x = tuple(sum((y[j] * basis[j][k] for j in range(d)), Fraction(0)) for k in range(arr.n))
    return x


def chamber(arr: Arrangement, s: Sequence[int]) -> Chamber | None:
    if any(v == 0 for v in s):
        raise ArrangementError("chambers have no zero signs")
    w = feasible(arr, s)
    return None if w is None else Chamber(tuple(s), w)


def chambers_bruteforce(arr: Arrangement) -> set[Chamber]:
    """Every feasible all-nonzero sign vector, found by exhausting all ``2**m``."""
    if arr.m > BRUTEFORCE_LIMIT:
        raise ArrangementError(f"brute force refused for m={arr.m} > {BRUTEFORCE_LIMIT}")
    out = set()
    for s in itertools.product((1, -1), repeat=arr.m):
        if arr.m and s[0] == -1:
            continue  # covered by negating the witness of -s
        w = feasible(arr, s)
        if w is not None:
            out.add(Chamber(s, w))
            out.add(Chamber(tuple(-v for v in s), tuple(-x for x in w)))
    return out


def neighbors(arr: Arrangement, c: Chamber) -> list[tuple[int, Chamber]]:
    """Chambers sharing a facet with ``c``, each tagged with the wall index crossed."""
    out = []
    for i in range(arr.m):
        wall = list(c.signs)
        wall[i] = 0
        if feasible(arr, wall) is None:
            continue
        flipped = list(c.signs)
        flipped[i] = -flipped[i]
        w = feasible(arr, flipped)
        if w is None:  # pragma: no cover - a facet always has a chamber on its far side
            raise ArrangementError(f"wall {i} of {format_signs(c.signs)} has no far side")
        out.append((i, Chamber(tuple(flipped), w)))
    return out


def generic_point(arr: Arrangement) -> Point:
    """A point off every hyperplane: the first ``(1, t, t^2, ...)`` with ``t = 1, 2, ...`` that works."""
    t = 1
    while True:
        x = tuple(Fraction(t) ** k for k in range(arr.n))
        if all(v != 0 for v in sign_of_point(arr, x)):
            return x
        t += 1


@dataclass(frozen=True)
class SymmetryViolation:
    generator: SignedPermutation
    signs: SignVector
    feasible_before: bool

    def __str__(self) -> str:
        state = "feasible" if self.feasible_before else "infeasible"
        return (
            f"generator sigma={list(self.generator.sigma)} eps={list(self.generator.eps)} maps "
            f"{state} {format_signs(self.signs)} to {format_signs(act(self.generator, self.signs))}, "
            f"which is {'in' if self.feasible_before else ''}feasible"
        )


def validate_symmetry(arr: Arrangement, G: Group, seed: int = 0) -> SymmetryViolation | None:
    """Check that every generator maps feasible chamber patterns to feasible ones and back."""
    if G.m != arr.m:
        raise ArrangementError(f"group acts on {G.m} indices, arrangement has {arr.m}")
    if arr.m <= FULL_CHECK_LIMIT:
        tests: Iterable[SignVector] = itertools.product((1, -1), repeat=arr.m)
    else:
        rng = random.Random(seed)
        tests = [tuple(rng.choice((1, -1)) for _ in range(arr.m)) for _ in range(SAMPLE_SIZE)]
    cache: dict[SignVector, bool] = {}

    def is_feasible(s):
        if s not in cache:
            cache[s] = feasible(arr, s) is not None
        return cache[s]

    for s in tests:
        for g in G.generators:
            before = is_feasible(s)
            if before != is_feasible(act(g, s)):
                return SymmetryViolation(g, s, before)
    return None
