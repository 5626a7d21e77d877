"""Exact univariate and bivariate polynomials over Q, with subresultant resultants.

``UPoly`` is a dense univariate polynomial with ``Fraction`` coefficients
(lowest degree first).  A bivariate polynomial is a ``BiPoly``: a mapping
``(xexp, yexp) -> Fraction``; for elimination it is viewed as a polynomial
in ``y`` whose coefficients are ``UPoly`` in ``x``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping, Sequence


class PolyError(ValueError):
    pass


class UPoly:
    __slots__ = ("c",)

    def __init__(self, coeffs: Iterable = ()):
        c = [Fraction(v) for v in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.c = tuple(c)

    @classmethod
    def const(cls, v) -> UPoly:
        return cls([v])

    @classmethod
    def x(cls) -> UPoly:
        return cls([0, 1])

    @property
    def deg(self) -> int:
        return len(self.c) - 1  # -1 for zero

    def is_zero(self) -> bool:
        return not self.c

    def is_const(self) -> bool:
        return len(self.c) <= 1

    @property
    def lc(self) -> Fraction:
        return self.c[-1] if self.c else Fraction(0)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = UPoly.const(other)
        return isinstance(other, UPoly) and self.c == other.c

    def __hash__(self) -> int:
        return hash(self.c)

    def __bool__(self) -> bool:
        return bool(self.c)

    def __repr__(self) -> str:
        return f"UPoly({[str(v) for v in self.c]})"

    @staticmethod
    def _lift(v) -> UPoly:
        return v if isinstance(v, UPoly) else UPoly.const(v)

    def __add__(self, other) -> UPoly:
        o = self._lift(other).c
        n = max(len(self.c), len(o))
        return UPoly((self.c[k] if k < len(self.c) else 0) + (o[k] if k < len(o) else 0) for k in range(n))

    __radd__ = __add__

    def __neg__(self) -> UPoly:
        return UPoly(-v for v in self.c)

    def __sub__(self, other) -> UPoly:
        return self + (-self._lift(other))

    def __rsub__(self, other) -> UPoly:
        return self._lift(other) - self

    def __mul__(self, other) -> UPoly:
        o = self._lift(other).c
        if not self.c or not o:
            return UPoly()
        out = [Fraction(0)] * (len(self.c) + len(o) - 1)
        for i, a in enumerate(self.c):
            if a:
                for j, b in enumerate(o):
                    out[i + j] += a * b
        return UPoly(out)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> UPoly:
        if e < 0:
            raise PolyError("negative power")
        out = UPoly.const(1)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def divmod(self, other: UPoly) -> tuple[UPoly, UPoly]:
        other = self._lift(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.c)
        q = [Fraction(0)] * max(0, len(rem) - len(other.c) + 1)
        inv = 1 / other.lc
        while len(rem) >= len(other.c) and rem:
            k = len(rem) - len(other.c)
            f = rem[-1] * inv
            q[k] = f
            for j, b in enumerate(other.c):
                rem[k + j] -= f * b
            rem.pop()
            while rem and rem[-1] == 0:
                rem.pop()
        return UPoly(q), UPoly(rem)

    def __truediv__(self, other) -> UPoly:
        """Exact division; raises if the remainder is nonzero."""
        q, r = self.divmod(self._lift(other))
        if not r.is_zero():
            raise PolyError(f"{self} is not divisible by {other}")
        return q

    def __mod__(self, other) -> UPoly:
        return self.divmod(other)[1]

    def __call__(self, x):
        acc = Fraction(0)
        for v in reversed(self.c):
            acc = acc * x + v
        return acc

    def derivative(self) -> UPoly:
        return UPoly(k * v for k, v in enumerate(self.c) if k)

    def monic(self) -> UPoly:
        return self if self.is_zero() else UPoly(v / self.lc for v in self.c)


def ugcd(a: UPoly, b: UPoly) -> UPoly:
    """Monic gcd over Q (zero only when both inputs are zero)."""
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def ugcd_many(polys: Iterable[UPoly]) -> UPoly:
    g = UPoly()
    for p in polys:
        g = ugcd(g, p)
    return g


def _divisors(n: int) -> list[int]:
    n = abs(n)
    out = []
    for d in range(1, math.isqrt(n) + 1):
        if n % d == 0:
            out.append(d)
            if d * d != n:
                out.append(n // d)
    return sorted(out)


def rational_roots(p: UPoly) -> list[Fraction]:
    """Distinct rational roots, via the rational root theorem on the integer-scaled polynomial."""
    if p.is_zero():
        raise PolyError("the zero polynomial has every root")
    den = 1
    for v in p.c:
        den = den * v.denominator // math.gcd(den, v.denominator)
    ints = [int(v * den) for v in p.c]
    roots = set()
    k = 0
    while ints[k] == 0:
        k += 1
    if k:
        roots.add(Fraction(0))
    ints = ints[k:]
    if len(ints) > 1:
        for num, den_ in product(_divisors(ints[0]), _divisors(ints[-1])):
            for cand in (Fraction(num, den_), Fraction(-num, den_)):
                if cand not in roots and UPoly(ints)(cand) == 0:
                    roots.add(cand)
    return sorted(roots)


def strip_roots(p: UPoly, roots: Iterable[Fraction]) -> UPoly:
    """Divide out every factor ``(x - r)`` with multiplicity."""
    for r in roots:
        lin = UPoly([-r, 1])
        while True:
            q, rem = p.divmod(lin)
            if not rem.is_zero():
                break
            p = q
    return p


# ---------------------------------------------------------------- polynomials in y over a domain

# A "ypoly" is a list of domain elements (Fraction or UPoly), lowest y-degree first,
# with no trailing zeros.

def _trim(p: list) -> list:
    while p and not p[-1]:
        p.pop()
    return p


def _deg(p: Sequence) -> int:
    return len(p) - 1


def prem(a: Sequence, b: Sequence, one) -> list:
    """Pseudo-remainder ``lc(b)**(deg a - deg b + 1) * a mod b`` over an integral domain."""
    r = list(a)
    db = _deg(b)
    lb = b[-1]
    e = _deg(a) - db + 1
    while r and _deg(r) >= db:
        k = _deg(r) - db
        lr = r[-1]
        r = [v * lb for v in r]
        for j, bj in enumerate(b):
            r[k + j] = r[k + j] - lr * bj
        r.pop()
        _trim(r)
        e -= 1
    if e > 0:
        f = lb ** e
        r = [v * f for v in r]
    return r


def resultant(a: Sequence, b: Sequence, one=Fraction(1)):
    """Resultant of two polynomials (coefficient lists, low degree first) via the subresultant PRS.

    Coefficients may be ``Fraction`` or ``UPoly``; ``one`` is the domain's unit.
    """
    a = _trim(list(a))
    b = _trim(list(b))
    zero = one - one
    if not a or not b:
        return zero
    da, db = _deg(a), _deg(b)
    s = 1
    if da < db:
        a, b = b, a
        da, db = db, da
        if da % 2 == 1 and db % 2 == 1:
            s = -1
    if db == 0:
        return b[0] ** da * s
    g = one
    h = one
    while True:
        delta = _deg(a) - _deg(b)
        if _deg(a) % 2 == 1 and _deg(b) % 2 == 1:
            s = -s
        r = prem(a, b, one)
        a = b
        if not r:
            return zero
        div = g * h ** delta
        b = [v / div for v in r]
        g = a[-1]
        if delta == 0:
            pass
        elif delta == 1:
            h = g
        else:
            h = g ** delta / h ** (delta - 1)
        if _deg(b) == 0:
            break
    # b is now a nonzero constant
    da = _deg(a)
    res = b[0] ** da / h ** (da - 1) if da >= 1 else one
    return res * s


def sylvester_det(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    """Determinant of the Sylvester matrix, by exact Gaussian elimination (independent check)."""
    a = [Fraction(v) for v in _trim(list(a))]
    b = [Fraction(v) for v in _trim(list(b))]
    m, n = _deg(a), _deg(b)
    if m < 0 or n < 0:
        return Fraction(0)
    size = m + n
    if size == 0:
        return Fraction(1)
    ahi = list(reversed(a))
    bhi = list(reversed(b))
    rows = []
    for i in range(n):
        rows.append([Fraction(0)] * i + ahi + [Fraction(0)] * (size - i - len(ahi)))
    for i in range(m):
        rows.append([Fraction(0)] * i + bhi + [Fraction(0)] * (size - i - len(bhi)))
    det = Fraction(1)
    for c in range(size):
        piv = next((r for r in range(c, size) if rows[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            rows[c], rows[piv] = rows[piv], rows[c]
            det = -det
        det *= rows[c][c]
        inv = 1 / rows[c][c]
        for r in range(c + 1, size):
            f = rows[r][c] * inv
            if f:
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[c])]
    return det


# ---------------------------------------------------------------- bivariate

class BiPoly:
    """Sparse polynomial in ``x, y`` over Q."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[int, int], object] | None = None):
        t = {}
        for (i, j), v in (terms or {}).items():
            v = Fraction(v)
            if i < 0 or j < 0:
                raise PolyError("negative exponent")
            if v:
                t[(int(i), int(j))] = t.get((int(i), int(j)), Fraction(0)) + v
        self.terms = {k: v for k, v in t.items() if v}

    @classmethod
    def from_json(cls, monomials: Sequence[Mapping]) -> BiPoly:
        acc: dict[tuple[int, int], Fraction] = {}
        for mono in monomials:
            coeff = mono["coeff"]
            if isinstance(coeff, bool) or not isinstance(coeff, (str, int)):
                raise PolyError(f"invalid coefficient {coeff!r}; use an integer or a 'p/q' string")
            try:
                v = Fraction(coeff)
            except (ValueError, ZeroDivisionError):
                raise PolyError(f"invalid coefficient {coeff!r}") from None
            key = (int(mono.get("xexp", 0)), int(mono.get("yexp", 0)))
            acc[key] = acc.get(key, Fraction(0)) + v
        return cls(acc)

    def to_json(self) -> list:
        return [
            {"coeff": f"{v.numerator}/{v.denominator}", "xexp": i, "yexp": j}
            for (i, j), v in sorted(self.terms.items())
        ]

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def total_degree(self) -> int:
        return max((i + j for i, j in self.terms), default=-1)

    def __eq__(self, other) -> bool:
        return isinstance(other, BiPoly) and self.terms == other.terms

    def __repr__(self) -> str:
        return f"BiPoly({self.to_json()})"

    def dx(self) -> BiPoly:
        return BiPoly({(i - 1, j): v * i for (i, j), v in self.terms.items() if i})

    def dy(self) -> BiPoly:
        return BiPoly({(i, j - 1): v * j for (i, j), v in self.terms.items() if j})

    def as_y_poly(self) -> list[UPoly]:
        """Coefficient list in ``y`` (low first) with ``UPoly`` coefficients in ``x``."""
        dy = max((j for _, j in self.terms), default=-1)
        cols: list[list[Fraction]] = [[] for _ in range(dy + 1)]
        for (i, j), v in self.terms.items():
            col = cols[j]
            if len(col) <= i:
                col.extend([Fraction(0)] * (i + 1 - len(col)))
            col[i] += v
        return [UPoly(c) for c in cols]

    def at_x(self, a: Fraction) -> UPoly:
        """Specialize ``x = a``, giving a polynomial in ``y``."""
        return UPoly(c(a) for c in self.as_y_poly()) if self.terms else UPoly()

    def shear(self, lam: int) -> BiPoly:
        """Substitute ``x -> x + lam * y``."""
        if lam == 0:
            return self
        out: dict[tuple[int, int], Fraction] = {}
        for (i, j), v in self.terms.items():
            # (x + lam y)^i y^j = sum_k C(i,k) x^(i-k) lam^k y^(k+j)
            for k in range(i + 1):
                key = (i - k, j + k)
                out[key] = out.get(key, Fraction(0)) + v * math.comb(i, k) * Fraction(lam) ** k
        return BiPoly(out)

    def top_form_at(self, lam: int) -> Fraction:
        """Top homogeneous part evaluated at ``(lam, 1)``: the ``y**deg`` coefficient after shearing."""
        d = self.total_degree
        return sum((v * Fraction(lam) ** i for (i, j), v in self.terms.items() if i + j == d), Fraction(0))
