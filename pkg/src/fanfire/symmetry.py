"""Signed permutation groups acting on sign vectors.

A sign vector is a tuple over ``{-1, 0, +1}``; the global order used for
canonical forms is ``- < 0 < +``, i.e. the numeric order.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels

DEFAULT_CAP = 10**6

SignVector = tuple[int, ...]

_CHARS = {"+": 1, "-": -1, "0": 0}
_SYMS = {1: "+", -1: "-", 0: "0"}


def parse_signs(text: str) -> SignVector:
    try:
        return tuple(_CHARS[c] for c in text)
    except KeyError as exc:
        raise ValueError(f"bad sign character {exc.args[0]!r} in {text!r}") from None


def format_signs(s: Sequence[int]) -> str:
    return "".join(_SYMS[int(v)] for v in s)


class GroupOverflowError(RuntimeError):
    pass


@dataclass(frozen=True)
class SignedPermutation:
    sigma: tuple[int, ...]
    eps: tuple[int, ...]

    def __post_init__(self):
        sigma = tuple(int(v) for v in self.sigma)
        eps = tuple(int(v) for v in self.eps)
        m = len(sigma)
        if sorted(sigma) != list(range(m)):
            raise ValueError(f"sigma {sigma} is not a permutation of 0..{m - 1}")
        if len(eps) != m or any(e not in (1, -1) for e in eps):
            raise ValueError(f"eps {eps} must be {m} entries of +1/-1")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "eps", eps)

    @property
    def m(self) -> int:
        return len(self.sigma)

    @classmethod
    def identity(cls, m: int) -> SignedPermutation:
        return cls(tuple(range(m)), (1,) * m)

    @classmethod
    def from_cycles(cls, m: int, cycles: Iterable[Sequence[int]] = (), eps: Sequence[int] | None = None):
        sigma = list(range(m))
        for cyc in cycles:
            for a, b in zip(cyc, list(cyc[1:]) + [cyc[0]]):
                sigma[a] = b
        return cls(tuple(sigma), tuple(eps) if eps is not None else (1,) * m)

    def __matmul__(self, other: SignedPermutation) -> SignedPermutation:
        """``self @ other`` applies ``other`` first."""
        if other.m != self.m:
            raise ValueError("size mismatch")
        sigma = tuple(self.sigma[other.sigma[i]] for i in range(self.m))
        eps = tuple(self.eps[other.sigma[i]] * other.eps[i] for i in range(self.m))
        return SignedPermutation(sigma, eps)

    def inverse(self) -> SignedPermutation:
        inv = [0] * self.m
        for i, j in enumerate(self.sigma):
            inv[j] = i
        return SignedPermutation(tuple(inv), tuple(self.eps[inv[j]] for j in range(self.m)))

    def to_json(self) -> dict:
        return {"sigma": list(self.sigma), "eps": list(self.eps)}


def act(g: SignedPermutation, s: Sequence[int]) -> SignVector:
    if len(s) != g.m:
        raise ValueError(f"sign vector of length {len(s)} for a group on {g.m} indices")
    out = [0] * g.m
    for i, v in enumerate(s):
        out[g.sigma[i]] = g.eps[i] * v
    return tuple(out)


class Group:
    """Enumerated finite group of signed permutations (immutable once closed)."""

    def __init__(self, m: int, generators: Sequence[SignedPermutation], elements: Sequence[SignedPermutation]):
        self.m = m
        self.generators = tuple(generators)
        self.elements = tuple(elements)
        self._sigma = np.array([g.sigma for g in self.elements], dtype=np.int64).reshape(len(self.elements), m)
        self._eps = np.array([g.eps for g in self.elements], dtype=np.int8).reshape(len(self.elements), m)

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def order(self) -> int:
        return len(self.elements)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return self._sigma, self._eps

    def to_json(self) -> dict:
        return {"m": self.m, "generators": [g.to_json() for g in self.generators]}

    @classmethod
    def trivial(cls, m: int) -> Group:
        return close([], m)


def close(generators: Sequence[SignedPermutation], m: int, cap: int = DEFAULT_CAP) -> Group:
    """Breadth-first closure of ``generators`` under composition."""
    for g in generators:
        if g.m != m:
            raise ValueError(f"generator on {g.m} indices, expected {m}")
    ident = SignedPermutation.identity(m)
    seen = {ident}
    order = [ident]
    queue = deque([ident])
    while queue:
        h = queue.popleft()
        for g in generators:
            k = g @ h
            if k not in seen:
                if len(seen) >= cap:
                    raise GroupOverflowError(f"group closure exceeds cap {cap}")
                seen.add(k)
                order.append(k)
                queue.append(k)
    return Group(m, generators, order)


def _vec(G: Group, s: Sequence[int]) -> np.ndarray:
    if len(s) != G.m:
        raise ValueError(f"sign vector of length {len(s)} for a group on {G.m} indices")
    return np.asarray(s, dtype=np.int8)


def canonical(G: Group, s: Sequence[int]) -> SignVector:
    """Lexicographically least image of ``s`` under ``G``."""
    sigma, eps = G.arrays()
    return tuple(int(v) for v in _kernels.lexmin(sigma, eps, _vec(G, s)))


def orbit_size(G: Group, s: Sequence[int]) -> int:
    sigma, eps = G.arrays()
    return _kernels.orbit_count(sigma, eps, _vec(G, s))


def orbit(G: Group, s: Sequence[int]) -> set[SignVector]:
    return {act(g, s) for g in G.elements}


def group_from_json(data: dict, cap: int = DEFAULT_CAP) -> Group:
    m = int(data["m"])
    gens = [SignedPermutation(tuple(g["sigma"]), tuple(g.get("eps", [1] * m))) for g in data.get("generators", [])]
    return close(gens, m, cap)


def load_group(path, cap: int = DEFAULT_CAP) -> Group:
    with open(path) as fh:
        return group_from_json(json.load(fh), cap)
