"""Immutable token payload values and their JSON codec.

Payloads are built from ``None``, ``bool``, ``int``, ``float``, ``str``,
``Fraction``, tuples, frozensets and :class:`PersistentSet`.  Lists are
frozen into tuples on the way in; mappings are rejected because they are
mutable.  ``decode(encode(v)) == v`` holds for every admissible value, with
types preserved.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Iterable, Iterator


class PayloadError(TypeError):
    pass


class PersistentSet:
    """Immutable set that shares structure with the version it was derived from.

    Each version stores only the items it added on top of its parent, so a
    chain of ``k`` versions costs ``O(total items)`` memory instead of
    ``O(k * items)``.  Only the newest version keeps a materialized lookup
    table; older versions fall back to walking the chain.
    """

    __slots__ = ("_parent", "_delta", "_size", "_cache", "_hash")

    def __init__(self, items: Iterable[Any] = ()):
        delta = frozenset(freeze(x) for x in items)
        self._parent: PersistentSet | None = None
        self._delta = delta
        self._size = len(delta)
        self._cache: frozenset | None = delta
        self._hash: int | None = None

    @classmethod
    def _child(cls, parent: PersistentSet, delta: frozenset, cache: frozenset) -> PersistentSet:
        obj = cls.__new__(cls)
        obj._parent = parent
        obj._delta = delta
        obj._size = parent._size + len(delta)
        obj._cache = cache
        obj._hash = None
        return obj

    def _materialize(self) -> frozenset:
        cache = self._cache
        if cache is not None:
            return cache
        parts = []
        node: PersistentSet | None = self
        while node is not None:
            parts.append(node._delta)
            node = node._parent
        return frozenset().union(*parts)

    def adding(self, items: Iterable[Any]) -> tuple[PersistentSet, tuple]:
        """Return ``(new_version, genuinely_new_items)``; order of first appearance kept."""
        base = self._materialize()
        fresh = []
        seen = set()
        for x in items:
            x = freeze(x)
            if x in base or x in seen:
                continue
            seen.add(x)
            fresh.append(x)
        if not fresh:
            return self, ()
        delta = frozenset(fresh)
        child = PersistentSet._child(self, delta, base | delta)
        # drop the superseded table; reads on this version walk the chain
        self._cache = None
        return child, tuple(fresh)

    def __contains__(self, x: Any) -> bool:
        cache = self._cache
        if cache is not None:
            return x in cache
        node: PersistentSet | None = self
        while node is not None:
            if x in node._delta:
                return True
            node = node._parent
        return False

    def __len__(self) -> int:
        return self._size

    def __iter__(self) -> Iterator[Any]:
        return iter(self._materialize())

    def to_frozenset(self) -> frozenset:
        return self._materialize()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PersistentSet):
            return NotImplemented
        return self._size == other._size and self._materialize() == other._materialize()

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(("pset", self._materialize()))
        return self._hash

    def __repr__(self) -> str:
        return f"PersistentSet(<{self._size} items>)"


def freeze(value: Any) -> Any:
    """Convert ``value`` into an admissible immutable payload."""
    if value is None or isinstance(value, (bool, int, float, str, Fraction, PersistentSet)):
        return value
    if isinstance(value, (list, tuple)):
        return tuple(freeze(x) for x in value)
    if isinstance(value, (set, frozenset)):
        return frozenset(freeze(x) for x in value)
    raise PayloadError(f"payload of type {type(value).__name__} is not admissible")


def _sort_key(encoded: Any) -> str:
    return json.dumps(encoded, sort_keys=True, separators=(",", ":"))


def encode(value: Any) -> Any:
    """Encode a payload into plain JSON data."""
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    if isinstance(value, Fraction):
        return {"$q": f"{value.numerator}/{value.denominator}"}
    if isinstance(value, tuple):
        return [encode(x) for x in value]
    if isinstance(value, frozenset):
        return {"$set": sorted((encode(x) for x in value), key=_sort_key)}
    if isinstance(value, PersistentSet):
        return {"$pset": sorted((encode(x) for x in value), key=_sort_key)}
    raise PayloadError(f"cannot encode payload of type {type(value).__name__}")


def decode(data: Any) -> Any:
    if data is None or isinstance(data, (bool, int, float, str)):
        return data
    if isinstance(data, list):
        return tuple(decode(x) for x in data)
    if isinstance(data, dict):
        if set(data) == {"$q"}:
            return Fraction(data["$q"])
        if set(data) == {"$set"}:
            return frozenset(decode(x) for x in data["$set"])
        if set(data) == {"$pset"}:
            return PersistentSet(decode(x) for x in data["$pset"])
    raise PayloadError(f"cannot decode payload {data!r}")


def dumps(value: Any) -> str:
    """Canonical JSON text for a payload (stable across runs)."""
    return json.dumps(encode(value), sort_keys=True, separators=(",", ":"))
