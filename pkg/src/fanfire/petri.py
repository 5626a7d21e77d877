"""Colored Petri nets: places, guarded transitions, markings and firing.

Nets are pure data.  Guards and actions are referenced by name and
resolved through a :class:`Registry` when a net is evaluated or executed,
so a net definition can be written to and read from JSON unchanged.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Mapping, Sequence

from .values import decode, encode, freeze

Guard = Callable[[Mapping[str, "TokenValue"]], bool]
Action = Callable[[Mapping[str, "TokenValue"]], "Mapping[str, TokenValue] | TokenValue"]


class PetriError(Exception):
    pass


class StaleBindingError(PetriError):
    """The binding is no longer enabled in the marking it was applied to."""


class TokenTypeError(PetriError):
    pass


class NetStructureError(PetriError):
    def __init__(self, violations: Sequence["Violation"]):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


@dataclass(frozen=True)
class TokenValue:
    tag: str
    payload: Any = None

    def __post_init__(self):
        object.__setattr__(self, "payload", freeze(self.payload))

    def to_json(self) -> dict:
        return {"tag": self.tag, "payload": encode(self.payload)}

    @classmethod
    def from_json(cls, data: Mapping) -> TokenValue:
        return cls(data["tag"], decode(data["payload"]))


@dataclass(frozen=True)
class Place:
    id: str
    accepts: str
    terminal: bool = False


@dataclass(frozen=True)
class Arc:
    place: str
    var: str
    tag: str | None = None


def _arc(a: Arc | Sequence) -> Arc:
    if isinstance(a, Arc):
        return a
    return Arc(*a)


@dataclass(frozen=True)
class Transition:
    id: str
    inputs: tuple[Arc, ...]
    outputs: tuple[Arc, ...] = ()
    guard: str = "true"
    action: str = "copy"

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(_arc(a) for a in self.inputs))
        object.__setattr__(self, "outputs", tuple(_arc(a) for a in self.outputs))


@dataclass(frozen=True)
class PetriNet:
    places: tuple[Place, ...] = ()
    transitions: tuple[Transition, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "places", tuple(self.places))
        object.__setattr__(self, "transitions", tuple(self.transitions))

    def place(self, pid: str) -> Place:
        for p in self.places:
            if p.id == pid:
                return p
        raise KeyError(pid)

    def transition(self, tid: str) -> Transition:
        for t in self.transitions:
            if t.id == tid:
                return t
        raise KeyError(tid)

    def to_json(self) -> dict:
        return {
            "places": [{"id": p.id, "accepts": p.accepts, "terminal": p.terminal} for p in self.places],
            "transitions": [
                {
                    "id": t.id,
                    "inputs": [_arc_json(a) for a in t.inputs],
                    "outputs": [_arc_json(a) for a in t.outputs],
                    "guard": t.guard,
                    "action": t.action,
                }
                for t in self.transitions
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> PetriNet:
        places = [Place(p["id"], p["accepts"], bool(p.get("terminal", False))) for p in data.get("places", [])]
        transitions = [
            Transition(
                t["id"],
                tuple(Arc(*a) for a in t.get("inputs", [])),
                tuple(Arc(*a) for a in t.get("outputs", [])),
                t.get("guard", "true"),
                t.get("action", "copy"),
            )
            for t in data.get("transitions", [])
        ]
        return cls(tuple(places), tuple(transitions))


def _arc_json(a: Arc) -> list:
    return [a.place, a.var] if a.tag is None else [a.place, a.var, a.tag]


@dataclass(frozen=True)
class Binding:
    transition: str
    tokens: tuple[int, ...]


class Marking:
    """Multiset of tokens per place; every token carries a run-unique id.

    Instances are treated as values: :func:`fire` returns a new marking and
    never mutates its argument.
    """

    __slots__ = ("_tokens", "next_id")

    def __init__(self, tokens: Mapping[str, Mapping[int, TokenValue]] | None = None, next_id: int | None = None):
        self._tokens: dict[str, dict[int, TokenValue]] = {
            p: dict(sorted(toks.items())) for p, toks in (tokens or {}).items() if toks
        }
        top = max((i for toks in self._tokens.values() for i in toks), default=-1)
        self.next_id = top + 1 if next_id is None else max(next_id, top + 1)

    @classmethod
    def of(cls, contents: Mapping[str, Iterable[TokenValue]]) -> Marking:
        """Build a marking, assigning ids ``0, 1, ...`` in iteration order."""
        counter = itertools.count()
        return cls({p: {next(counter): t for t in toks} for p, toks in contents.items()})

    def tokens(self, place: str) -> Mapping[int, TokenValue]:
        return self._tokens.get(place, {})

    def places(self) -> list[str]:
        return list(self._tokens)

    def items(self):
        """Yield ``(place, token_id, token)`` in place then id order."""
        for p in sorted(self._tokens):
            for i, t in self._tokens[p].items():
                yield p, i, t

    def locate(self, token_id: int) -> str | None:
        for p, toks in self._tokens.items():
            if token_id in toks:
                return p
        return None

    def count(self) -> int:
        return sum(len(t) for t in self._tokens.values())

    def is_empty(self) -> bool:
        return not self._tokens

    def values_multiset(self) -> dict[tuple[str, TokenValue], int]:
        """Contents with token ids forgotten."""
        out: dict[tuple[str, TokenValue], int] = {}
        for p, _, t in self.items():
            out[(p, t)] = out.get((p, t), 0) + 1
        return out

    def equal_modulo_ids(self, other: Marking) -> bool:
        return self.values_multiset() == other.values_multiset()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Marking):
            return NotImplemented
        return self._tokens == other._tokens

    def __repr__(self) -> str:
        inner = ", ".join(f"{p}: {len(t)}" for p, t in sorted(self._tokens.items()))
        return f"Marking({inner})"

    def to_json(self) -> dict:
        return {
            "next_id": self.next_id,
            "tokens": {p: [[i, t.to_json()] for i, t in toks.items()] for p, toks in sorted(self._tokens.items())},
        }

    @classmethod
    def from_json(cls, data: Mapping) -> Marking:
        tokens = {p: {int(i): TokenValue.from_json(t) for i, t in toks} for p, toks in data.get("tokens", {}).items()}
        return cls(tokens, data.get("next_id"))


class Registry:
    """Name -> callable tables for guards and actions."""

    def __init__(self, parent: Registry | None = None):
        self.guards: dict[str, Guard] = dict(parent.guards) if parent else {}
        self.actions: dict[str, Action] = dict(parent.actions) if parent else {}

    def guard(self, name: str):
        def deco(fn: Guard) -> Guard:
            self.guards[name] = fn
            return fn
        return deco

    def action(self, name: str):
        def deco(fn: Action) -> Action:
            self.actions[name] = fn
            return fn
        return deco

    def resolve_guard(self, name: str) -> Guard:
        try:
            return self.guards[name]
        except KeyError:
            raise PetriError(f"unknown guard {name!r}") from None

    def resolve_action(self, name: str) -> Action:
        try:
            return self.actions[name]
        except KeyError:
            raise PetriError(f"unknown action {name!r}") from None

    def extend(self) -> Registry:
        return Registry(self)


BUILTINS = Registry()
BUILTINS.guards["true"] = lambda bound: True


@BUILTINS.action("copy")
def _copy(bound):
    """Single input: forward it to every output.  Several inputs: forward a tuple of payloads."""
    vals = list(bound.values())
    return vals[0] if len(vals) == 1 else TokenValue(vals[0].tag, tuple(v.payload for v in vals))


@BUILTINS.action("drop")
def _drop(bound):
    return {}


def action_outputs(t: Transition, result: Mapping[str, TokenValue] | TokenValue) -> list[TokenValue]:
    """Order an action's result along the transition's output arcs.

    A bare :class:`TokenValue` result is placed on every output arc.
    """
    if isinstance(result, TokenValue):
        return [result] * len(t.outputs)
    missing = [a.var for a in t.outputs if a.var not in result]
    extra = set(result) - {a.var for a in t.outputs}
    if missing or extra:
        raise TokenTypeError(f"transition {t.id!r}: action output vars mismatch (missing {missing}, extra {sorted(extra)})")
    return [result[a.var] for a in t.outputs]


@dataclass(frozen=True)
class Violation:
    ref: str
    message: str

    def __str__(self) -> str:
        return f"{self.ref}: {self.message}"


def validate(net: PetriNet) -> list[Violation]:
    """Return every structural problem of ``net``; an empty list means well-formed."""
    errors: list[Violation] = []
    places: dict[str, Place] = {}
    for p in net.places:
        if p.id in places:
            errors.append(Violation(p.id, "duplicate place id"))
        places[p.id] = p
    seen_t: set[str] = set()
    consumed_from: set[str] = set()
    for t in net.transitions:
        if t.id in seen_t:
            errors.append(Violation(t.id, "duplicate transition id"))
        seen_t.add(t.id)
        if t.id in places:
            errors.append(Violation(t.id, "transition id clashes with a place id"))
        if not t.inputs:
            errors.append(Violation(t.id, "transition has no input arcs"))
        for kind, arcs in (("input", t.inputs), ("output", t.outputs)):
            names = [a.var for a in arcs]
            for dup in sorted({n for n in names if names.count(n) > 1}):
                errors.append(Violation(t.id, f"duplicate {kind} variable {dup!r}"))
            for a in arcs:
                p = places.get(a.place)
                if p is None:
                    errors.append(Violation(a.place, f"{kind} arc of {t.id!r} references missing place"))
                    continue
                if a.tag is not None and a.tag != p.accepts:
                    errors.append(Violation(t.id, f"{kind} arc tag {a.tag!r} does not match place {p.id!r} ({p.accepts!r})"))
        consumed_from.update(a.place for a in t.inputs)
    for pid in sorted(consumed_from):
        p = places.get(pid)
        if p is not None and p.terminal:
            errors.append(Violation(pid, "terminal place has outgoing arcs"))
    return errors


def check(net: PetriNet) -> PetriNet:
    errs = validate(net)
    if errs:
        raise NetStructureError(errs)
    return net


def bind(t: Transition, marking: Marking, token_ids: Sequence[int]) -> dict[str, TokenValue]:
    return {a.var: marking.tokens(a.place)[i] for a, i in zip(t.inputs, token_ids)}


class EnabledBindings(frozenset):
    """Enabled bindings; guard failures are kept in ``faulted`` instead of being dropped."""

    faulted: dict

    def __new__(cls, items=(), faulted=None):
        obj = super().__new__(cls, items)
        obj.faulted = dict(faulted or {})
        return obj


def enabled(net: PetriNet, marking: Marking, registry: Registry = BUILTINS) -> EnabledBindings:
    good = []
    faulted: dict[Binding, BaseException] = {}
    for t in net.transitions:
        if not t.inputs:
            continue
        pools = [list(marking.tokens(a.place)) for a in t.inputs]
        if any(not pool for pool in pools):
            continue
        guard = registry.resolve_guard(t.guard)
        for combo in itertools.product(*pools):
            if len(set(combo)) != len(combo):
                continue
            b = Binding(t.id, tuple(combo))
            try:
                ok = bool(guard(bind(t, marking, combo)))
            except Exception as exc:  # noqa: BLE001 - reported, not swallowed
                faulted[b] = exc
                continue
            if ok:
                good.append(b)
    return EnabledBindings(good, faulted)


def is_quiescent(net: PetriNet, marking: Marking, registry: Registry = BUILTINS) -> bool:
    en = enabled(net, marking, registry)
    return not en and not en.faulted


def check_binding(net: PetriNet, marking: Marking, binding: Binding) -> Transition:
    t = net.transition(binding.transition)
    if len(binding.tokens) != len(t.inputs):
        raise StaleBindingError(f"binding for {t.id!r} has {len(binding.tokens)} tokens, expected {len(t.inputs)}")
    if len(set(binding.tokens)) != len(binding.tokens):
        raise StaleBindingError(f"binding for {t.id!r} reuses a token")
    for a, tid in zip(t.inputs, binding.tokens):
        if tid not in marking.tokens(a.place):
            raise StaleBindingError(f"token {tid} is not on place {a.place!r}")
    return t


def check_outputs(net: PetriNet, t: Transition, outputs: Sequence[TokenValue]) -> None:
    if len(outputs) != len(t.outputs):
        raise TokenTypeError(f"transition {t.id!r} expects {len(t.outputs)} output tokens, got {len(outputs)}")
    for a, tok in zip(t.outputs, outputs):
        accepts = net.place(a.place).accepts
        if not isinstance(tok, TokenValue) or tok.tag != accepts:
            raise TokenTypeError(f"place {a.place!r} accepts {accepts!r}, got {tok!r}")


def fire(
    net: PetriNet,
    marking: Marking,
    binding: Binding,
    outputs: Sequence[TokenValue],
    registry: Registry | None = BUILTINS,
) -> Marking:
    """Consume the bound tokens and add ``outputs`` (in output-arc order) with fresh ids.

    With ``registry=None`` the guard is not re-evaluated (used by replay).
    """
    t = check_binding(net, marking, binding)
    if registry is not None:
        guard = registry.resolve_guard(t.guard)
        if not guard(bind(t, marking, binding.tokens)):
            raise StaleBindingError(f"guard {t.guard!r} of {t.id!r} is false for tokens {binding.tokens}")
    check_outputs(net, t, outputs)
    tokens = {p: dict(marking.tokens(p)) for p in marking.places()}
    for a, tid in zip(t.inputs, binding.tokens):
        del tokens[a.place][tid]
    nid = marking.next_id
    for a, tok in zip(t.outputs, outputs):
        tokens.setdefault(a.place, {})[nid] = tok
        nid += 1
    return Marking(tokens, nid)


def load_net(path) -> PetriNet:
    with open(path) as fh:
        return PetriNet.from_json(json.load(fh))


def load_marking(path) -> Marking:
    with open(path) as fh:
        return Marking.from_json(json.load(fh))


def fig1_net() -> PetriNet:
    """The fork/join example: ``s`` forks, ``f`` and ``g`` run independently, ``j`` joins."""
    item = "item"
    return PetriNet(
        (
            Place("i", item),
            Place("a", item),
            Place("b", item),
            Place("l", item),
            Place("r", item),
            Place("sink", item),
        ),
        (
            Transition("s", (Arc("i", "x"),), (Arc("a", "u"), Arc("b", "v"))),
            Transition("f", (Arc("a", "x"),), (Arc("l", "x"),)),
            Transition("g", (Arc("b", "x"),), (Arc("r", "x"),)),
            Transition("j", (Arc("l", "x"), Arc("r", "y")), (Arc("sink", "z"),)),
        ),
    )
