"""Parallel closure of an expansion oracle as a Petri net workflow.

Places and transitions of the net built by :func:`build_traversal_net`::

    frontier --expand--> candidates --dedup--> spawn --split--> frontier
                             registry <--dedup-->       spawn --drain--> (nothing)

``expand`` runs the oracle on a worker and emits one batch token with the
canonical neighbours.  ``dedup`` consumes a batch together with the single
registry token, so all registry updates are serialized while expansions
proceed in parallel.  ``split`` peels one new state per firing off the
spawn list; ``drain`` removes the exhausted list.  The run ends by
quiescence and the result is the set held by the final registry token.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Any, Hashable, Iterable, Mapping, Protocol, Sequence

from . import _kernels
from .arrangement import Arrangement, Chamber, feasible, generic_point, neighbors, sign_of_point
from .petri import Arc, Marking, PetriNet, Place, Registry, BUILTINS, TokenValue, Transition
from .runtime import RunConfig, RunResult, cancellation_requested, current_cancel_event, run
from .symmetry import Group, canonical, format_signs, orbit_size, parse_signs
from .values import PersistentSet, dumps

STATE = "state"
BATCH = "batch"
REGISTRY = "registry"


class ExpansionOracle(Protocol):
    def start(self) -> Hashable: ...

    def expand(self, state: Hashable) -> list[Hashable]: ...

    def canonicalize(self, state: Hashable) -> Hashable: ...


def build_traversal_net() -> PetriNet:
    return PetriNet(
        (
            Place("frontier", STATE),
            Place("candidates", BATCH),
            Place("registry", REGISTRY),
            Place("spawn", BATCH),
        ),
        (
            Transition("expand", (Arc("frontier", "s"),), (Arc("candidates", "batch"),), action="expand"),
            Transition(
                "dedup",
                (Arc("candidates", "batch"), Arc("registry", "known")),
                (Arc("registry", "known"), Arc("spawn", "fresh")),
                action="dedup",
            ),
            Transition(
                "split",
                (Arc("spawn", "batch"),),
                (Arc("frontier", "head"), Arc("spawn", "rest")),
                guard="nonempty",
                action="split",
            ),
            Transition("drain", (Arc("spawn", "batch"),), (), guard="empty", action="drop"),
        ),
    )


def traversal_registry(oracle: ExpansionOracle) -> Registry:
    reg = BUILTINS.extend()

    @reg.action("expand")
    def _expand(bound):
        nbrs = oracle.expand(bound["s"].payload)
        return {"batch": TokenValue(BATCH, tuple(oracle.canonicalize(x) for x in nbrs))}

    @reg.action("dedup")
    def _dedup(bound):
        known: PersistentSet = bound["known"].payload
        updated, fresh = known.adding(bound["batch"].payload)
        return {"known": TokenValue(REGISTRY, updated), "fresh": TokenValue(BATCH, fresh)}

    @reg.action("split")
    def _split(bound):
        items = bound["batch"].payload
        return {"head": TokenValue(STATE, items[0]), "rest": TokenValue(BATCH, items[1:])}

    reg.guards["nonempty"] = lambda bound: len(bound["batch"].payload) > 0
    reg.guards["empty"] = lambda bound: len(bound["batch"].payload) == 0
    return reg


def initial_marking(oracle: ExpansionOracle) -> Marking:
    root = oracle.canonicalize(oracle.start())
    return Marking.of({"frontier": [TokenValue(STATE, root)], "registry": [TokenValue(REGISTRY, PersistentSet([root]))]})


@dataclass
class TraversalOutcome:
    representatives: dict[Any, int]  # canonical state -> orbit size
    run: RunResult
    net: PetriNet

    def as_set(self) -> set[tuple[Any, int]]:
        return set(self.representatives.items())

    def states(self) -> set:
        return set(self.representatives)


def known_states(result: RunResult) -> frozenset:
    regs = list(result.final.tokens("registry").values())
    if len(regs) != 1:
        raise RuntimeError(f"expected one registry token, found {len(regs)}")
    return regs[0].payload.to_frozenset()


def traverse(oracle: ExpansionOracle, group: Group | None = None, config: RunConfig | None = None) -> TraversalOutcome:
    net = build_traversal_net()
    result = run(net, initial_marking(oracle), config or RunConfig(), traversal_registry(oracle))
    states = known_states(result)
    if group is None:
        reps = {s: 1 for s in states}
    else:
        size = getattr(oracle, "orbit_size", None)
        reps = {s: (size(s) if size else orbit_size(group, s)) for s in states}
    return TraversalOutcome(reps, result, net)


def run_traversal(oracle: ExpansionOracle, group: Group | None = None, config: RunConfig | None = None) -> set[tuple[Any, int]]:
    """Canonical states reachable from ``oracle.start()`` with their orbit sizes."""
    return traverse(oracle, group, config).as_set()


def bfs_closure(oracle: ExpansionOracle) -> set:
    """Sequential breadth-first reference for :func:`run_traversal`."""
    root = oracle.canonicalize(oracle.start())
    seen = {root}
    todo = deque([root])
    while todo:
        s = todo.popleft()
        for nb in oracle.expand(s):
            c = oracle.canonicalize(nb)
            if c not in seen:
                seen.add(c)
                todo.append(c)
    return seen


def result_json(outcome_or_reps: TraversalOutcome | Mapping[Any, int], encode_state=None) -> list[dict]:
    reps = outcome_or_reps.representatives if isinstance(outcome_or_reps, TraversalOutcome) else outcome_or_reps
    enc = encode_state or (lambda s: s)
    rows = [{"state": enc(s), "orbit_size": k} for s, k in reps.items()]
    rows.sort(key=lambda r: dumps(r["state"]))
    return rows


# ---------------------------------------------------------------- oracles

class GraphOracle:
    """Expansion along an explicit adjacency map; states are the map's keys."""

    def __init__(self, adjacency: Mapping[Hashable, Sequence[Hashable]], start: Hashable, cost_ms: float = 0.0):
        self.adjacency = {k: tuple(v) for k, v in adjacency.items()}
        self._start = start
        self.cost_ms = cost_ms

    def start(self):
        return self._start

    def expand(self, state):
        if self.cost_ms:
            _kernels.busy_wait(self.cost_ms, current_cancel_event())
        return list(self.adjacency.get(state, ()))

    def canonicalize(self, state):
        return state


class ChamberOracle:
    """Chambers of a central arrangement, optionally up to a signed-permutation symmetry.

    States are sign strings such as ``"+-+"``.  Without an explicit start
    point the traversal begins at the chamber of the first point
    ``(1, t, t**2, ...)`` with ``t = 1, 2, ...`` lying on no hyperplane.
    """

    def __init__(self, arr: Arrangement, group: Group | None = None, start_point=None, cost_ms: float = 0.0):
        if group is not None and group.m != arr.m:
            raise ValueError(f"group acts on {group.m} indices, arrangement has {arr.m}")
        self.arr = arr
        self.group = group
        self.start_point = tuple(start_point) if start_point is not None else None
        self.cost_ms = cost_ms

    def start(self) -> str:
        x = self.start_point if self.start_point is not None else generic_point(self.arr)
        s = sign_of_point(self.arr, x)
        if 0 in s:
            raise ValueError("start point lies on a hyperplane")
        return format_signs(s)

    def expand(self, state: str) -> list[str]:
        if self.cost_ms:
            _kernels.busy_wait(self.cost_ms, current_cancel_event())
        signs = parse_signs(state)
        c = Chamber(signs, ())
        return [format_signs(n.signs) for _, n in neighbors(self.arr, c)]

    def canonicalize(self, state: str) -> str:
        if self.group is None:
            return state
        return format_signs(canonical(self.group, parse_signs(state)))

    def orbit_size(self, state: str) -> int:
        if self.group is None:
            return 1
        return orbit_size(self.group, parse_signs(state))

    def chamber(self, state: str) -> Chamber:
        signs = parse_signs(state)
        return Chamber(signs, feasible(self.arr, signs))
