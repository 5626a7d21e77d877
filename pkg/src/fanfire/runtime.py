"""Parallel execution of Petri nets with a coordinator and a pool of workers.

The coordinator owns the marking.  When it dispatches a binding, the bound
tokens leave the marking immediately; the worker evaluates the action and
sends the outputs back, and only then are the outputs committed (with
fresh token ids) and a :class:`FiringRecord` appended to the trace.  A
failed action puts its tokens back.  A token landing on a terminal place
cancels the run: nothing dispatched afterwards is committed.

Guards run on the coordinator, actions on workers.  Workers are threads
fed through in-memory queues with serializable dispatch/result messages
(:class:`DispatchMessage`, :class:`ResultMessage`), so a networked
transport only has to move those two message types.
"""

from __future__ import annotations

import hashlib
import heapq
import itertools
import json
import logging
import queue
import random
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

from .petri import (
    BUILTINS,
    Binding,
    Marking,
    PetriError,
    PetriNet,
    Registry,
    TokenTypeError,
    TokenValue,
    Transition,
    action_outputs,
    check,
    check_outputs,
)

log = logging.getLogger(__name__)

COMPLETED = "completed"
CANCELLED = "cancelled"


class FaultedTransitionError(PetriError):
    """An action exhausted its retries (or failed permanently), or a guard raised."""

    def __init__(self, binding: Binding, cause: BaseException | str, attempts: int = 0, kind: str | None = None):
        self.binding = binding
        self.cause = cause
        self.attempts = attempts
        self.kind = kind or (type(cause).__name__ if isinstance(cause, BaseException) else None)
        super().__init__(
            f"transition {binding.transition!r} faulted on tokens {list(binding.tokens)} "
            f"after {attempts} attempt(s): {cause}"
        )


class TraceCorruptionError(PetriError):
    def __init__(self, seq: int, message: str):
        self.seq = seq
        super().__init__(f"trace record {seq}: {message}")


class PermanentActionError(Exception):
    """Raised by an action whose failure is deterministic; the run aborts without retrying."""


class InjectedFailure(Exception):
    pass


@dataclass
class RunConfig:
    workers: int = 1
    seed: int = 0
    trace_enabled: bool = True
    failure_injection: float = 0.0
    max_retries: int = 3

    def __post_init__(self):
        if int(self.workers) < 1:
            raise ValueError("workers must be >= 1")
        if not 0.0 <= float(self.failure_injection) <= 1.0:
            raise ValueError("failure_injection must lie in [0, 1]")
        if int(self.max_retries) < 0:
            raise ValueError("max_retries must be >= 0")
        self.workers = int(self.workers)
        self.max_retries = int(self.max_retries)


@dataclass(frozen=True)
class FiringRecord:
    seq: int
    transition: str
    consumed: tuple[int, ...]
    produced: tuple[tuple[str, int, TokenValue], ...]
    worker: int
    duration_ns: int

    def to_json(self, timing: bool = True) -> dict:
        return {
            "seq": self.seq,
            "transition": self.transition,
            "consumed": list(self.consumed),
            "produced": [[p, i, t.to_json()] for p, i, t in self.produced],
            "worker": self.worker,
            "duration_ns": self.duration_ns if timing else 0,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> FiringRecord:
        return cls(
            int(data["seq"]),
            str(data["transition"]),
            tuple(int(i) for i in data["consumed"]),
            tuple((str(p), int(i), TokenValue.from_json(t)) for p, i, t in data["produced"]),
            int(data["worker"]),
            int(data["duration_ns"]),
        )


def dump_trace(trace: Iterable[FiringRecord], fh, timing: bool = True) -> None:
    for rec in trace:
        fh.write(json.dumps(rec.to_json(timing), separators=(",", ":")))
        fh.write("\n")


def trace_bytes(trace: Iterable[FiringRecord], timing: bool = True) -> bytes:
    return "".join(json.dumps(r.to_json(timing), separators=(",", ":")) + "\n" for r in trace).encode()


def load_trace(path) -> list[FiringRecord]:
    """Read a JSON-lines trace; an unparsable line raises :class:`TraceCorruptionError`."""
    out = []
    with open(path) as fh:
        for k, line in enumerate(fh):
            if not line.strip():
                continue
            try:
                out.append(FiringRecord.from_json(json.loads(line)))
            except (ValueError, KeyError, TypeError) as exc:
                raise TraceCorruptionError(k, f"unreadable record ({exc})") from None
    return out


@dataclass
class RunStats:
    per_transition: dict[str, int] = field(default_factory=dict)
    total_firings: int = 0
    wall_time_s: float = 0.0
    busy_ns: list[int] = field(default_factory=list)
    dispatched: int = 0
    retries: int = 0
    discarded: int = 0

    def busy_fraction(self) -> list[float]:
        wall = max(self.wall_time_s, 1e-12)
        return [b / 1e9 / wall for b in self.busy_ns]

    def to_json(self) -> dict:
        return {
            "per_transition": dict(sorted(self.per_transition.items())),
            "total_firings": self.total_firings,
            "wall_time_s": self.wall_time_s,
            "busy_ns": list(self.busy_ns),
            "dispatched": self.dispatched,
            "retries": self.retries,
            "discarded": self.discarded,
        }


@dataclass
class RunResult:
    initial: Marking
    final: Marking
    verdict: str
    terminal_place: str | None
    trace: list[FiringRecord] | None
    stats: RunStats

    @property
    def cancelled(self) -> bool:
        return self.verdict == CANCELLED


@dataclass(frozen=True)
class DispatchMessage:
    dispatch_id: int
    transition: str
    bound: tuple[tuple[str, TokenValue], ...]
    inject_failure: bool = False

    def to_json(self) -> dict:
        return {
            "dispatch_id": self.dispatch_id,
            "transition": self.transition,
            "bound": [[v, t.to_json()] for v, t in self.bound],
            "inject_failure": self.inject_failure,
        }


@dataclass(frozen=True)
class ResultMessage:
    dispatch_id: int
    worker: int
    outputs: tuple[TokenValue, ...] | None
    error: str | None
    error_type: str | None
    permanent: bool
    duration_ns: int

    def to_json(self) -> dict:
        return {
            "dispatch_id": self.dispatch_id,
            "worker": self.worker,
            "outputs": None if self.outputs is None else [t.to_json() for t in self.outputs],
            "error": self.error,
            "error_type": self.error_type,
            "permanent": self.permanent,
            "duration_ns": self.duration_ns,
        }


_context = threading.local()


def current_cancel_event() -> threading.Event | None:
    """Cancellation flag of the run executing the calling action (None outside a worker)."""
    return getattr(_context, "cancel", None)


def cancellation_requested() -> bool:
    ev = current_cancel_event()
    return ev is not None and ev.is_set()


class _Worker(threading.Thread):
    def __init__(self, wid: int, net: PetriNet, registry: Registry, inbox: queue.Queue, outbox: queue.Queue, cancel):
        super().__init__(name=f"fanfire-worker-{wid}", daemon=True)
        self.wid = wid
        self.transitions = {t.id: t for t in net.transitions}
        self.registry = registry
        self.inbox = inbox
        self.outbox = outbox
        self.cancel = cancel

    def run(self):
        _context.cancel = self.cancel
        while True:
            msg = self.inbox.get()
            if msg is None:
                return
            t0 = time.perf_counter_ns()
            outputs = None
            error = None
            error_type = None
            permanent = False
            try:
                if msg.inject_failure:
                    raise InjectedFailure("injected failure")
                t = self.transitions[msg.transition]
                fn = self.registry.resolve_action(t.action)
                outputs = tuple(action_outputs(t, fn(dict(msg.bound))))
            except (PermanentActionError, PetriError) as exc:
                error, error_type = str(exc), type(exc).__name__
                permanent = True
            except Exception as exc:  # noqa: BLE001 - every action failure is reported back
                error, error_type = str(exc), type(exc).__name__
            dt = time.perf_counter_ns() - t0
            self.outbox.put(ResultMessage(msg.dispatch_id, self.wid, outputs, error, error_type, permanent, dt))


def _tiebreak(seed: int, tid: str, ids: Sequence[int]) -> int:
    h = hashlib.blake2b(f"{seed}|{tid}|{','.join(map(str, ids))}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "big")


@dataclass
class _InFlight:
    transition: Transition
    tokens: tuple[int, ...]
    values: tuple[TokenValue, ...]


class _Engine:
    def __init__(self, net: PetriNet, initial: Marking, config: RunConfig, registry: Registry):
        self.net = check(net)
        self.config = config
        self.registry = registry
        self.places = {p.id: p for p in net.places}
        for p, _, tok in initial.items():
            if p not in self.places:
                raise TokenTypeError(f"initial marking uses unknown place {p!r}")
            if tok.tag != self.places[p].accepts:
                raise TokenTypeError(f"place {p!r} accepts {self.places[p].accepts!r}, initial token has {tok.tag!r}")
        self.tokens: dict[str, dict[int, TokenValue]] = {p: {} for p in self.places}
        for p, i, tok in initial.items():
            self.tokens[p][i] = tok
        self.next_id = initial.next_id
        self.single: dict[str, list[Transition]] = {p: [] for p in self.places}
        self.multi: list[Transition] = []
        for t in net.transitions:
            if len(t.inputs) == 1:
                self.single[t.inputs[0].place].append(t)
            else:
                self.multi.append(t)
        self.guards = {t.id: registry.resolve_guard(t.guard) for t in net.transitions}
        self.ready: dict[str, list[int]] = {t.id: [] for t in net.transitions if len(t.inputs) == 1}
        self.passes: dict[int, list[str]] = {}
        self.rejected: dict[str, set[tuple[int, ...]]] = {t.id: set() for t in self.multi}
        self.rng = random.Random(config.seed)
        self.trace: list[FiringRecord] | None = [] if config.trace_enabled else None
        self.stats = RunStats(busy_ns=[0] * config.workers)
        self.retries: dict[Binding, int] = {}
        for p in self.places:
            for i in list(self.tokens[p]):
                self._arrive(p, i)

    def _eval_guard(self, t: Transition, ids: tuple[int, ...]) -> bool:
        bound = {a.var: self.tokens[a.place][i] for a, i in zip(t.inputs, ids)}
        try:
            return bool(self.guards[t.id](bound))
        except Exception as exc:  # noqa: BLE001
            raise FaultedTransitionError(Binding(t.id, ids), exc) from exc

    def _arrive(self, place: str, tid: int) -> None:
        passing = []
        for t in self.single[place]:
            if self._eval_guard(t, (tid,)):
                passing.append(t.id)
                heapq.heappush(self.ready[t.id], tid)
        if passing:
            self.passes[tid] = passing

    def _search(self, t: Transition) -> tuple[int, ...] | None:
        pools = []
        for a in t.inputs:
            pool = self.tokens[a.place]
            if not pool:
                return None
            pools.append(sorted(pool))
        rejected = self.rejected[t.id]
        for combo in itertools.product(*pools):
            if len(set(combo)) != len(combo) or combo in rejected:
                continue
            if self._eval_guard(t, combo):
                return combo
            rejected.add(combo)
        return None

    def next_binding(self) -> tuple[Transition, tuple[int, ...]] | None:
        """Oldest enabled binding (by its newest token id); ties broken by a seed-keyed hash."""
        best = None
        seed = self.config.seed
        for p, consumers in self.single.items():
            pool = self.tokens[p]
            for t in consumers:
                heap = self.ready[t.id]
                while heap and heap[0] not in pool:
                    heapq.heappop(heap)
                if heap:
                    ids = (heap[0],)
                    key = (ids[0], _tiebreak(seed, t.id, ids))
                    if best is None or key < best[0]:
                        best = (key, t, ids)
        for t in self.multi:
            ids = self._search(t)
            if ids is not None:
                key = (max(ids), _tiebreak(seed, t.id, ids))
                if best is None or key < best[0]:
                    best = (key, t, ids)
        return None if best is None else (best[1], best[2])

    def take(self, t: Transition, ids: tuple[int, ...]) -> _InFlight:
        values = []
        for a, i in zip(t.inputs, ids):
            values.append(self.tokens[a.place].pop(i))
        return _InFlight(t, ids, tuple(values))

    def restore(self, f: _InFlight) -> None:
        for a, i, v in zip(f.transition.inputs, f.tokens, f.values):
            self.tokens[a.place][i] = v
            for tid in self.passes.get(i, ()):
                heapq.heappush(self.ready[tid], i)

    def commit(self, f: _InFlight, outputs: Sequence[TokenValue], worker: int, duration_ns: int) -> str | None:
        t = f.transition
        check_outputs(self.net, t, outputs)
        produced = []
        terminal = None
        for a, tok in zip(t.outputs, outputs):
            nid = self.next_id
            self.next_id += 1
            self.tokens[a.place][nid] = tok
            produced.append((a.place, nid, tok))
            if self.places[a.place].terminal and terminal is None:
                terminal = a.place
        for i in f.tokens:
            self.passes.pop(i, None)
        seq = self.stats.total_firings
        self.stats.total_firings += 1
        self.stats.per_transition[t.id] = self.stats.per_transition.get(t.id, 0) + 1
        if self.trace is not None:
            self.trace.append(FiringRecord(seq, t.id, f.tokens, tuple(produced), worker, duration_ns))
        if terminal is None:
            for p, nid, _ in produced:
                self._arrive(p, nid)
        return terminal

    def marking(self) -> Marking:
        return Marking(self.tokens, self.next_id)

    def execute(self) -> tuple[str, str | None]:
        cfg = self.config
        inbox: queue.Queue = queue.Queue()
        outbox: queue.Queue = queue.Queue()
        cancel = threading.Event()
        workers = [_Worker(k, self.net, self.registry, inbox, outbox, cancel) for k in range(cfg.workers)]
        for w in workers:
            w.start()
        inflight: dict[int, _InFlight] = {}
        dispatch_ids = itertools.count()
        verdict, terminal = COMPLETED, None
        try:
            while True:
                while len(inflight) < cfg.workers:
                    nb = self.next_binding()
                    if nb is None:
                        break
                    t, ids = nb
                    f = self.take(t, ids)
                    did = next(dispatch_ids)
                    inflight[did] = f
                    inject = cfg.failure_injection > 0 and self.rng.random() < cfg.failure_injection
                    bound = tuple((a.var, v) for a, v in zip(t.inputs, f.values))
                    inbox.put(DispatchMessage(did, t.id, bound, inject))
                    self.stats.dispatched += 1
                if not inflight:
                    break
                msg: ResultMessage = outbox.get()
                f = inflight.pop(msg.dispatch_id)
                self.stats.busy_ns[msg.worker] += msg.duration_ns
                binding = Binding(f.transition.id, f.tokens)
                if msg.error is not None:
                    attempts = self.retries.get(binding, 0) + 1
                    self.retries[binding] = attempts
                    self.restore(f)
                    if msg.permanent or attempts > cfg.max_retries:
                        raise FaultedTransitionError(binding, f"{msg.error_type}: {msg.error}", attempts, msg.error_type)
                    self.stats.retries += 1
                    log.debug("retrying %s after %s", binding, msg.error)
                    continue
                try:
                    hit = self.commit(f, msg.outputs, msg.worker, msg.duration_ns)
                except TokenTypeError as exc:
                    self.restore(f)
                    raise FaultedTransitionError(binding, exc, self.retries.get(binding, 0) + 1) from exc
                if hit is not None:
                    verdict, terminal = CANCELLED, hit
                    break
        finally:
            cancel.set()
            self.stats.discarded = len(inflight)
            # abandoned work never committed, so its tokens go back into the final marking
            for f in inflight.values():
                self.restore(f)
            for _ in workers:
                inbox.put(None)
            for w in workers:
                w.join()
        return verdict, terminal


def run(net: PetriNet, initial: Marking, config: RunConfig | None = None, registry: Registry = BUILTINS) -> RunResult:
    """Execute ``net`` from ``initial`` until quiescence (completed) or a terminal token (cancelled)."""
    config = config or RunConfig()
    t0 = time.perf_counter()
    engine = _Engine(net, initial, config, registry)
    verdict, terminal = engine.execute()
    engine.stats.wall_time_s = time.perf_counter() - t0
    return RunResult(initial, engine.marking(), verdict, terminal, engine.trace, engine.stats)


def run_deterministic(
    net: PetriNet, initial: Marking, config: RunConfig | None = None, registry: Registry = BUILTINS
) -> RunResult:
    """Single-worker run whose trace (timing fields aside) is a function of the inputs and seed."""
    config = config or RunConfig()
    if config.workers != 1:
        raise ValueError("run_deterministic requires workers == 1")
    return run(net, initial, config, registry)


def replay(net: PetriNet, initial: Marking, trace: Sequence[FiringRecord]) -> Marking:
    """Re-apply recorded firings (actions are not re-run) and return the resulting marking."""
    check(net)
    places = {p.id: p for p in net.places}
    transitions = {t.id: t for t in net.transitions}
    tokens: dict[str, dict[int, TokenValue]] = {p: {} for p in places}
    where: dict[int, str] = {}
    for p, i, tok in initial.items():
        tokens.setdefault(p, {})[i] = tok
        where[i] = p
    used = set(where)
    next_id = initial.next_id
    for k, rec in enumerate(trace):
        if rec.seq != k:
            raise TraceCorruptionError(k, f"record carries sequence number {rec.seq}")
        t = transitions.get(rec.transition)
        if t is None:
            raise TraceCorruptionError(k, f"unknown transition {rec.transition!r}")
        if len(rec.consumed) != len(t.inputs) or len(set(rec.consumed)) != len(rec.consumed):
            raise TraceCorruptionError(k, "consumed tokens do not match the input arcs")
        for a, i in zip(t.inputs, rec.consumed):
            if where.get(i) != a.place:
                raise TraceCorruptionError(k, f"token {i} is not on place {a.place!r}")
        if len(rec.produced) != len(t.outputs):
            raise TraceCorruptionError(k, "produced tokens do not match the output arcs")
        for a, (p, i, tok) in zip(t.outputs, rec.produced):
            if p != a.place:
                raise TraceCorruptionError(k, f"token {i} produced on {p!r}, arc goes to {a.place!r}")
            if tok.tag != places[p].accepts:
                raise TraceCorruptionError(k, f"token {i} has tag {tok.tag!r}, place {p!r} accepts {places[p].accepts!r}")
            if i in used:
                raise TraceCorruptionError(k, f"token id {i} reused")
        for a, i in zip(t.inputs, rec.consumed):
            del tokens[a.place][i]
            del where[i]
        for p, i, tok in rec.produced:
            tokens[p][i] = tok
            where[i] = p
            used.add(i)
            next_id = max(next_id, i + 1)
    return Marking(tokens, next_id)
