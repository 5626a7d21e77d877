"""Random acyclic colored nets for property tests.

``gen_case(pick)`` takes ``pick(lo, hi) -> int`` so the same generator
serves both ``random.Random.randint`` and a hypothesis ``draw``.
"""

from __future__ import annotations

import itertools
import random

from hypothesis import strategies as st

from fanfire.petri import (
    BUILTINS,
    Arc,
    Binding,
    Marking,
    PetriNet,
    Place,
    StaleBindingError,
    TokenValue,
    Transition,
    action_outputs,
    bind,
    enabled,
    fire,
)

TAG = "n"
GUARDS = ("true", "even", "small")


def make_registry():
    reg = BUILTINS.extend()
    reg.guards["even"] = lambda b: sum(t.payload for t in b.values()) % 2 == 0
    reg.guards["small"] = lambda b: all(t.payload < 50 for t in b.values())

    @reg.action("mix")
    def _mix(b):
        return TokenValue(TAG, (sum(t.payload for t in b.values()) * 7 + 3) % 97)

    return reg


REGISTRY = make_registry()


def gen_case(pick):
    """Return ``(net, marking)`` with at most 8 places and 8 transitions.

    Places are ordered and every arc goes from a lower to a higher place, so
    every run terminates.
    """
    n_places = pick(2, 8)
    places = tuple(Place(f"p{i}", TAG) for i in range(n_places))
    transitions = []
    for k in range(pick(1, 8)):
        cut = pick(1, n_places - 1)
        n_in = pick(1, min(3, cut))
        ins = sorted({pick(0, cut - 1) for _ in range(n_in)})
        n_out = pick(0, 3)
        outs = [pick(cut, n_places - 1) for _ in range(n_out)]
        transitions.append(
            Transition(
                f"t{k}",
                tuple(Arc(f"p{i}", f"x{j}") for j, i in enumerate(ins)),
                tuple(Arc(f"p{i}", f"y{j}") for j, i in enumerate(outs)),
                guard=GUARDS[pick(0, len(GUARDS) - 1)],
                action="mix",
            )
        )
    contents = {}
    for p in places:
        contents[p.id] = [TokenValue(TAG, pick(0, 99)) for _ in range(pick(0, 3))]
    return PetriNet(places, tuple(transitions)), Marking.of(contents)


def random_case(seed: int):
    rng = random.Random(seed)
    return gen_case(rng.randint)


@st.composite
def cases(draw):
    return gen_case(lambda lo, hi: draw(st.integers(lo, hi)))


def outputs_for(net, marking, b: Binding):
    t = net.transition(b.transition)
    result = REGISTRY.resolve_action(t.action)(bind(t, marking, b.tokens))
    return action_outputs(t, result)


def all_combinations(net, marking):
    for t in net.transitions:
        pools = [list(marking.tokens(a.place)) for a in t.inputs]
        for combo in itertools.product(*pools):
            if len(set(combo)) == len(combo):
                yield t, Binding(t.id, combo)


def semantics_violations(net, marking) -> list[str]:
    """Check conservation, guard soundness, disjoint commutativity and stale rejection on one case."""
    bad = []
    en = enabled(net, marking, REGISTRY)
    if en.faulted:
        bad.append(f"faulted guards {en.faulted}")
    for t, b in all_combinations(net, marking):
        ok = REGISTRY.resolve_guard(t.guard)(bind(t, marking, b.tokens))
        if ok != (b in en):
            bad.append(f"enabled() disagrees with guard for {b}")
        if not ok:
            try:
                fire(net, marking, b, outputs_for(net, marking, b), REGISTRY)
                bad.append(f"fired {b} with a false guard")
            except StaleBindingError:
                pass
    for b in en:
        t = net.transition(b.transition)
        after = fire(net, marking, b, outputs_for(net, marking, b), REGISTRY)
        if after.count() != marking.count() - len(t.inputs) + len(t.outputs):
            bad.append(f"token count not conserved by {b}")
        try:
            fire(net, after, b, outputs_for(net, marking, b), REGISTRY)
            bad.append(f"stale binding {b} fired twice")
        except StaleBindingError:
            pass
    ens = sorted(en, key=lambda b: (b.transition, b.tokens))
    for b1, b2 in itertools.combinations(ens, 2):
        if set(b1.tokens) & set(b2.tokens):
            continue
        o1, o2 = outputs_for(net, marking, b1), outputs_for(net, marking, b2)
        m12 = fire(net, fire(net, marking, b1, o1, REGISTRY), b2, o2, REGISTRY)
        m21 = fire(net, fire(net, marking, b2, o2, REGISTRY), b1, o1, REGISTRY)
        if not m12.equal_modulo_ids(m21):
            bad.append(f"{b1} and {b2} do not commute")
    return bad
