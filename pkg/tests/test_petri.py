import itertools
import json

import pytest
from hypothesis import given, settings

from fanfire.petri import (
    BUILTINS,
    Arc,
    Binding,
    Marking,
    NetStructureError,
    PetriNet,
    Place,
    StaleBindingError,
    TokenTypeError,
    TokenValue,
    Transition,
    check,
    enabled,
    fig1_net,
    fire,
    is_quiescent,
    validate,
)

from _netgen import cases, semantics_violations

ITEM = "item"


def tok(x=0):
    return TokenValue(ITEM, x)


def test_fig1_validates():
    assert validate(fig1_net()) == []


def test_dangling_place_is_named():
    net = PetriNet((Place("a", ITEM),), (Transition("t", (Arc("a", "v"),), (Arc("x", "w"),)),))
    errs = validate(net)
    assert errs
    assert any(e.ref == "x" for e in errs)
    with pytest.raises(NetStructureError):
        check(net)


def test_empty_net_is_valid():
    assert validate(PetriNet()) == []


def test_every_violation_is_reported():
    net = PetriNet(
        (Place("a", ITEM), Place("a", ITEM), Place("z", ITEM, terminal=True)),
        (
            Transition("t", (), (Arc("a", "v"),)),
            Transition("u", (Arc("z", "v"),), (Arc("q", "w"),)),
        ),
    )
    refs = {v.ref for v in validate(net)}
    # duplicate place, sourceless transition, dangling arc, consumed terminal
    assert {"a", "t", "q", "z"} <= refs


def test_enabled_fig1_single_token():
    net = fig1_net()
    en = enabled(net, Marking.of({"i": [tok()]}))
    assert en == {Binding("s", (0,))}


def test_enabled_empty_marking():
    assert enabled(fig1_net(), Marking()) == set()


def test_enabled_join_counts_all_pairs():
    m = Marking.of({"l": [tok(1), tok(2)], "r": [tok(3), tok(4), tok(5)]})
    en = enabled(fig1_net(), m)
    # oracle: enumerate the pairs directly
    pairs = set(itertools.product(m.tokens("l"), m.tokens("r")))
    assert {b.tokens for b in en if b.transition == "j"} == pairs
    assert len(pairs) == 6


def test_guard_exception_is_reported_as_faulted():
    reg = BUILTINS.extend()

    def boom(bound):
        raise RuntimeError("guard broke")

    reg.guards["boom"] = boom
    net = PetriNet((Place("a", ITEM), Place("b", ITEM)), (Transition("t", (Arc("a", "x"),), (Arc("b", "x"),), guard="boom"),))
    en = enabled(net, Marking.of({"a": [tok()]}), reg)
    assert not en
    assert Binding("t", (0,)) in en.faulted
    assert not is_quiescent(net, Marking.of({"a": [tok()]}), reg)


def test_fire_fork():
    net = fig1_net()
    m0 = Marking.of({"i": [tok(7)]})
    m1 = fire(net, m0, Binding("s", (0,)), [tok(7), tok(7)])
    assert not m1.tokens("i")
    assert len(m1.tokens("a")) == 1 and len(m1.tokens("b")) == 1
    # value semantics
    assert m0.tokens("i") == {0: tok(7)}
    assert m0.count() == 1


def test_fire_join():
    net = fig1_net()
    m = Marking.of({"l": [tok(1)], "r": [tok(2)]})
    after = fire(net, m, Binding("j", (0, 1)), [tok(3)])
    assert after.count() == 1
    assert list(after.tokens("sink").values()) == [tok(3)]
    assert not after.tokens("l") and not after.tokens("r")


def test_double_spend_is_stale():
    net = fig1_net()
    m0 = Marking.of({"i": [tok()]})
    m1 = fire(net, m0, Binding("s", (0,)), [tok(), tok()])
    with pytest.raises(StaleBindingError):
        fire(net, m1, Binding("s", (0,)), [tok(), tok()])


def test_output_type_mismatch():
    net = fig1_net()
    with pytest.raises(TokenTypeError):
        fire(net, Marking.of({"i": [tok()]}), Binding("s", (0,)), [tok(), TokenValue("other", 1)])
    with pytest.raises(TokenTypeError):
        fire(net, Marking.of({"i": [tok()]}), Binding("s", (0,)), [tok()])


def test_fresh_ids_are_new():
    net = fig1_net()
    m = Marking.of({"i": [tok(), tok()]})
    after = fire(net, m, Binding("s", (1,)), [tok(), tok()])
    ids = [i for _, i, _ in after.items()]
    assert len(set(ids)) == len(ids)
    assert min(set(ids) - {0}) >= m.next_id


def test_quiescence_examples():
    net = fig1_net()
    assert is_quiescent(net, Marking())
    assert not is_quiescent(net, Marking.of({"i": [tok()]}))
    # oracle: no transition has the sink among its inputs
    assert all(a.place != "sink" for t in net.transitions for a in t.inputs)
    assert is_quiescent(net, Marking.of({"sink": [tok()]}))


def test_fire_is_deterministic():
    net = fig1_net()
    m = Marking.of({"l": [tok(1)], "r": [tok(2)]})
    a = fire(net, m, Binding("j", (0, 1)), [tok(5)])
    b = fire(net, m, Binding("j", (0, 1)), [tok(5)])
    assert a == b and a.next_id == b.next_id


def test_token_json_roundtrip_bit_exact():
    from fractions import Fraction

    t = TokenValue("x", (1, "a", Fraction(-3, 7), frozenset({2, 3}), (True, None, 2.5)))
    text = json.dumps(t.to_json(), sort_keys=True)
    back = TokenValue.from_json(json.loads(text))
    assert back == t
    assert json.dumps(back.to_json(), sort_keys=True) == text


def test_token_equality_is_structural():
    assert TokenValue("a", [1, [2]]) == TokenValue("a", (1, (2,)))
    assert TokenValue("a", 1) != TokenValue("b", 1)


def test_net_and_marking_json_roundtrip():
    net = fig1_net()
    assert PetriNet.from_json(json.loads(json.dumps(net.to_json()))) == net
    m = Marking.of({"l": [tok(1), tok(2)], "r": [tok(3)]})
    back = Marking.from_json(json.loads(json.dumps(m.to_json())))
    assert back == m and back.next_id == m.next_id


@settings(max_examples=200, deadline=None)
@given(cases())
def test_engine_semantics_properties(case):
    net, marking = case
    assert validate(net) == []
    assert semantics_violations(net, marking) == []
