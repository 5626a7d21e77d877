import itertools
import json

import pytest
from hypothesis import given, strategies as st

from fanfire.symmetry import (
    GroupOverflowError,
    SignedPermutation,
    act,
    canonical,
    close,
    format_signs,
    group_from_json,
    orbit,
    orbit_size,
    parse_signs,
)

P, M, Z = 1, -1, 0


def s3():
    return close([SignedPermutation.from_cycles(3, [(0, 1, 2)]), SignedPermutation.from_cycles(3, [(0, 1)])], 3)


def test_trivial_group():
    assert close([], 3).order == 1


def test_s3_order():
    G = s3()
    # oracle: the distinct permutations reached are exactly all of S3
    assert {g.sigma for g in G.elements} == set(itertools.permutations(range(3)))
    assert G.order == 6


def test_sign_involution():
    g = SignedPermutation((0, 1), (-1, 1))
    assert close([g], 2).order == 2


def test_overflow_is_explicit():
    with pytest.raises(GroupOverflowError):
        close([SignedPermutation.from_cycles(5, [(0, 1, 2, 3, 4)]), SignedPermutation.from_cycles(5, [(0, 1)])], 5, cap=50)


def test_act_examples():
    assert act(SignedPermutation.identity(3), (P, M, Z)) == (P, M, Z)
    assert act(SignedPermutation.from_cycles(3, [(0, 1)]), (P, M, P)) == (M, P, P)
    assert act(SignedPermutation((0, 1, 2), (-1, -1, 1)), (P, M, Z)) == (M, P, Z)


def test_act_length_mismatch():
    with pytest.raises(ValueError):
        act(SignedPermutation.identity(3), (P, M))


def test_canonical_examples():
    G = s3()
    assert canonical(close([], 3), (P, M, P)) == (P, M, P)
    images = orbit(G, (P, P, M))
    assert images == {(P, P, M), (P, M, P), (M, P, P)}
    assert canonical(G, (P, P, M)) == min(images) == (M, P, P)
    assert orbit_size(G, (P, P, P)) == 1
    assert orbit_size(G, (P, P, M)) == 3
    assert orbit_size(close([], 3), (P, Z, M)) == 1


def test_sign_string_roundtrip():
    assert parse_signs("+-0") == (P, M, Z)
    assert format_signs((P, M, Z)) == "+-0"


def test_group_json_roundtrip():
    G = s3()
    H = group_from_json(json.loads(json.dumps(G.to_json())))
    assert set(H.elements) == set(G.elements)


def signed_perm(m):
    return st.tuples(st.permutations(range(m)), st.lists(st.sampled_from([1, -1]), min_size=m, max_size=m)).map(
        lambda t: SignedPermutation(tuple(t[0]), tuple(t[1]))
    )


def sign_vec(m):
    return st.lists(st.sampled_from([M, Z, P]), min_size=m, max_size=m).map(tuple)


@given(st.data())
def test_act_is_a_group_action(data):
    m = data.draw(st.integers(1, 6))
    g, h, s = data.draw(signed_perm(m)), data.draw(signed_perm(m)), data.draw(sign_vec(m))
    assert act(g @ h, s) == act(g, act(h, s))
    assert act(g.inverse(), act(g, s)) == s


@given(st.data())
def test_group_axioms_and_orbit_stabilizer(data):
    m = data.draw(st.integers(1, 5))
    gens = data.draw(st.lists(signed_perm(m), max_size=2))
    G = close(gens, m)
    elems = set(G.elements)
    assert SignedPermutation.identity(m) in elems
    for _ in range(5):
        g = data.draw(st.sampled_from(G.elements))
        h = data.draw(st.sampled_from(G.elements))
        assert g @ h in elems and g.inverse() in elems
    s = data.draw(sign_vec(m))
    stab = sum(1 for g in G.elements if act(g, s) == s)
    k = orbit_size(G, s)
    assert k == len(orbit(G, s))
    assert k * stab == G.order
    c = canonical(G, s)
    assert c == min(orbit(G, s))
    assert canonical(G, c) == c
    for g in G.elements:
        assert canonical(G, act(g, s)) == c
