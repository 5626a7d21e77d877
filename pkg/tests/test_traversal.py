import json
from collections import Counter

import pytest

from fanfire.arrangement import Arrangement, braid_arrangement, chambers_bruteforce, coordinate_arrangement
from fanfire.petri import validate
from fanfire.runtime import RunConfig, replay
from fanfire.symmetry import SignedPermutation, canonical, close, format_signs, orbit_size
from fanfire.traversal import (
    ChamberOracle,
    GraphOracle,
    bfs_closure,
    build_traversal_net,
    result_json,
    run_traversal,
    traverse,
)


def s3_coordinate():
    return close([SignedPermutation.from_cycles(3, [(0, 1, 2)]), SignedPermutation.from_cycles(3, [(0, 1)])], 3)


def braid3_s3():
    # x1 <-> x2 and x2 <-> x3 acting on the normals x1-x2, x1-x3, x2-x3
    return close([SignedPermutation((0, 2, 1), (-1, 1, 1)), SignedPermutation((1, 0, 2), (1, 1, -1))], 3)


def brute_states(arr):
    return {format_signs(c.signs) for c in chambers_bruteforce(arr)}


def test_net_is_valid():
    assert validate(build_traversal_net()) == []


def test_isolated_state():
    out = traverse(GraphOracle({}, "a"), config=RunConfig(workers=2))
    assert out.as_set() == {("a", 1)}
    per = out.run.stats.per_transition
    assert per["expand"] == 1 and per["dedup"] == 1


def test_coordinate_quadrants():
    assert run_traversal(ChamberOracle(coordinate_arrangement(2))) == {(s, 1) for s in ("++", "+-", "-+", "--")}


@pytest.mark.parametrize("workers", [1, 2, 8])
def test_braid_chambers_any_workers(workers):
    arr = braid_arrangement(3)
    got = run_traversal(ChamberOracle(arr), config=RunConfig(workers=workers, seed=workers))
    assert {s for s, _ in got} == brute_states(arr)


def test_braid_with_symmetry():
    arr = braid_arrangement(3)
    G = braid3_s3()
    reps = run_traversal(ChamberOracle(arr, G), G, RunConfig(workers=2))
    brute = brute_states(arr)
    # oracle: orbit-decompose the brute-force chambers directly
    orbits = {}
    for s in brute:
        c = format_signs(canonical(G, tuple(1 if ch == "+" else -1 for ch in s)))
        orbits.setdefault(c, set()).add(s)
    assert reps == {(c, len(members)) for c, members in orbits.items()}
    assert sum(k for _, k in reps) == 6


def test_coordinate_orbits():
    G = s3_coordinate()
    reps = run_traversal(ChamberOracle(coordinate_arrangement(3), G), G)
    assert sorted(k for _, k in reps) == [1, 1, 3, 3]
    assert sum(k for _, k in reps) == 8


def test_path_graph():
    adj = {k: [k - 1, k + 1] for k in range(1, 4)}
    adj[0], adj[4] = [1], [3]
    for workers in (1, 3):
        assert run_traversal(GraphOracle(adj, 2), config=RunConfig(workers=workers)) == {(k, 1) for k in range(5)}


def test_multi_neighbor_expansion():
    adj = {0: [1], 1: [2, 3, 4], 2: [5], 3: [5, 6], 4: [], 5: [1], 6: [7, 8, 9], 7: [], 8: [0], 9: []}
    o = GraphOracle(adj, 0)
    assert {s for s, _ in run_traversal(o, config=RunConfig(workers=4))} == bfs_closure(o)


def test_no_duplicate_expansion():
    arr = braid_arrangement(4)
    out = traverse(ChamberOracle(arr), config=RunConfig(workers=4, failure_injection=0.2, max_retries=30))
    expanded = Counter()
    tokens = {i: t for _, i, t in out.run.initial.items()}
    for rec in out.run.trace:
        if rec.transition == "expand":
            expanded[tokens[rec.consumed[0]].payload] += 1
        for _, i, t in rec.produced:
            tokens[i] = t
    assert set(expanded.values()) == {1}
    assert set(expanded) == brute_states(arr)
    assert replay(out.net, out.run.initial, out.run.trace) == out.run.final


def test_result_json_is_sorted_and_stable():
    G = s3_coordinate()
    a = result_json(traverse(ChamberOracle(coordinate_arrangement(3), G), G, RunConfig(workers=3, seed=1)))
    b = result_json(traverse(ChamberOracle(coordinate_arrangement(3), G), G, RunConfig(workers=1, seed=9)))
    assert json.dumps(a) == json.dumps(b)
    assert [r["state"] for r in a] == sorted(r["state"] for r in a)


def test_orbit_sizes_match_symmetry_module():
    G = braid3_s3()
    for s, k in run_traversal(ChamberOracle(braid_arrangement(3), G), G):
        assert k == orbit_size(G, tuple(1 if ch == "+" else -1 for ch in s))


def test_start_point_on_hyperplane_rejected():
    with pytest.raises(ValueError):
        ChamberOracle(coordinate_arrangement(2), start_point=(0, 1)).start()


def test_group_size_mismatch():
    with pytest.raises(ValueError):
        ChamberOracle(Arrangement(2, ((1, 0),)), s3_coordinate())
