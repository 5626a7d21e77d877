import threading
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fanfire import _kernels
from fanfire.symmetry import SignedPermutation, act, close


def group_arrays(m, seed):
    rng = np.random.default_rng(seed)
    gens = [SignedPermutation(tuple(rng.permutation(m)), tuple(rng.choice([-1, 1], m))) for _ in range(2)]
    G = close(gens, m, cap=5000)
    return G


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(0, 10**6), st.lists(st.sampled_from([-1, 0, 1]), min_size=5, max_size=5))
def test_jit_and_numpy_agree(m, seed, signs):
    G = group_arrays(m, seed)
    sigma, eps = G.arrays()
    s = np.asarray(signs[:m], dtype=np.int8)
    images = {act(g, tuple(signs[:m])) for g in G.elements}
    assert tuple(_kernels.lexmin_jit(sigma, eps, s)) == min(images)
    assert tuple(_kernels.lexmin_numpy(sigma, eps, s)) == min(images)
    assert _kernels.orbit_count_jit(sigma, eps, s) == len(images)
    assert _kernels.orbit_count_numpy(sigma, eps, s) == len(images)


def test_wide_vectors_fall_back():
    m = 45
    G = close([SignedPermutation.from_cycles(m, [tuple(range(m))])], m)
    sigma, eps = G.arrays()
    s = np.zeros(m, dtype=np.int8)
    s[0] = 1
    assert _kernels.orbit_count_jit(sigma, eps, s) == m


@pytest.mark.parametrize("kernel", [_kernels.spin_jit, _kernels.spin_numpy])
def test_busy_wait_duration(kernel):
    _kernels.busy_wait(1, kernel=kernel)
    t0 = time.thread_time()
    _kernels.busy_wait(20, kernel=kernel)
    used = (time.thread_time() - t0) * 1000
    assert 10 <= used <= 60


def test_busy_wait_stops_on_cancel():
    ev = threading.Event()
    ev.set()
    assert _kernels.busy_wait(50, ev) == 0
