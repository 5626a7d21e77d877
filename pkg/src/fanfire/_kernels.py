"""Numeric inner loops with a numba path and a pure-numpy fallback.

``FANFIRE_DISABLE_JIT=1`` (or a missing numba) selects the numpy path.
Both paths are always importable as ``*_jit`` / ``*_numpy`` so they can be
compared directly; the unprefixed names dispatch to the active one.
"""

from __future__ import annotations

import os
import threading
import time

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_JIT = numba is not None and os.environ.get("FANFIRE_DISABLE_JIT", "") not in ("1", "true", "yes")

# base-3 row codes overflow int64 beyond this width
_MAX_CODE_WIDTH = 39

_LCG_A = 6364136223846793005
_LCG_C = 1442695040888963407


def _njit(**kw):
    if numba is None:
        return lambda fn: fn
    return numba.njit(cache=True, **kw)


# ---------------------------------------------------------------- orbits

def images_numpy(sigma: np.ndarray, eps: np.ndarray, s: np.ndarray) -> np.ndarray:
    """All images of ``s`` under the group; row ``g`` has ``out[sigma[g, i]] = eps[g, i] * s[i]``."""
    out = np.empty(sigma.shape, dtype=np.int8)
    np.put_along_axis(out, sigma, (eps * s[None, :]).astype(np.int8), axis=1)
    return out


def lexmin_numpy(sigma, eps, s):
    imgs = images_numpy(sigma, eps, s)
    order = np.lexsort(imgs.T[::-1])
    return imgs[order[0]].copy()


def orbit_count_numpy(sigma, eps, s) -> int:
    return int(np.unique(images_numpy(sigma, eps, s), axis=0).shape[0])


@_njit()
def lexmin_jit(sigma, eps, s):
    G, m = sigma.shape
    best = np.empty(m, dtype=np.int8)
    img = np.empty(m, dtype=np.int8)
    for i in range(m):
        best[sigma[0, i]] = eps[0, i] * s[i]
    for g in range(1, G):
        for i in range(m):
            img[sigma[g, i]] = eps[g, i] * s[i]
        for i in range(m):
            if img[i] < best[i]:
                for k in range(m):
                    best[k] = img[k]
                break
            if img[i] > best[i]:
                break
    return best


@_njit()
def _orbit_codes_jit(sigma, eps, s):
    G, m = sigma.shape
    codes = np.empty(G, dtype=np.int64)
    img = np.empty(m, dtype=np.int64)
    for g in range(G):
        for i in range(m):
            img[sigma[g, i]] = eps[g, i] * s[i] + 1
        c = 0
        for i in range(m):
            c = c * 3 + img[i]
        codes[g] = c
    return codes


@_njit()
def _count_unique_jit(codes):
    codes = np.sort(codes)
    n = 1
    for k in range(1, codes.shape[0]):
        if codes[k] != codes[k - 1]:
            n += 1
    return n


def orbit_count_jit(sigma, eps, s) -> int:
    if sigma.shape[1] > _MAX_CODE_WIDTH:
        return orbit_count_numpy(sigma, eps, s)
    return int(_count_unique_jit(_orbit_codes_jit(sigma, eps, s)))


# ---------------------------------------------------------------- busy work

@_njit(nogil=True)
def spin_jit(iters, state):
    x = state
    for _ in range(iters):
        x = x * 6364136223846793005 + 1442695040888963407
    return x


_SPIN_LANES = 1024


def spin_numpy(iters, state):
    lanes = np.full(_SPIN_LANES, state, dtype=np.uint64)
    a = np.uint64(_LCG_A)
    c = np.uint64(_LCG_C)
    with np.errstate(over="ignore"):
        for _ in range(max(1, iters // _SPIN_LANES)):
            lanes *= a
            lanes += c
    return int(lanes[0]) & 0x7FFFFFFFFFFFFFFF


if USE_JIT:
    lexmin = lexmin_jit
    orbit_count = orbit_count_jit
    spin_kernel = spin_jit
else:
    lexmin = lexmin_numpy
    orbit_count = orbit_count_numpy
    spin_kernel = spin_numpy


_rate_lock = threading.Lock()
_rates: dict = {}


def iterations_per_ms(kernel=None) -> float:
    """Calibrated busy-work rate of ``kernel`` on one otherwise idle thread."""
    kernel = kernel or spin_kernel
    with _rate_lock:
        rate = _rates.get(kernel)
        if rate is None:
            kernel(1000, 1)  # compile / warm up
            n = 1 << 16
            while True:
                t0 = time.perf_counter()
                kernel(n, 1)
                dt = time.perf_counter() - t0
                if dt > 0.02:
                    break
                n *= 4
            best = dt
            for _ in range(2):
                t0 = time.perf_counter()
                kernel(n, 1)
                best = min(best, time.perf_counter() - t0)
            rate = n / (best * 1000.0)
            _rates[kernel] = rate
    return rate


def busy_wait(ms: float, cancel: threading.Event | None = None, kernel=None) -> int:
    """Burn ``ms`` milliseconds of single-core compute (not wall time).

    Work is issued in ~1 ms chunks; a set ``cancel`` event stops early.
    Returns the number of chunks executed.
    """
    if ms <= 0:
        return 0
    kernel = kernel or spin_kernel
    rate = iterations_per_ms(kernel)
    chunks = max(1, int(round(ms)))
    per_chunk = max(1, int(rate * ms / chunks))
    done = 0
    for k in range(chunks):
        if cancel is not None and cancel.is_set():
            break
        kernel(per_chunk, k + 1)
        done += 1
    return done
