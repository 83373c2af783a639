"""Counter-based normal and uniform variates (Philox4x32-10).

Every variate is a pure function of ``(seed, stream, path, index)``, so a
path's noise never depends on how paths are split across workers or blocks.
Counter layout: ``(index // 2, stream, path_lo, path_hi)`` and key
``(seed_lo, seed_hi)``.  One Philox block yields two 53-bit uniforms and,
through Box-Muller, the normals for indices ``2j`` and ``2j + 1``.
"""

from __future__ import annotations

import math

import numba as nb
import numpy as np

__all__ = [
    "STREAM_DIFFUSION",
    "STREAM_SIGN",
    "STREAM_EXACT",
    "philox4x32",
    "fill_normals",
    "path_normals",
    "path_uniforms",
]

STREAM_DIFFUSION = 0
STREAM_SIGN = 1
STREAM_EXACT = 2

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S5 = np.uint64(5)
_S6 = np.uint64(6)
_TWO_PI = 2.0 * math.pi
_INV53 = 2.0 ** -53


@nb.njit(cache=True, nogil=True)
def _philox(c0, c1, c2, c3, k0, k1):
    for _ in range(10):
        p0 = _M0 * c0
        p1 = _M1 * c2
        c0, c1, c2, c3 = (p1 >> _S32) ^ c1 ^ k0, p1 & _MASK, (p0 >> _S32) ^ c3 ^ k1, p0 & _MASK
        k0 = (k0 + _W0) & _MASK
        k1 = (k1 + _W1) & _MASK
    return c0, c1, c2, c3


@nb.njit(cache=True, nogil=True)
def _uniform(hi, lo):
    # 53 random bits, centred in their cell so the value is never 0 or 1
    return ((hi >> _S5) * 67108864.0 + (lo >> _S6) + 0.5) * _INV53


@nb.njit(cache=True, nogil=True)
def _normal_pair(j, stream, path, k0, k1):
    c0, c1, c2, c3 = _philox(
        np.uint64(j) & _MASK, np.uint64(stream), np.uint64(path) & _MASK, np.uint64(path) >> _S32, k0, k1
    )
    u1 = _uniform(c0, c1)
    u2 = _uniform(c2, c3)
    r = math.sqrt(-2.0 * math.log(u1))
    return r * math.cos(_TWO_PI * u2), r * math.sin(_TWO_PI * u2)


@nb.njit(cache=True, nogil=True)
def _fill_normals(seed, stream, path0, step0, out):
    k0 = np.uint64(seed) & _MASK
    k1 = np.uint64(seed) >> _S32
    n_steps, n_paths = out.shape
    stop = step0 + n_steps
    for j in range(step0 >> 1, (stop + 1) >> 1):
        s0 = 2 * j - step0
        for p in range(n_paths):
            z0, z1 = _normal_pair(j, stream, path0 + p, k0, k1)
            if s0 >= 0:
                out[s0, p] = z0
            if s0 + 1 < n_steps:
                out[s0 + 1, p] = z1


@nb.njit(cache=True, nogil=True)
def _fill_uniforms(seed, stream, path0, out):
    k0 = np.uint64(seed) & _MASK
    k1 = np.uint64(seed) >> _S32
    for p in range(out.shape[0]):
        path = np.uint64(path0 + p)
        c0, c1, _, _ = _philox(np.uint64(0), np.uint64(stream), path & _MASK, path >> _S32, k0, k1)
        out[p] = _uniform(c0, c1)


def philox4x32(counter, key) -> tuple[int, int, int, int]:
    """Raw Philox4x32-10 block for a 4-word counter and 2-word key."""
    c = [np.uint64(int(v) & 0xFFFFFFFF) for v in counter]
    k = [np.uint64(int(v) & 0xFFFFFFFF) for v in key]
    return tuple(int(v) for v in _philox(c[0], c[1], c[2], c[3], k[0], k[1]))


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < 2 ** 64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def fill_normals(seed: int, stream: int, path0: int, step0: int, out: np.ndarray) -> np.ndarray:
    """Fill ``out[s, p]`` with the normal for path ``path0 + p`` at index ``step0 + s``."""
    _fill_normals(np.uint64(_check_seed(seed)), stream, path0, step0, out)
    return out


def path_normals(seed: int, stream: int, path0: int, n: int) -> np.ndarray:
    """Index-0 normal for each of ``n`` consecutive paths."""
    out = np.empty((1, n))
    return fill_normals(seed, stream, path0, 0, out)[0]


def path_uniforms(seed: int, stream: int, path0: int, n: int) -> np.ndarray:
    """One uniform on (0, 1) for each of ``n`` consecutive paths."""
    out = np.empty(n)
    _fill_uniforms(np.uint64(_check_seed(seed)), stream, path0, out)
    return out
