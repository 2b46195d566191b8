"""Subset-enumeration kernels: numba-compiled with a numpy fallback.

Set ``DESIGN_GRADCODE_DISABLE_NUMBA=1`` (or run without numba installed)
to use the numpy implementations. Both paths return identical results,
including the tie-break on the lexicographically first witness.
"""
from __future__ import annotations

import math
import os
from itertools import combinations, islice

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get("DESIGN_GRADCODE_DISABLE_NUMBA", "").lower() not in (
    "1",
    "true",
    "yes",
)

_CHUNK = 1 << 16


def pack_rows(B: np.ndarray) -> np.ndarray:
    """Pack each row of a 0/1 matrix into little-endian uint64 words."""
    B = np.asarray(B, dtype=bool)
    n_rows, n_cols = B.shape
    words = max(1, math.ceil(n_cols / 64))
    out = np.zeros((n_rows, words), dtype=np.uint64)
    for c in np.flatnonzero(B.any(axis=0)):
        out[B[:, c], c // 64] |= np.uint64(1) << np.uint64(c % 64)
    return out


# numpy fallback ----------------------------------------------------------


def min_neighborhood_numpy(masks: np.ndarray, eta: int) -> tuple[int, tuple[int, ...]]:
    K = masks.shape[0]
    best, best_combo = None, None
    it = combinations(range(K), eta)
    while True:
        block = list(islice(it, _CHUNK))
        if not block:
            break
        idx = np.array(block, dtype=np.int64)
        ors = np.bitwise_or.reduce(masks[idx], axis=1)
        counts = np.bitwise_count(ors).sum(axis=1, dtype=np.int64)
        pos = int(np.argmin(counts))
        if best is None or counts[pos] < best:
            best, best_combo = int(counts[pos]), tuple(block[pos])
    return best, best_combo


def min_expansion_numpy(eu: np.ndarray, ev: np.ndarray, n: int) -> tuple[int, int, int]:
    """Return ``(boundary, size, mask)`` minimizing boundary/size.

    Only subsets excluding vertex n-1 are scanned; every complementary pair
    contains exactly one of them and both give the same ratio.
    """
    shifts = np.arange(n, dtype=np.int64)
    best = None
    total = 1 << (n - 1)
    for start in range(1, total, _CHUNK):
        masks = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        bits = (masks[:, None] >> shifts) & 1
        boundary = (bits[:, eu] ^ bits[:, ev]).sum(axis=1)
        size = bits.sum(axis=1)
        den = np.minimum(size, n - size)
        ratio = boundary / den
        pos = int(np.argmin(ratio))
        num0, den0 = int(boundary[pos]), int(den[pos])
        # first exact tie of the float minimum
        pos = int(np.flatnonzero(boundary * den0 == num0 * den)[0])
        cand = (int(boundary[pos]), int(den[pos]), int(masks[pos]))
        if best is None or cand[0] * best[1] < best[0] * cand[1]:
            best = cand
    return best


# numba -------------------------------------------------------------------

if HAVE_NUMBA:

    @numba.njit(cache=True)
    def _popcount(x):
        x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
        x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
        x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
        return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)

    @numba.njit(cache=True)
    def _min_neighborhood_nb(masks, eta):
        K, W = masks.shape
        idx = np.arange(eta)
        best = np.int64(1) << np.int64(62)
        best_idx = idx.copy()
        while True:
            cnt = np.int64(0)
            for w in range(W):
                acc = np.uint64(0)
                for t in range(eta):
                    acc |= masks[idx[t], w]
                cnt += np.int64(_popcount(acc))
            if cnt < best:
                best = cnt
                best_idx[:] = idx
            i = eta - 1
            while i >= 0 and idx[i] == K - eta + i:
                i -= 1
            if i < 0:
                break
            idx[i] += 1
            for j in range(i + 1, eta):
                idx[j] = idx[j - 1] + 1
        return best, best_idx

    @numba.njit(cache=True)
    def _min_expansion_nb(eu, ev, n):
        best_num = np.int64(-1)
        best_den = np.int64(1)
        best_mask = np.int64(0)
        total = np.int64(1) << np.int64(n - 1)
        for mask in range(1, total):
            size = np.int64(0)
            for v in range(n):
                size += (mask >> v) & 1
            boundary = np.int64(0)
            for e in range(eu.shape[0]):
                boundary += ((mask >> eu[e]) ^ (mask >> ev[e])) & 1
            den = min(size, n - size)
            if best_num < 0 or boundary * best_den < best_num * den:
                best_num = boundary
                best_den = den
                best_mask = mask
        return best_num, best_den, best_mask


def min_neighborhood_numba(masks: np.ndarray, eta: int) -> tuple[int, tuple[int, ...]]:
    best, idx = _min_neighborhood_nb(np.ascontiguousarray(masks, dtype=np.uint64), eta)
    return int(best), tuple(int(i) for i in idx)


def min_expansion_numba(eu: np.ndarray, ev: np.ndarray, n: int) -> tuple[int, int, int]:
    num, den, mask = _min_expansion_nb(
        np.ascontiguousarray(eu, dtype=np.int64), np.ascontiguousarray(ev, dtype=np.int64), n
    )
    return int(num), int(den), int(mask)


def min_neighborhood(masks: np.ndarray, eta: int) -> tuple[int, tuple[int, ...]]:
    """Smallest popcount of the OR of ``eta`` rows of ``masks``, with the
    lexicographically first row combination attaining it."""
    if USE_NUMBA:
        return min_neighborhood_numba(masks, eta)
    return min_neighborhood_numpy(masks, eta)


def min_expansion(eu: np.ndarray, ev: np.ndarray, n: int) -> tuple[int, int, int]:
    if USE_NUMBA:
        return min_expansion_numba(eu, ev, n)
    return min_expansion_numpy(np.asarray(eu), np.asarray(ev), n)
