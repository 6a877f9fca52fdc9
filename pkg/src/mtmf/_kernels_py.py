"""Pure-Python (numpy) reference kernels.

The compiled core in ``_ckernels.pyx`` implements the same two routines with
the same floating-point operation order, so both backends return identical
bits.  Keep the two files in lockstep.
"""
from __future__ import annotations

import numpy as np

BACKEND = "python"


def _factorials(n: int) -> np.ndarray:
    out = np.ones(n + 1)
    for i in range(1, n + 1):
        out[i] = out[i - 1] * i
    return out


def count_compositions(l: int, n: int) -> int:
    """Number of ways to write ``l`` as an ordered sum of ``n`` naturals."""
    if n == 0:
        return 1 if l == 0 else 0
    from math import comb

    return comb(l + n - 1, n - 1)


def power_derivative(D: np.ndarray, n: int, l: int) -> np.ndarray:
    """``d^l (g^n)`` at each point from ``D[j] = d^j g`` (shape ``(>l, npts)``).

    Sums ``l!/(l_1!...l_n!) * prod_d D[l_d]`` over every ordered tuple
    ``l_1 + ... + l_n = l``, enumerated lexicographically.
    """
    D = np.ascontiguousarray(D, dtype=np.float64)
    npts = D.shape[1]
    if n == 0:
        return np.ones(npts) if l == 0 else np.zeros(npts)
    fact = _factorials(l)
    acc = np.zeros(npts)
    parts = [0] * n
    parts[n - 1] = l
    while True:
        w = fact[l]
        for d in range(n):
            w = w / fact[parts[d]]
        prod = np.ones(npts)
        for d in range(n):
            prod = prod * D[parts[d]]
        acc = acc + w * prod
        # next composition: bump the slot left of the last non-zero slot
        j = n - 1
        while j > 0 and parts[j] == 0:
            j -= 1
        if j == 0:
            break
        rest = -1
        for d in range(j, n):
            rest += parts[d]
            parts[d] = 0
        parts[j - 1] += 1
        parts[n - 1] = rest
    return acc


def series_sum(avals: np.ndarray, g: np.ndarray, ns: np.ndarray, abs_tol: float,
               consecutive_small: int):
    """Partial sums of ``sum_k avals[k] * g**ns[k] / ns[k]!`` per point.

    ``consecutive_small = 0`` sums every term; otherwise a point stops after
    that many consecutive terms below ``abs_tol`` in magnitude.  Returns
    ``(sums, used, converged, bad_k)`` where ``bad_k`` is the first term index
    that went non-finite at an active point, or -1.
    """
    avals = np.ascontiguousarray(avals, dtype=np.float64)
    g = np.ascontiguousarray(g, dtype=np.float64)
    K, N = avals.shape
    sums = np.zeros(N)
    used = np.zeros(N, dtype=np.int64)
    small = np.zeros(N, dtype=np.int64)
    done = np.zeros(N, dtype=bool)
    w = np.ones(N)
    m = 0
    with np.errstate(all="ignore"):
        for k in range(K):
            n = int(ns[k])
            while m < n:
                w = w * (g / (m + 1.0))
                m += 1
            t = avals[k] * w
            active = ~done
            if not np.isfinite(t[active]).all():
                return sums, used, done, k
            np.add(sums, t, out=sums, where=active)
            used[active] += 1
            if consecutive_small > 0:
                tiny = np.abs(t) < abs_tol
                small = np.where(active, np.where(tiny, small + 1, 0), small)
                done = done | (active & (small >= consecutive_small))
    return sums, used, done, -1
