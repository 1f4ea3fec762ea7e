"""Compiled Monte-Carlo kernel; bit-compatible with the numpy sampling path.

Falls back to ``None`` when numba is unavailable, in which case callers use
the vectorised numpy implementation.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    njit = None

mc_kernel = None

if njit is not None:
    _GOLDEN = np.uint64(0x9E3779B97F4A7C15)
    _M1 = np.uint64(0xBF58476D1CE4E5B9)
    _M2 = np.uint64(0x94D049BB133111EB)
    _SPLIT = np.uint64(0xD1B54A32D192ED03)
    _ONE = np.uint64(1)
    _S11 = np.uint64(11)
    _S27 = np.uint64(27)
    _S30 = np.uint64(30)
    _S31 = np.uint64(31)
    _S63 = np.uint64(63)

    @njit(cache=True)
    def _mix(z):
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
        return z ^ (z >> _S31)

    @njit(cache=True)
    def _draw(key, counter):
        return _mix(key + (np.uint64(counter) + _ONE) * _GOLDEN)

    @njit(cache=True)
    def _below(key, counter, bound):
        u = np.float64(_draw(key, counter) >> _S11) * (2.0**-53)
        r = np.int64(np.floor(u * bound))
        return min(r, bound - 1)

    @njit(cache=True, nogil=True)
    def mc_kernel(roots, cols, xv, m, s, replace, norm_sq, out):
        y = np.zeros(m)
        rows = np.empty(s, np.int64)
        for t in range(roots.shape[0]):
            y[:] = 0.0
            base = _mix(roots[t] ^ _SPLIT)
            for c in range(cols.shape[0]):
                key = _mix(base + (np.uint64(cols[c]) + _ONE) * _GOLDEN)
                for idx in range(s):
                    if replace:
                        rows[idx] = _below(key, idx, m)
                    else:
                        j = m - s + idx
                        r = _below(key, idx, j + 1)
                        for k in range(idx):
                            if rows[k] == r:
                                r = j
                                break
                        rows[idx] = r
                for idx in range(s):
                    top = _draw(key, s + idx) >> _S63
                    if top:
                        y[rows[idx]] -= xv[c]
                    else:
                        y[rows[idx]] += xv[c]
            acc = 0.0
            for r in range(m):
                acc += y[r] * y[r]
            out[t] = (acc - s * norm_sq) / (s * norm_sq)
