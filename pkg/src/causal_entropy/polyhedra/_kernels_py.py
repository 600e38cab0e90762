"""NumPy fallback for the Fourier-Motzkin combination kernel."""

import numpy as np


def combine(pos, neg, col, limit):
    pos = np.asarray(pos, dtype=np.int64)
    neg = np.asarray(neg, dtype=np.int64)
    w = pos.shape[1] if pos.ndim == 2 else 0
    if len(pos) == 0 or len(neg) == 0:
        return np.empty((0, w), dtype=np.int64), True
    maxp = int(np.abs(pos).max())
    maxn = int(np.abs(neg).max())
    if maxp and maxn and maxp > limit // maxn // 2:
        return np.empty((0, w), dtype=np.int64), False
    a = pos[:, col][:, None, None]
    b = -neg[:, col][None, :, None]
    rows = (b * pos[:, None, :] + a * neg[None, :, :]).reshape(-1, w)
    g = np.gcd.reduce(rows, axis=1)
    g[g == 0] = 1
    return rows // g[:, None], True
