# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Fourier-Motzkin combination kernel."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t i64

cdef inline i64 _gcd(i64 a, i64 b) nogil:
    if a < 0:
        a = -a
    if b < 0:
        b = -b
    while b:
        a, b = b, a % b
    return a


def combine(const i64[:, ::1] pos, const i64[:, ::1] neg, Py_ssize_t col, i64 limit):
    """All pairwise combinations eliminating ``col``, gcd-normalized.

    Returns ``(rows, ok)``; ``ok`` is False if an intermediate value would
    exceed ``limit`` in magnitude (caller then retries with Python ints).
    """
    cdef Py_ssize_t np_ = pos.shape[0], nn = neg.shape[0], w = pos.shape[1]
    cdef Py_ssize_t i, k, t, r = 0
    cdef i64 a, b, g, v, bound
    out = np.empty((np_ * nn, w), dtype=np.int64)
    cdef i64[:, ::1] o = out
    cdef i64 maxp = 0, maxn = 0
    for i in range(np_):
        for t in range(w):
            v = pos[i, t] if pos[i, t] >= 0 else -pos[i, t]
            if v > maxp:
                maxp = v
    for i in range(nn):
        for t in range(w):
            v = neg[i, t] if neg[i, t] >= 0 else -neg[i, t]
            if v > maxn:
                maxn = v
    if maxp and maxn and (maxp > limit // maxn // 2):
        return out[:0], False
    with nogil:
        for i in range(np_):
            a = pos[i, col]
            for k in range(nn):
                b = -neg[k, col]
                g = 0
                for t in range(w):
                    v = b * pos[i, t] + a * neg[k, t]
                    o[r, t] = v
                    g = _gcd(g, v)
                if g > 1:
                    for t in range(w):
                        o[r, t] = o[r, t] // g
                r += 1
    return out, True
