"""Selects the compiled kernel when available."""

import warnings

try:
    from ._kernels import combine  # noqa: F401
    BACKEND = "cython"
except ImportError:  # pragma: no cover - depends on build
    from ._kernels_py import combine  # noqa: F401
    BACKEND = "python"
    warnings.warn("compiled kernels unavailable; using the NumPy fallback",
                  RuntimeWarning, stacklevel=2)

INT_LIMIT = 2 ** 62


def combine_pyint(pos, neg, col):
    """Arbitrary-precision combination for rows too large for int64."""
    from math import gcd
    from functools import reduce
    out = []
    for p in pos:
        a = p[col]
        for n in neg:
            b = -n[col]
            row = [b * x + a * y for x, y in zip(p, n)]
            g = reduce(gcd, row, 0) or 1
            out.append(tuple(v // g for v in row))
    return out
