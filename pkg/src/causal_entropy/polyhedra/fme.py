"""Fourier-Motzkin projection with exact redundancy removal."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._backend import INT_LIMIT, combine, combine_pyint
from .lp import ConeOracle
from .system import InequalitySystem, canonicalize, normalize

ONE = "__one__"


class BudgetExceeded(RuntimeError):
    """Raised when a row or time limit is hit.

    ``partial`` holds every derived row that no longer involves an eliminated
    column: a sound outer description that may be missing facets.
    """

    def __init__(self, message, partial: InequalitySystem):
        super().__init__(message)
        self.partial = partial
        self.sound_only = True


@dataclass(frozen=True)
class Budget:
    max_rows: int = 2_000_000
    seconds: float | None = None


@dataclass
class Stats:
    rounds: int = 0
    generated: int = 0
    lp_checks: int = 0
    max_rows: int = 0


def _norm(row):
    from math import gcd
    from functools import reduce
    g = reduce(gcd, row, 0)
    return tuple(v // g for v in row) if g > 1 else tuple(row)


def _substitute(row, eq, col):
    """Remove ``col`` from ``row`` using equality ``eq`` (positive factor on ``row``)."""
    a, e = row[col], eq[col]
    if not a:
        return row
    s = 1 if e > 0 else -1
    return _norm(tuple(abs(e) * r - s * a * q for r, q in zip(row, eq)))


def eliminate(system: InequalitySystem, keep, budget: Budget | None = None,
              redundancy: str = "lp", row_subset=None, threads: int = 1,
              stats: Stats | None = None, log=None) -> InequalitySystem:
    """Project ``system`` onto the columns in ``keep``.

    ``redundancy`` is ``"lp"`` (syntactic filters plus exact LP checks) or
    ``"syntactic"`` (duplicates and the Chernikov ancestry bound only; output
    may contain redundant rows).  ``row_subset`` restricts the input rows,
    which keeps the result sound but possibly loose.
    """
    budget = budget or Budget()
    stats = stats if stats is not None else Stats()
    keep = set(keep)
    unknown = keep - set(system.columns)
    if unknown:
        raise KeyError(f"keep columns not in system: {sorted(map(str, unknown))}")
    start = time.monotonic()
    sound_only = row_subset is not None
    ineqs = list(system.ineqs)
    if row_subset is not None:
        ineqs = [ineqs[i] for i in row_subset]

    affine = not system.homogeneous
    cols = list(system.columns) + ([ONE] if affine else [])
    n = len(cols)
    kept_idx = [i for i, c in enumerate(cols) if c in keep or c == ONE]
    elim = [i for i, c in enumerate(cols) if c not in keep and c != ONE]

    def lift(r):
        coeffs, rhs = r
        return tuple(coeffs) + ((-rhs,) if affine else ())

    rows = [lift(r) for r in ineqs]
    if affine:
        rows.append(tuple(0 for _ in range(n - 1)) + (1,))
    eqs = [lift(r) for r in system.eqs]

    # equalities first: exact substitution of eliminated columns
    kept_eqs = []
    elim_set = set(elim)
    while eqs:
        eq = eqs.pop()
        cand = [j for j in elim if eq[j]]
        if not cand:
            if any(eq):
                kept_eqs.append(eq)
            elif affine and eq[-1]:
                kept_eqs.append(eq)
            continue
        j = min(cand, key=lambda c: (sum(1 for r in rows if r[c]), c))
        rows = [_substitute(r, eq, j) for r in rows]
        eqs = [_substitute(r, eq, j) for r in eqs]
        kept_eqs = [_substitute(r, eq, j) for r in kept_eqs]
    rows = _dedupe(r for r in rows if any(r))
    eq_dicts = [{j: v for j, v in enumerate(e) if v} for e in kept_eqs]

    def check_budget(count):
        stats.max_rows = max(stats.max_rows, count)
        over_rows = count > budget.max_rows
        over_time = budget.seconds is not None and time.monotonic() - start > budget.seconds
        if over_rows or over_time:
            done = [r for r in rows if not any(r[j] for j in elim)]
            partial = _finish(system.columns, cols, kept_idx, done, kept_eqs, affine, keep)
            what = "row limit" if over_rows else "time limit"
            raise BudgetExceeded(f"{what} exceeded after {stats.rounds} eliminations", partial)

    use_lp = redundancy == "lp"
    if use_lp:
        rows = _lp_filter(rows, list(range(len(rows))), eq_dicts, n, threads, stats)
    # ancestry bitsets for the Chernikov bound (syntactic mode only)
    anc = [1 << i for i in range(len(rows))]
    eliminated = 0

    remaining = [j for j in elim if any(r[j] for r in rows)]
    while remaining:
        counts = []
        for j in remaining:
            p = sum(1 for r in rows if r[j] > 0)
            m = sum(1 for r in rows if r[j] < 0)
            counts.append((p * m - p - m, j))
        _, j = min(counts)
        pos = [i for i, r in enumerate(rows) if r[j] > 0]
        neg = [i for i, r in enumerate(rows) if r[j] < 0]
        zero = [i for i, r in enumerate(rows) if r[j] == 0]
        check_budget(len(zero) + len(pos) * len(neg))
        eliminated += 1
        new_rows, new_anc = _combine_rows(rows, anc, pos, neg, j, n)
        stats.generated += len(new_rows)
        stats.rounds += 1
        seen = set(rows[i] for i in zero)
        base = [rows[i] for i in zero]
        base_anc = [anc[i] for i in zero]
        fresh, fresh_anc = [], []
        for r, a in zip(new_rows, new_anc):
            if not any(r) or r in seen:
                continue
            if not use_lp and bin(a).count("1") > eliminated + 1:
                continue
            seen.add(r)
            fresh.append(r)
            fresh_anc.append(a)
        rows = base + fresh
        anc = base_anc + fresh_anc
        check_budget(len(rows))
        if use_lp and fresh:
            idx = list(range(len(base), len(rows)))
            keep_rows = _lp_filter(rows, idx, eq_dicts, n, threads, stats)
            kept = set(keep_rows)
            anc = [a for r, a in zip(rows, anc) if r in kept]
            rows = [r for r in rows if r in kept]
        if log:
            log(f"eliminated {cols[j]}: {len(pos)}x{len(neg)} -> {len(rows)} rows")
        remaining = [c for c in elim if any(r[c] for r in rows)]
    out = _finish(system.columns, cols, kept_idx, rows, kept_eqs, affine, keep)
    if sound_only:
        object.__setattr__(out, "ineq_labels", tuple("sound-only" for _ in out.ineqs))
    return out


def _dedupe(rows):
    seen, out = set(), []
    for r in rows:
        if r not in seen:
            seen.add(r)
            out.append(r)
    return out


def _combine_rows(rows, anc, pos, neg, j, n):
    if not pos or not neg:
        return [], []
    P = np.array([rows[i] for i in pos], dtype=object)
    N = np.array([rows[i] for i in neg], dtype=object)
    try:
        res, ok = combine(np.ascontiguousarray(P.astype(np.int64)),
                          np.ascontiguousarray(N.astype(np.int64)), j, INT_LIMIT)
    except OverflowError:
        ok = False
    if ok:
        out = [tuple(int(v) for v in r) for r in res.tolist()]
    else:
        out = combine_pyint([rows[i] for i in pos], [rows[i] for i in neg], j)
    out_anc = [anc[p] | anc[m] for p in pos for m in neg]
    return out, out_anc


def _lp_filter(rows, candidates, eq_dicts, n, threads, stats):
    """Drop candidate rows implied by the others; returns surviving rows."""
    dict_rows = [{j: v for j, v in enumerate(r) if v} for r in rows]
    oracle = ConeOracle(dict_rows, eq_dicts, n)
    active = set(range(len(rows)))
    order = sorted(candidates, key=lambda i: (-sum(1 for v in rows[i] if v),
                                              -sum(abs(v) for v in rows[i]), rows[i]))

    def probe(i):
        return oracle.redundant(i, sorted(active))

    if threads > 1 and len(order) > 1:
        with ThreadPoolExecutor(threads) as ex:
            guesses = dict(zip(order, ex.map(probe, order)))
    else:
        guesses = {}
    for i in order:
        stats.lp_checks += 1
        verdict = guesses.get(i)
        if verdict is not None and verdict[0] and set(verdict[1]) <= active - {i}:
            active.discard(i)
            continue
        if verdict is not None and not verdict[0]:
            # irredundant among a superset of rows stays irredundant
            continue
        red, _ = oracle.redundant(i, sorted(active))
        if red:
            active.discard(i)
    return [rows[i] for i in sorted(active)]


def _finish(orig_cols, cols, kept_idx, rows, eqs, affine, keep):
    out_cols = tuple(c for c in orig_cols if c in keep)
    pos = {c: i for i, c in enumerate(cols)}
    sel = [pos[c] for c in out_cols]

    def drop(r):
        rhs = -r[-1] if affine else 0
        return tuple(r[i] for i in sel), rhs

    ineqs = [drop(r) for r in rows if not any(r[i] for i in range(len(cols))
                                             if i not in kept_idx)]
    eq_rows = [drop(r) for r in eqs]
    return canonicalize(InequalitySystem(out_cols, tuple(ineqs), tuple(eq_rows)))


def remove_redundant(system: InequalitySystem, threads: int = 1) -> InequalitySystem:
    """Exact LP redundancy removal on a homogeneous system."""
    if not system.homogeneous:
        raise ValueError("redundancy removal implemented for cones only")
    rows = [c for c, _ in system.ineqs]
    eq_dicts = [{j: v for j, v in enumerate(c) if v} for c, _ in system.eqs]
    kept = _lp_filter(rows, list(range(len(rows))), eq_dicts, system.width, threads, Stats())
    return canonicalize(InequalitySystem(system.columns, tuple((r, 0) for r in kept),
                                         system.eqs))
