"""Linear (in)equality systems with integer rows.

A row ``(a_1, ..., a_n)`` with right-hand side ``b`` means ``a.x >= b``
(inequalities) or ``a.x = b`` (equalities).  Homogeneous systems, the usual
case for entropy cones, have ``b = 0`` throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Iterable, Sequence


def as_fraction(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


def normalize(coeffs: Sequence, rhs=0) -> tuple[tuple[int, ...], int]:
    """Scale a rational row to coprime integers (sign preserved)."""
    if type(rhs) is int and all(type(c) is int for c in coeffs):
        g = reduce(gcd, coeffs, abs(rhs))
        if g > 1:
            return tuple(c // g for c in coeffs), rhs // g
        return tuple(coeffs), rhs
    vals = [as_fraction(c) for c in coeffs] + [as_fraction(rhs)]
    den = reduce(lambda a, b: a * b // gcd(a, b), (v.denominator for v in vals), 1)
    ints = [int(v * den) for v in vals]
    g = reduce(gcd, (abs(v) for v in ints), 0)
    if g > 1:
        ints = [v // g for v in ints]
    return tuple(ints[:-1]), ints[-1]


def _flip_if_needed(coeffs, rhs):
    for c in coeffs:
        if c:
            if c < 0:
                return tuple(-v for v in coeffs), -rhs
            break
    return coeffs, rhs


@dataclass(frozen=True)
class InequalitySystem:
    """Rows over named columns.  ``ineqs``/``eqs`` hold ``(coeffs, rhs)`` pairs."""

    columns: tuple
    ineqs: tuple = ()
    eqs: tuple = ()
    ineq_labels: tuple = field(default=(), compare=False)
    eq_labels: tuple = field(default=(), compare=False)

    def __post_init__(self):
        n = len(self.columns)
        if len(set(self.columns)) != n:
            raise ValueError("duplicate column names")
        fixed = []
        for rows in (self.ineqs, self.eqs):
            out = []
            for r in rows:
                if len(r) == 2 and isinstance(r[0], (tuple, list)):
                    coeffs, rhs = r
                else:
                    coeffs, rhs = r, 0
                if len(coeffs) != n:
                    raise ValueError(f"row width {len(coeffs)} != {n} columns")
                out.append(normalize(coeffs, rhs))
            fixed.append(tuple(out))
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "ineqs", fixed[0])
        object.__setattr__(self, "eqs", fixed[1])
        if len(self.ineq_labels) != len(self.ineqs):
            object.__setattr__(self, "ineq_labels", tuple("" for _ in self.ineqs))
        if len(self.eq_labels) != len(self.eqs):
            object.__setattr__(self, "eq_labels", tuple("" for _ in self.eqs))

    # -- construction ------------------------------------------------------
    @classmethod
    def from_constraints(cls, constraints, columns=None) -> "InequalitySystem":
        """Build from :class:`LinearConstraint` objects (``>=`` or ``=``)."""
        constraints = list(constraints)
        if columns is None:
            cols = set()
            for c in constraints:
                cols.update(v for v, _ in c.coefficients)
            columns = sorted(cols)
        idx = {v: i for i, v in enumerate(columns)}
        ineqs, eqs, il, el = [], [], [], []
        for c in constraints:
            row = [0] * len(columns)
            for v, k in c.coefficients:
                row[idx[v]] = k
            label = f"{c.family}: {c.detail}" if c.detail else c.family
            if c.relation == "=":
                eqs.append((tuple(row), 0))
                el.append(label)
            else:
                ineqs.append((tuple(row), 0))
                il.append(label)
        return cls(tuple(columns), tuple(ineqs), tuple(eqs), tuple(il), tuple(el))

    @property
    def width(self) -> int:
        return len(self.columns)

    @property
    def homogeneous(self) -> bool:
        return all(b == 0 for _, b in self.ineqs) and all(b == 0 for _, b in self.eqs)

    def __len__(self):
        return len(self.ineqs) + len(self.eqs)

    def with_rows(self, ineqs=(), eqs=(), ineq_labels=None, eq_labels=None):
        ineqs, eqs = tuple(ineqs), tuple(eqs)
        il = tuple(ineq_labels) if ineq_labels is not None else tuple("" for _ in ineqs)
        el = tuple(eq_labels) if eq_labels is not None else tuple("" for _ in eqs)
        return InequalitySystem(self.columns, self.ineqs + ineqs, self.eqs + eqs,
                                self.ineq_labels + il, self.eq_labels + el)

    def reorder(self, columns: Sequence) -> "InequalitySystem":
        """Same rows over a permuted (or padded) column list."""
        pos = {c: i for i, c in enumerate(columns)}
        missing = set(self.columns) - set(pos)
        if missing:
            raise ValueError(f"columns missing from target order: {sorted(map(str, missing))}")
        perm = [pos[c] for c in self.columns]

        def move(r):
            out = [0] * len(columns)
            for i, v in zip(perm, r[0]):
                out[i] = v
            return tuple(out), r[1]

        return InequalitySystem(tuple(columns), tuple(map(move, self.ineqs)),
                                tuple(map(move, self.eqs)), self.ineq_labels, self.eq_labels)

    def rows_as_dicts(self):
        """``[(dict col->coeff, rhs, relation)]`` for display and export."""
        out = []
        for rel, rows in ((">=", self.ineqs), ("=", self.eqs)):
            for coeffs, rhs in rows:
                out.append(({c: k for c, k in zip(self.columns, coeffs) if k}, rhs, rel))
        return out

    def evaluate(self, point) -> tuple[list[Fraction], list[Fraction]]:
        """Slacks ``a.x - b`` of every row at ``point`` (mapping or sequence)."""
        if isinstance(point, dict):
            x = [as_fraction(point[c]) for c in self.columns]
        else:
            x = [as_fraction(v) for v in point]
        dot = lambda r: sum((k * xi for k, xi in zip(r[0], x) if k), Fraction(0)) - r[1]
        return [dot(r) for r in self.ineqs], [dot(r) for r in self.eqs]

    def contains(self, point) -> bool:
        si, se = self.evaluate(point)
        return all(s >= 0 for s in si) and all(s == 0 for s in se)

    def __str__(self):
        lines = []
        for d, rhs, rel in self.rows_as_dicts():
            terms = " ".join(f"{k:+d}*{c}" for c, k in d.items()) or "0"
            lines.append(f"{terms} {rel} {rhs}")
        return "\n".join(lines)


def _rref(rows: list[tuple[tuple[int, ...], int]], n: int):
    """Integer-normalized reduced row echelon form of equality rows.

    Returns (rows, pivots, inconsistent) where each row has a positive pivot.
    """
    mat = [[Fraction(v) for v in r[0]] + [Fraction(r[1])] for r in rows]
    pivots = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, len(mat)) if mat[i][col] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        p = mat[r][col]
        mat[r] = [v / p for v in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][col] != 0:
                f = mat[i][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(col)
        r += 1
    inconsistent = any(all(v == 0 for v in row[:-1]) and row[-1] != 0 for row in mat[r:])
    out = [normalize(row[:-1], row[-1]) for row in mat[:r]]
    return out, pivots, inconsistent


def reduce_by_equalities(row, eq_rows, pivots):
    """Eliminate equality pivot columns from ``row`` (exact)."""
    coeffs = [Fraction(v) for v in row[0]]
    rhs = Fraction(row[1])
    for (ec, eb), p in zip(eq_rows, pivots):
        if coeffs[p]:
            f = coeffs[p] / ec[p]
            coeffs = [a - f * b for a, b in zip(coeffs, ec)]
            rhs -= f * eb
    return normalize(coeffs, rhs)


def canonicalize(system: InequalitySystem) -> InequalitySystem:
    """Unique-up-to-basis representative: rows gcd-normalized, deduplicated and
    sorted; opposite inequality pairs become equalities; equalities that are
    linear combinations of earlier ones are dropped."""
    n = system.width
    ineq_set = set(system.ineqs)
    implicit = [r for r in system.ineqs
                if (tuple(-c for c in r[0]), -r[1]) in ineq_set and _flip_if_needed(*r) == r]
    eq_rows = sorted({_flip_if_needed(*r) for r in list(system.eqs) + implicit
                      if any(r[0]) or r[1]}, key=_row_key)
    from .exact import SparseSolver
    solver = SparseSolver()
    kept_eqs = []
    for r in eq_rows:
        before = len(solver.pivots)
        if not solver.add({j: v for j, v in enumerate(r[0]) if v}, r[1]):
            return InequalitySystem(system.columns, (((0,) * n, 1),))
        if len(solver.pivots) > before:
            kept_eqs.append(r)
    implicit_set = set(implicit) | {(tuple(-c for c in r[0]), -r[1]) for r in implicit}
    seen = {}
    for row, label in zip(system.ineqs, system.ineq_labels):
        if row in implicit_set:
            continue
        if not any(row[0]):
            if row[1] <= 0:
                continue  # trivially true
            return InequalitySystem(system.columns, (((0,) * n, 1),))
        seen.setdefault(row, label)
    ineqs = sorted(seen, key=_row_key)
    return InequalitySystem(system.columns, tuple(ineqs), tuple(kept_eqs),
                            tuple(seen[r] for r in ineqs), tuple("" for _ in kept_eqs))


def _row_key(row):
    coeffs, rhs = row
    return (tuple(-abs(c) if c else 0 for c in coeffs), coeffs, rhs)


def is_trivially_infeasible(system: InequalitySystem) -> bool:
    return any(not any(c) and b > 0 for c, b in system.ineqs) or any(
        not any(c) and b != 0 for c, b in system.eqs)


def stack(systems: Iterable[InequalitySystem]) -> InequalitySystem:
    systems = list(systems)
    cols = systems[0].columns
    out = systems[0]
    for s in systems[1:]:
        if s.columns != cols:
            s = s.reorder(cols)
        out = out.with_rows(s.ineqs, s.eqs, s.ineq_labels, s.eq_labels)
    return out
