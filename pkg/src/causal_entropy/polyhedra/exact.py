"""Exact rational linear algebra and a Bland-rule simplex.

These routines decide everything; floating-point solvers elsewhere only
propose candidates that are then re-derived here.
"""

from __future__ import annotations

from fractions import Fraction

try:  # gmpy2 rationals are an order of magnitude faster in the dense tableau
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(int(v.numerator), int(v.denominator))


class SparseSolver:
    """Incremental sparse Gaussian elimination over the rationals.

    Rows are dicts ``col -> Fraction``.  ``add`` returns False when the new
    equation contradicts the ones already absorbed.
    """

    def __init__(self):
        self.pivots: list[tuple[int, dict, Fraction]] = []
        self.pivot_of: dict[int, int] = {}

    def _reduce(self, row: dict, rhs: Fraction):
        row = dict(row)
        changed = True
        while changed:
            changed = False
            for col in list(row):
                k = self.pivot_of.get(col)
                if k is None or col not in row:
                    continue
                _, prow, prhs = self.pivots[k]
                f = row[col]
                for c, v in prow.items():
                    nv = row.get(c, 0) - f * v
                    if nv:
                        row[c] = nv
                    else:
                        row.pop(c, None)
                rhs -= f * prhs
                changed = True
        return row, rhs

    def add(self, row: dict, rhs) -> bool:
        row = {c: Fraction(v) for c, v in row.items() if v}
        row, rhs = self._reduce(row, Fraction(rhs))
        if not row:
            return rhs == 0
        col = min(row, key=lambda c: (len(str(row[c])), c))
        p = row[col]
        row = {c: v / p for c, v in row.items()}
        rhs = rhs / p
        # keep earlier pivot rows free of the new pivot column
        for i, (pc, prow, prhs) in enumerate(self.pivots):
            f = prow.get(col)
            if f:
                for c, v in row.items():
                    nv = prow.get(c, 0) - f * v
                    if nv:
                        prow[c] = nv
                    else:
                        prow.pop(c, None)
                self.pivots[i] = (pc, prow, prhs - f * rhs)
        self.pivot_of[col] = len(self.pivots)
        self.pivots.append((col, row, rhs))
        return True

    def solution(self, free_values=None) -> dict:
        """A solution with every non-pivot column set from ``free_values`` (default 0)."""
        free_values = free_values or {}
        x = {}
        for col, row, rhs in self.pivots:
            val = rhs
            for c, v in row.items():
                if c != col:
                    val -= v * Fraction(free_values.get(c, 0))
            x[col] = val
        for c, v in free_values.items():
            if c not in self.pivot_of:
                x[c] = Fraction(v)
        return x


def solve_sparse(rows, rhs, free_values=None):
    """Solve ``rows . x = rhs`` exactly; None if inconsistent."""
    s = SparseSolver()
    for r, b in zip(rows, rhs):
        if not s.add(r, b):
            return None
    return s.solution(free_values)


def simplex_phase1(M: list[list[Fraction]], q: list[Fraction]):
    """Decide ``{u >= 0 : M u = q}`` with a dense exact tableau (Bland's rule).

    Returns ``("feasible", u)`` or ``("infeasible", w)`` with ``w^T M <= 0`` and
    ``w^T q > 0``.
    """
    m = len(M)
    n = len(M[0]) if m else 0
    sign = [(-1 if q[i] < 0 else 1) for i in range(m)]
    zero = _Q(0)
    # tableau rows: [M_i * sign | e_i | q_i * sign]
    T = []
    for i in range(m):
        row = [_Q(v) * sign[i] if v else zero for v in M[i]]
        row += [_Q(1) if j == i else zero for j in range(m)]
        row.append(_Q(q[i]) * sign[i])
        T.append(row)
    basis = [n + i for i in range(m)]
    width = n + m
    # reduced costs of phase-1 objective sum(artificials)
    cost = [zero] * (width + 1)
    for j in range(width + 1):
        if n <= j < width:
            continue
        cost[j] = -sum((T[i][j] for i in range(m)), zero)
    while True:
        enter = next((j for j in range(width) if cost[j] < 0), None)
        if enter is None:
            break
        best, leave = None, None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:  # cannot happen in phase 1 (bounded below by 0)
            raise ArithmeticError("unbounded phase-1 problem")
        piv = T[leave][enter]
        prow = [v / piv if v else zero for v in T[leave]]
        T[leave] = prow
        nz = [j for j, v in enumerate(prow) if v]
        for i in range(m):
            f = T[i][enter]
            if i != leave and f:
                row = T[i]
                for j in nz:
                    row[j] = row[j] - f * prow[j]
        f = cost[enter]
        for j in nz:
            cost[j] = cost[j] - f * prow[j]
        basis[leave] = enter
    objective = -cost[-1]
    if objective == 0:
        u = [Fraction(0)] * n
        for i, b in enumerate(basis):
            if b < n:
                u[b] = _frac(T[i][-1])
        return "feasible", u
    # duals of the signed rows: artificial i has cost 1 and reduced cost 1 - pi_i
    w = [_frac((1 - cost[n + i]) * sign[i]) for i in range(m)]
    return "infeasible", w
