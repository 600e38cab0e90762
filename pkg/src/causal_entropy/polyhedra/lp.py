"""Exact feasibility, implication and redundancy decisions.

A floating-point HiGHS solve proposes a point or a multiplier vector; the
proposal is rebuilt exactly on its support and checked with rational
arithmetic.  If that fails the dense exact simplex decides.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix

from .exact import SparseSolver, simplex_phase1
from .system import InequalitySystem, as_fraction

_TOL = 1e-7


@dataclass(frozen=True)
class Feasible:
    point: tuple  # Fractions, one per column

    def as_dict(self, columns) -> dict:
        return dict(zip(columns, self.point))


@dataclass(frozen=True)
class Infeasible:
    """Farkas multipliers: ``y >= 0`` on inequality rows, ``z`` on equality rows,
    with ``y^T A + z^T E = 0`` and ``y.b + z.d > 0``."""

    ineq_multipliers: tuple
    eq_multipliers: tuple
    labels: tuple = field(default=(), compare=False)


@dataclass
class Problem:
    """``A x >= b, E x = d`` over ``n`` free rational variables."""

    n: int
    A: list = field(default_factory=list)  # list of dict col->coeff
    b: list = field(default_factory=list)
    E: list = field(default_factory=list)
    d: list = field(default_factory=list)
    a_labels: list = field(default_factory=list)
    e_labels: list = field(default_factory=list)

    @classmethod
    def from_system(cls, system: InequalitySystem) -> "Problem":
        p = cls(system.width)
        for (coeffs, rhs), lab in zip(system.ineqs, system.ineq_labels):
            p.add_ineq({i: c for i, c in enumerate(coeffs) if c}, rhs, lab)
        for (coeffs, rhs), lab in zip(system.eqs, system.eq_labels):
            p.add_eq({i: c for i, c in enumerate(coeffs) if c}, rhs, lab)
        return p

    def add_ineq(self, row: dict, rhs, label=""):
        self.A.append(row)
        self.b.append(as_fraction(rhs))
        self.a_labels.append(label)

    def add_eq(self, row: dict, rhs, label=""):
        self.E.append(row)
        self.d.append(as_fraction(rhs))
        self.e_labels.append(label)


def _sparse(rows, ncols):
    data, ri, ci = [], [], []
    for i, r in enumerate(rows):
        for j, v in r.items():
            data.append(float(v))
            ri.append(i)
            ci.append(j)
    return csr_matrix((data, (ri, ci)), shape=(len(rows), ncols))


def _dot(row: dict, x) -> Fraction:
    return sum((as_fraction(v) * x[j] for j, v in row.items()), Fraction(0))


# -- verification ------------------------------------------------------------

def check_point(p: Problem, x) -> bool:
    return (all(_dot(r, x) >= b for r, b in zip(p.A, p.b))
            and all(_dot(r, x) == d for r, d in zip(p.E, p.d)))


def check_farkas(p: Problem, y, z) -> bool:
    if len(y) != len(p.A) or len(z) != len(p.E):
        return False
    if any(v < 0 for v in y):
        return False
    acc: dict[int, Fraction] = {}
    for mult, rows in ((y, p.A), (z, p.E)):
        for m, r in zip(mult, rows):
            if m:
                for j, v in r.items():
                    acc[j] = acc.get(j, 0) + m * v
    if any(v != 0 for v in acc.values()):
        return False
    val = sum((m * b for m, b in zip(y, p.b)), Fraction(0)) + sum(
        (m * d for m, d in zip(z, p.d)), Fraction(0))
    return val > 0


# -- exact reconstruction ----------------------------------------------------

def _rationalize(v: float, limit=10**6) -> Fraction:
    return Fraction(v).limit_denominator(limit) if abs(v) > 1e-12 else Fraction(0)


def _exact_point(p: Problem, xf: np.ndarray):
    for limit in (1, 12, 720, 10**6):
        x = [_rationalize(v, limit) for v in xf]
        if check_point(p, x):
            return x
    # active-set reconstruction: tight rows become equations; rows still
    # violated after a pass are added and the solve repeated
    tight = set()
    for i, (r, b) in enumerate(zip(p.A, p.b)):
        slack = sum(float(v) * xf[j] for j, v in r.items()) - float(b)
        if abs(slack) < _TOL * (1 + abs(float(b))):
            tight.add(i)
    # tight sign rows x_j >= 0 fix a column at zero instead of adding an equation
    zeroed = {j for i in tight for j, v in p.A[i].items()
              if len(p.A[i]) == 1 and v > 0 and p.b[i] == 0}
    free = {j: (Fraction(0) if j in zeroed else _rationalize(xf[j])) for j in range(p.n)}

    def drop(r):
        return {j: v for j, v in r.items() if j not in zeroed}

    solver = SparseSolver()
    for r, b in zip(p.E, p.d):
        if not solver.add(drop(r), b):
            break
    else:
        skipped = [i for i in sorted(tight)
                   if not (len(p.A[i]) == 1 and next(iter(p.A[i])) in zeroed)
                   and not solver.add(drop(p.A[i]), p.b[i])]
        sol = solver.solution({j: v for j, v in free.items() if j not in zeroed})
        x = [Fraction(0) if j in zeroed else sol.get(j, free[j]) for j in range(p.n)]
        if check_point(p, x):
            return x
    solver = SparseSolver()
    for r, b in zip(p.E, p.d):
        if not solver.add(r, b):
            return None
    skipped = [i for i in sorted(tight) if not solver.add(p.A[i], p.b[i])]
    sol = solver.solution(free)
    x = [sol.get(j, free[j]) for j in range(p.n)]
    bad = [i for i, (r, b) in enumerate(zip(p.A, p.b)) if _dot(r, x) < b]
    if not bad:
        return x
    if not skipped:
        x = _local_repair(p, solver, free, set(bad))
        if x is not None:
            return x
    # equalities only: the inequalities enter the local problem lazily
    solver = SparseSolver()
    for r, b in zip(p.E, p.d):
        solver.add(r, b)
    sol = solver.solution(free)
    x = [sol.get(j, free[j]) for j in range(p.n)]
    bad = {i for i, (r, b) in enumerate(zip(p.A, p.b)) if _dot(r, x) < b}
    return _local_repair(p, solver, free, bad | set(skipped), rounds=40)


def _local_repair(p: Problem, solver: SparseSolver, free: dict, work: set,
                  radius=Fraction(1, 10**6), rounds=12):
    """Exact LP over the free columns of ``solver`` near ``free``.

    Pivot columns are affine in the free ones, so each row becomes a row in
    the few free columns.  Only the rows in ``work`` are imposed, plus a box of
    ``radius`` around the float guess; violated rows join ``work`` lazily.
    """
    fcols = [j for j in range(p.n) if j not in solver.pivot_of]
    base = {col: rhs for col, _, rhs in solver.pivots}
    dep = {col: {c: v for c, v in row.items() if c != col} for col, row, _ in solver.pivots}

    def reduced(row: dict, rhs):
        # row . x(u) >= rhs with x(u) = base - dep u on pivots, u on free columns
        coeffs: dict[int, Fraction] = {}
        rhs = as_fraction(rhs)
        for j, v in row.items():
            v = as_fraction(v)
            if j in base:
                rhs -= v * base[j]
                for c, w in dep[j].items():
                    coeffs[c] = coeffs.get(c, 0) - v * w
            else:
                coeffs[j] = coeffs.get(j, 0) + v
        return {fcols.index(c): w for c, w in coeffs.items() if w}, rhs

    if not fcols:
        return None
    for _ in range(rounds):
        q = Problem(len(fcols))
        for i in sorted(work):
            r, b = reduced(p.A[i], p.b[i])
            q.add_ineq(r, b)
        for k, c in enumerate(fcols):
            q.add_ineq({k: 1}, free.get(c, 0) - radius)
            q.add_ineq({k: -1}, -(free.get(c, 0) + radius))
        if len(q.A) * (3 * q.n + len(q.A)) > EXACT_SIMPLEX_LIMIT:
            return None
        res = _exact_simplex(q)
        if not isinstance(res, Feasible):
            return None
        u = {c: res.point[k] for k, c in enumerate(fcols)}
        sol = solver.solution(u)
        x = [sol.get(j, u.get(j, 0)) for j in range(p.n)]
        bad = {i for i, (r, b) in enumerate(zip(p.A, p.b)) if _dot(r, x) < b}
        if not bad:
            return x
        if bad <= work:
            return None
        work |= bad
    return None


def _exact_farkas(p: Problem, yf: np.ndarray, zf: np.ndarray):
    for limit in (1, 12, 720):
        y = [_rationalize(max(v, 0.0), limit) for v in yf]
        z = [_rationalize(v, limit) for v in zf]
        if check_farkas(p, y, z):
            return y, z
    # unknowns: y_i on the support (index i) and z_k (index m + k); negative
    # y entries are dropped from the support and the solve repeated
    m = len(p.A)
    support = {i for i, v in enumerate(yf) if v > _TOL}
    for _ in range(8):
        cols: dict[int, dict] = {}
        for i in support:
            for j, v in p.A[i].items():
                cols.setdefault(j, {})[i] = as_fraction(v)
        for k, r in enumerate(p.E):
            for j, v in r.items():
                cols.setdefault(j, {})[m + k] = as_fraction(v)
        solver = SparseSolver()
        for j in sorted(cols):
            if not solver.add(cols[j], 0):
                return None
        norm = {i: p.b[i] for i in support if p.b[i]}
        norm.update({m + k: p.d[k] for k in range(len(p.E)) if p.d[k]})
        if not norm or not solver.add(norm, 1):
            return None
        free = {i: _rationalize(yf[i]) for i in support}
        free.update({m + k: _rationalize(zf[k]) for k in range(len(p.E))})
        sol = solver.solution(free)
        y = [Fraction(0)] * m
        for i in support:
            y[i] = sol.get(i, free[i])
        z = [sol.get(m + k, free[m + k]) for k in range(len(p.E))]
        if check_farkas(p, y, z):
            return y, z
        neg = {i for i in support if y[i] < 0}
        if not neg:
            return None
        support -= neg
    return None


# -- solvers -----------------------------------------------------------------

def _exact_simplex(p: Problem):
    """Phase-1 simplex on ``A x+ - A x- - s = b, E x+ - E x- = d``."""
    n, ma, me = p.n, len(p.A), len(p.E)
    M, q = [], []
    for i, (r, b) in enumerate(zip(p.A, p.b)):
        row = [Fraction(0)] * (2 * n + ma)
        for j, v in r.items():
            row[j] = as_fraction(v)
            row[n + j] = -as_fraction(v)
        row[2 * n + i] = Fraction(-1)
        M.append(row)
        q.append(b)
    for r, d in zip(p.E, p.d):
        row = [Fraction(0)] * (2 * n + ma)
        for j, v in r.items():
            row[j] = as_fraction(v)
            row[n + j] = -as_fraction(v)
        M.append(row)
        q.append(d)
    if not M:
        return Feasible(tuple(Fraction(0) for _ in range(n)))
    status, vec = simplex_phase1(M, q)
    if status == "feasible":
        x = tuple(vec[j] - vec[n + j] for j in range(n))
        return Feasible(x)
    return Infeasible(tuple(vec[:ma]), tuple(vec[ma:]), tuple(p.a_labels) + tuple(p.e_labels))


class Undecided(RuntimeError):
    """Neither a point nor a certificate could be rebuilt exactly and the
    problem is too large for the dense exact simplex."""


EXACT_SIMPLEX_LIMIT = 250_000  # tableau entries
ZOOM_LEVELS = 3
ZOOM = Fraction(1, 2**24)


def _zoom_solve(p: Problem, xf: np.ndarray, depth: int):
    """Re-solve in ``x = c + ZOOM * w`` around the float point ``c``.

    Features below the float tolerance become visible after rescaling.
    Farkas multipliers are invariant under the substitution.
    """
    c = [Fraction(float(v)) for v in xf]
    q = Problem(p.n)
    for r, b, lab in zip(p.A, p.b, p.a_labels):
        q.add_ineq(r, (b - _dot(r, c)) / ZOOM, lab)
    for r, d, lab in zip(p.E, p.d, p.e_labels):
        q.add_eq(r, (d - _dot(r, c)) / ZOOM, lab)
    try:
        res = solve(q, _depth=depth + 1)
    except Undecided:
        return None
    if isinstance(res, Feasible):
        x = tuple(ci + ZOOM * wi for ci, wi in zip(c, res.point))
        return Feasible(x) if check_point(p, x) else None
    if check_farkas(p, list(res.ineq_multipliers), list(res.eq_multipliers)):
        return Infeasible(res.ineq_multipliers, res.eq_multipliers, res.labels)
    return None


def solve(p: Problem, exact_only: bool = False, _depth: int = 0):
    """Feasible(point) or Infeasible(Farkas), both verified exactly."""
    if not p.A and not p.E:
        return Feasible(tuple(Fraction(0) for _ in range(p.n)))
    if not exact_only:
        res = _float_solve(p)
        if isinstance(res, (Feasible, Infeasible)):
            return res
        if res is not None and _depth < ZOOM_LEVELS:
            zoomed = _zoom_solve(p, res, _depth)
            if zoomed is not None:
                return zoomed
    rows = len(p.A) + len(p.E)
    if not exact_only and rows * (2 * p.n + len(p.A) + rows) > EXACT_SIMPLEX_LIMIT:
        raise Undecided(f"exact reconstruction failed for a {rows}x{p.n} problem")
    return _exact_simplex(p)


def _float_solve(p: Problem):
    """Feasible/Infeasible when exactly confirmed, else the float point (or None)."""
    n = p.n
    kw = dict(method="highs", bounds=[(None, None)] * n)
    if p.A:
        kw["A_ub"] = -_sparse(p.A, n)
        kw["b_ub"] = -np.array([float(v) for v in p.b])
    if p.E:
        kw["A_eq"] = _sparse(p.E, n)
        kw["b_eq"] = np.array([float(v) for v in p.d])
    r = linprog(np.zeros(n), **kw)
    guess = None
    if r.status == 0:
        x = _exact_point(p, r.x)
        if x is not None:
            return Feasible(tuple(x))
        guess = r.x
    # Farkas system: A^T y + E^T z = 0, b.y + d.z = 1, y >= 0
    ma, me = len(p.A), len(p.E)
    rows = [dict() for _ in range(n)]
    for i, r_ in enumerate(p.A):
        for j, v in r_.items():
            rows[j][i] = v
    for k, r_ in enumerate(p.E):
        for j, v in r_.items():
            rows[j][ma + k] = v
    norm = {i: b for i, b in enumerate(p.b) if b}
    norm.update({ma + k: d for k, d in enumerate(p.d) if d})
    if not norm:
        return guess
    rows.append(norm)
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    cost = np.concatenate([np.ones(ma), np.zeros(me)])
    bounds = [(0, None)] * ma + [(None, None)] * me
    r = linprog(cost, A_eq=_sparse(rows, ma + me), b_eq=rhs, bounds=bounds, method="highs")
    if r.status != 0:
        return guess
    cert = _exact_farkas(p, r.x[:ma], r.x[ma:])
    if cert is None:
        return guess
    return Infeasible(tuple(cert[0]), tuple(cert[1]), tuple(p.a_labels) + tuple(p.e_labels))


# -- public operations ---------------------------------------------------------

def lp_feasible(system: InequalitySystem, extra_equalities=(), bounds=(), exact_only=False):
    """Decide feasibility of ``system`` with pinned columns.

    ``extra_equalities`` are ``(column, value)`` pairs, ``bounds`` are
    ``(column, lower, upper)`` triples.  Pins and bounds are appended after the
    system rows, so certificate indices line up with ``pinned_problem``.
    """
    return solve(pinned_problem(system, extra_equalities, bounds), exact_only)


def pinned_problem(system, extra_equalities=(), bounds=()):
    p = Problem.from_system(system)
    idx = {c: i for i, c in enumerate(system.columns)}
    for col, val in extra_equalities:
        if col not in idx:
            raise KeyError(f"unknown column {col}")
        p.add_eq({idx[col]: 1}, val, f"pin {col} = {val}")
    for col, lo, hi in bounds:
        if col not in idx:
            raise KeyError(f"unknown column {col}")
        p.add_ineq({idx[col]: 1}, lo, f"bound {col} >= {lo}")
        p.add_ineq({idx[col]: -1}, -as_fraction(hi), f"bound {col} <= {hi}")
    return p


def verify(system, result, extra_equalities=(), bounds=()) -> bool:
    """Independent re-check of a Feasible point or an Infeasible certificate."""
    p = pinned_problem(system, extra_equalities, bounds)
    if isinstance(result, Feasible):
        return len(result.point) == p.n and check_point(p, list(result.point))
    return check_farkas(p, list(result.ineq_multipliers), list(result.eq_multipliers))


@dataclass(frozen=True)
class Implication:
    holds: bool
    ineq_multipliers: tuple = ()  # candidate = sum y_i A_i + sum z_k E_k, y >= 0
    eq_multipliers: tuple = ()
    counterexample: tuple = ()  # a point of the system violating the candidate

    def __bool__(self):
        return self.holds


def _membership(A, E, target, rhs_a=None, rhs_e=None, target_rhs=0, exact_only=False):
    """Is ``target.x >= target_rhs`` implied by ``A x >= b, E x = d``?

    Posed as feasibility in multipliers ``(y >= 0, z)``:
    ``A^T y + E^T z = target``, ``b.y + d.z >= target_rhs``.
    """
    n = len(target)
    # dependent equality rows only add free multipliers; keep a basis
    keep = _independent(E, rhs_e)
    full_me = len(E)
    E = [E[k] for k in keep]
    rhs_e = [rhs_e[k] for k in keep] if rhs_e else None
    ma, me = len(A), len(E)
    q = Problem(ma + me)
    for i in range(ma):
        q.add_ineq({i: 1}, 0)
    for j in range(n):
        row = {}
        for i, r in enumerate(A):
            if r.get(j):
                row[i] = r[j]
        for k, r in enumerate(E):
            if r.get(j):
                row[ma + k] = r[j]
        q.add_eq(row, target[j])
    rhs_a = rhs_a or [0] * ma
    rhs_e = rhs_e or [0] * me
    nz = {i: v for i, v in enumerate(rhs_a) if v}
    nz.update({ma + k: v for k, v in enumerate(rhs_e) if v})
    if nz or target_rhs:
        q.add_ineq(nz, target_rhs)
    res = solve(q, exact_only)
    if isinstance(res, Feasible):
        u = res.point
        z = [Fraction(0)] * full_me
        for k, v in zip(keep, u[ma:]):
            z[k] = v
        return True, tuple(u[:ma]), tuple(z)
    return False, (), ()


def _independent(E, d=None) -> list[int]:
    """Indices of a maximal linearly independent subset of the rows ``E``."""
    solver = SparseSolver()
    out = []
    for k, r in enumerate(E):
        before = len(solver.pivots)
        solver.add(r, 0)
        if len(solver.pivots) > before:
            out.append(k)
    return out


def implies(system: InequalitySystem, candidate, exact_only=False) -> Implication:
    """Does every point of ``system`` satisfy ``candidate``?

    ``candidate`` is a coefficient sequence (cone inequality ``c.x >= 0``),
    a ``(coeffs, rhs)`` pair, or a LinearConstraint over the system columns.
    Equality candidates are implied when both directions are.
    """
    coeffs, rhs, relation = _candidate(system, candidate)
    if relation == "=":
        a = implies(system, (coeffs, rhs), exact_only)
        b = implies(system, (tuple(-c for c in coeffs), -rhs), exact_only)
        if a and b:
            return Implication(True, a.ineq_multipliers, a.eq_multipliers)
        return a if not a else b
    p = Problem.from_system(system)
    if system.homogeneous and rhs > 0:
        # cones cannot imply affine constraints with positive offset (x = 0 violates)
        return Implication(False, counterexample=tuple(Fraction(0) for _ in system.columns))
    ok, y, z = _membership(p.A, p.E, coeffs, p.b, p.d, rhs, exact_only)
    if ok:
        return Implication(True, y, z)
    if not _feasible(p, exact_only):
        return Implication(True)  # empty set implies anything
    return Implication(False)


def _feasible(p, exact_only=False) -> bool:
    return isinstance(solve(p, exact_only), Feasible)


def _candidate(system, candidate):
    if hasattr(candidate, "coefficients"):
        idx = {c: i for i, c in enumerate(system.columns)}
        row = [0] * system.width
        for v, k in candidate.coefficients:
            if v not in idx:
                raise KeyError(f"candidate uses unknown column {v}")
            row[idx[v]] = k
        return tuple(row), Fraction(0), candidate.relation
    if len(candidate) == 2 and isinstance(candidate[0], (tuple, list)):
        coeffs, rhs = candidate
    else:
        coeffs, rhs = candidate, 0
    if len(coeffs) != system.width:
        raise ValueError("candidate width differs from system width")
    return tuple(as_fraction(c) for c in coeffs), as_fraction(rhs), ">="


def equal_cones(a: InequalitySystem, b: InequalitySystem, exact_only=False) -> bool:
    if a.columns != b.columns:
        if set(a.columns) != set(b.columns):
            raise ValueError("systems are over different columns")
        b = b.reorder(a.columns)
    return contains_rows(a, b, exact_only) and contains_rows(b, a, exact_only)


def contains_rows(implied: InequalitySystem, by: InequalitySystem, exact_only=False) -> bool:
    """Every row of ``implied`` follows from ``by``."""
    for coeffs, rhs in implied.ineqs:
        if not implies(by, (coeffs, rhs), exact_only):
            return False
    for coeffs, rhs in implied.eqs:
        if not implies(by, (coeffs, rhs), exact_only):
            return False
        if not implies(by, (tuple(-c for c in coeffs), -rhs), exact_only):
            return False
    return True


# -- redundancy for homogeneous systems -----------------------------------------

class ConeOracle:
    """Redundancy decisions for rows of a homogeneous system ``A x >= 0, E x = 0``.

    ``redundant(i, active)`` asks whether row ``i`` is a nonnegative
    combination of the other active rows plus equalities.  A positive answer
    comes with an exact multiplier vector supported on active rows; a negative
    answer with an exact point violating only row ``i``.
    """

    def __init__(self, rows, eqs, n):
        self.rows = rows
        self.eqs = eqs
        self.n = n

    def redundant(self, i: int, active) -> tuple[bool, dict | None]:
        others = [k for k in active if k != i]
        target = self.rows[i]
        if not others and not self.eqs:
            return False, None
        res = self._float(target, others)
        if res is not None:
            return res
        ok, y, z = _membership([self.rows[k] for k in others], self.eqs, target, exact_only=True)
        if ok:
            return True, {others[t]: v for t, v in enumerate(y) if v}
        return False, None

    def _float(self, target, others):
        n = self.n
        A = _sparse([self.rows[k] for k in others], n)
        kw = dict(method="highs", bounds=[(-1, 1)] * n)
        if others:
            kw["A_ub"] = -A
            kw["b_ub"] = np.zeros(len(others))
        if self.eqs:
            kw["A_eq"] = _sparse(self.eqs, n)
            kw["b_eq"] = np.zeros(len(self.eqs))
        c = np.zeros(n)
        for j, v in target.items():
            c[j] = float(v)
        r = linprog(c, **kw)
        if r.status != 0:
            return None
        if r.fun < -1e-6:
            # candidate point: exactly check other rows >= 0 and target < 0
            for limit in (1, 12, 720, 10**6):
                x = [_rationalize(v, limit) for v in r.x]
                if (_dot(target, x) < 0
                        and all(_dot(self.rows[k], x) >= 0 for k in others)
                        and all(_dot(e, x) == 0 for e in self.eqs)):
                    return False, None
            return None
        ymarg = -np.asarray(r.ineqlin.marginals) if others else np.zeros(0)
        zmarg = np.asarray(r.eqlin.marginals) if self.eqs else np.zeros(0)
        support = [t for t, v in enumerate(ymarg) if v > _TOL]
        mult = self._exact_combination(target, [others[t] for t in support],
                                       {others[t]: ymarg[t] for t in support}, zmarg)
        if mult is not None:
            return True, mult
        return None

    def _exact_combination(self, target, support, guess, zguess):
        me = len(self.eqs)
        cols: dict[int, dict] = {}
        for s, k in enumerate(support):
            for j, v in self.rows[k].items():
                cols.setdefault(j, {})[s] = as_fraction(v)
        for e, row in enumerate(self.eqs):
            for j, v in row.items():
                cols.setdefault(j, {})[len(support) + e] = as_fraction(v)
        solver = SparseSolver()
        for j in set(cols) | set(target):
            if not solver.add(cols.get(j, {}), target.get(j, 0)):
                return None
        free = {s: _rationalize(guess[k]) for s, k in enumerate(support)}
        free.update({len(support) + e: _rationalize(zguess[e]) if e < len(zguess) else 0
                     for e in range(me)})
        sol = solver.solution(free)
        y = {k: sol.get(s, free[s]) for s, k in enumerate(support)}
        if any(v < 0 for v in y.values()):
            return None
        # exact re-check of the combination
        acc = {}
        for k, m in y.items():
            for j, v in self.rows[k].items():
                acc[j] = acc.get(j, 0) + m * v
        for e in range(me):
            m = sol.get(len(support) + e, free[len(support) + e])
            for j, v in self.eqs[e].items():
                acc[j] = acc.get(j, 0) + m * v
        for j in set(acc) | set(target):
            if acc.get(j, 0) != target.get(j, 0):
                return None
        return {k: v for k, v in y.items() if v}
