"""Independent reference implementations used by the property tests.

Nothing here imports the code under test except for data types and the
functions whose output is being compared.
"""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction

import numpy as np


# -- d-separation by explicit path enumeration ----------------------------------

def dsep_paths(nodes, edges, xs, ys, zs) -> bool:
    """True when every undirected simple path from ``xs`` to ``ys`` is blocked by ``zs``."""
    parents = {n: set() for n in nodes}
    children = {n: set() for n in nodes}
    for a, b in edges:
        parents[b].add(a)
        children[a].add(b)

    def desc(n):
        out, todo = set(), [n]
        while todo:
            for c in children[todo.pop()]:
                if c not in out:
                    out.add(c)
                    todo.append(c)
        return out

    zs = set(zs)
    nbrs = {n: parents[n] | children[n] for n in nodes}

    def blocked(path):
        for a, m, b in zip(path, path[1:], path[2:]):
            collider = a in parents[m] and b in parents[m]
            if collider:
                if m not in zs and not (desc(m) & zs):
                    return True
            elif m in zs:
                return True
        return False

    def paths(src, dst):
        stack = [(src, [src])]
        while stack:
            n, path = stack.pop()
            if n == dst:
                yield path
                continue
            for m in nbrs[n]:
                if m not in path:
                    stack.append((m, path + [m]))

    for x in xs:
        for y in ys:
            for p in paths(x, y):
                if not blocked(p):
                    return False
    return True


def random_dag(rng: random.Random, max_nodes=6):
    n = rng.randint(2, max_nodes)
    nodes = [f"N{i}" for i in range(n)]
    edges = [(nodes[i], nodes[j]) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.4]
    return nodes, edges


# -- polyhedral projection by sampling ------------------------------------------

def random_cone(rng: random.Random, width=4, rows=6, coeff=3):
    ineqs = []
    for _ in range(rows):
        r = tuple(rng.randint(-coeff, coeff) for _ in range(width))
        if any(r):
            ineqs.append((r, 0))
    return ineqs


def in_projection(ineqs, eqs, width, keep_idx, point) -> bool:
    """Is ``point`` (values on ``keep_idx``) the image of a point of the system? (float LP)"""
    from scipy.optimize import linprog
    elim = [j for j in range(width) if j not in keep_idx]
    if not elim:
        return all(sum(c * point[keep_idx.index(j)] for j, c in enumerate(r)) >= b - 1e-9
                   for r, b in ineqs) and all(
            abs(sum(c * point[keep_idx.index(j)] for j, c in enumerate(r)) - b) < 1e-9
            for r, b in eqs)
    A, b = [], []
    for r, rhs in ineqs:
        A.append([-r[j] for j in elim])
        b.append(-(rhs - sum(r[j] * point[k] for k, j in enumerate(keep_idx))))
    E, d = [], []
    for r, rhs in eqs:
        E.append([r[j] for j in elim])
        d.append(rhs - sum(r[j] * point[k] for k, j in enumerate(keep_idx)))
    res = linprog(np.zeros(len(elim)), A_ub=A or None, b_ub=b or None, A_eq=E or None,
                  b_eq=d or None, bounds=[(None, None)] * len(elim), method="highs")
    return res.status == 0


def satisfies(rows_ineq, rows_eq, point) -> bool:
    ok = all(sum(c * x for c, x in zip(r, point)) >= b for r, b in rows_ineq)
    return ok and all(sum(c * x for c, x in zip(r, point)) == b for r, b in rows_eq)


# -- classical strategies on a DAG ----------------------------------------------

def topological(nodes, parents):
    order, done = [], set()
    while len(order) < len(nodes):
        for n in nodes:
            if n not in done and parents[n] <= done:
                order.append(n)
                done.add(n)
    return order


def random_classical_joint(structure, rng: np.random.Generator, card=2, latent_card=3):
    """Joint pmf (array, one axis per node in sorted order) for random conditional tables."""
    nodes = sorted(structure.names)
    parents = {n: set(structure.parents(n)) for n in nodes}
    cards = [latent_card if structure.is_latent(n) else card for n in nodes]
    joint = np.ones(cards)
    for n in topological(nodes, parents):
        i = nodes.index(n)
        order = sorted(nodes.index(p) for p in parents[n]) + [i]
        t = rng.dirichlet(np.full(cards[i], 0.7), size=int(np.prod([cards[p] for p in order[:-1]])))
        t = t.reshape([cards[p] for p in order])
        # put the table axes in node order, then broadcast onto the joint
        t = np.moveaxis(t, list(range(len(order))), list(np.argsort(np.argsort(order))))
        shape = [cards[k] if k in order else 1 for k in range(len(nodes))]
        joint = joint * t.reshape(shape)
    return nodes, joint


def entropy_of(nodes, joint, subset) -> float:
    if not subset:
        return 0.0
    keep = {nodes.index(s) for s in subset}
    marg = joint.sum(axis=tuple(i for i in range(len(nodes)) if i not in keep)).ravel()
    marg = marg[marg > 0]
    return float(-(marg * np.log2(marg)).sum())


# -- singlet state vector -------------------------------------------------------

def singlet_probabilities(t1: float, t2: float) -> dict:
    """Outcome pmf for projective measurements at angles ``t1``, ``t2`` on the singlet."""
    psi = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)

    def basis(t):
        return [np.array([math.cos(t), math.sin(t)], dtype=complex),
                np.array([math.sin(t), -math.cos(t)], dtype=complex)]

    out = {}
    for a, va in enumerate(basis(t1)):
        for b, vb in enumerate(basis(t2)):
            amp = np.vdot(np.kron(va, vb), psi)
            out[(a, b)] = abs(amp) ** 2
    return out


def to_float(f: Fraction) -> float:
    return f.numerator / f.denominator


def prbox_member(a, b, c):
    """Joint pmf of (X, Y, Z) for two PR boxes where B enters one box at random
    and that box's output drives the other; ``Y = 2*y1 + y2``."""
    pr = np.zeros((2, 2, 2, 2))  # outputs x, y | inputs s, t
    for x, y, s, t in itertools.product((0, 1), repeat=4):
        pr[x, y, s, t] = 0.5 * ((x ^ y) == (s & t))
    joint = np.zeros((2, 4, 2))
    for x, y1, y2, z in itertools.product((0, 1), repeat=4):
        first = pr[x, y1, a, b] * pr[y2, z, y1, c]
        second = pr[y2, z, b, c] * pr[x, y1, a, y2]
        joint[x, 2 * y1 + y2, z] += 0.5 * (first + second)
    return joint


def bilocal_entropies(member, columns):
    """Float entropies of post-selected columns such as ``H(X1,Z0)``.

    ``member(a, b, c)`` returns the pmf array over (X, Y, Z); letters missing
    from a column take setting 0, which no-signalling makes irrelevant.
    """
    out = {}
    for col in columns:
        names = col.front
        settings = {n[0]: int(n[1:]) for n in names}
        joint = member(settings.get("X", 0), settings.get("Y", 0), settings.get("Z", 0))
        drop = tuple(i for i, L in enumerate("XYZ") if L not in settings)
        p = joint.sum(axis=drop).ravel() if drop else joint.ravel()
        p = p[p > 1e-300]
        out[col] = float(-(p * np.log2(p)).sum())
    return out


def four_qubit_member(x, a, b, c):
    """Joint pmf of (X, Y, Z) from two singlets with Y's second angle set by its first outcome."""
    psi = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)
    state = np.kron(psi, psi)

    def basis(t):
        return [np.array([math.cos(t), math.sin(t)]), np.array([math.sin(t), -math.cos(t)])]

    tx = (x, 3 * x)[a]
    ty = (0, 2 * x)[b]
    tz = (0, 2 * x)[c]
    out = {}
    for xo, y0, y1, zo in itertools.product((0, 1), repeat=4):
        v = np.kron(np.kron(basis(tx)[xo], basis(ty)[y0]),
                    np.kron(basis((2 * y0 + 1) * x)[y1], basis(tz)[zo]))
        out[(xo, 2 * y0 + y1, zo)] = abs(np.vdot(v, state)) ** 2
    return out


def singlet_member(x):
    def member(a, b, c):
        joint = np.zeros((2, 4, 2))
        for k, p in four_qubit_member(x, a, b, c).items():
            joint[k] = p
        return joint
    return member
