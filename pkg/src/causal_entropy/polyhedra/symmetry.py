"""Symmetry groups acting on entropy columns, and orbit classification of rows."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .system import InequalitySystem, _flip_if_needed, canonicalize


class InvalidGenerator(ValueError):
    pass


def _act(perm: dict, column):
    """Image of a column under a permutation of system labels."""
    if hasattr(column, "front"):
        return type(column)(tuple(perm.get(s, s) for s in column.front),
                            tuple(perm.get(s, s) for s in column.back))
    return perm.get(column, column)


@dataclass(frozen=True)
class SymmetryGroup:
    """Group generated by permutations of underlying system labels."""

    generators: tuple  # tuple of dicts label -> label

    @classmethod
    def from_cycles(cls, *gens) -> "SymmetryGroup":
        """Each generator is a list of cycles, e.g. ``[("X0", "X1")]``."""
        out = []
        for cycles in gens:
            perm = {}
            for cyc in cycles:
                for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                    if a in perm:
                        raise InvalidGenerator(f"label {a!r} appears twice in one generator")
                    perm[a] = b
            out.append(perm)
        return cls(tuple(out))

    @classmethod
    def parse(cls, text: str) -> "SymmetryGroup":
        """One generator per line in cycle notation: ``(X0 X1)(Z0 Z1)``.

        Blank lines and ``#`` comments are ignored.
        """
        gens = []
        for no, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if not re.fullmatch(r"(\(\s*[^()\s]+(\s+[^()\s]+)*\s*\)\s*)+", line):
                raise InvalidGenerator(f"line {no}: expected cycles like (A B)(C D), got {raw!r}")
            gens.append([tuple(c.split()) for c in re.findall(r"\(([^()]*)\)", line)])
        return cls.from_cycles(*gens)

    def format(self) -> str:
        lines = []
        for g in self.generators:
            seen, cycles = set(), []
            for a in g:
                if a in seen or g[a] == a:
                    continue
                cyc = [a]
                seen.add(a)
                while g[cyc[-1]] != a:
                    cyc.append(g[cyc[-1]])
                    seen.add(cyc[-1])
                cycles.append("(" + " ".join(cyc) + ")")
            lines.append("".join(cycles))
        return "\n".join(lines) + "\n"

    @classmethod
    def identity(cls) -> "SymmetryGroup":
        return cls(())

    def column_permutations(self, columns) -> list[list[int]]:
        pos = {c: i for i, c in enumerate(columns)}
        perms = []
        for g in self.generators:
            images = set(g.values())
            if images != set(g):
                raise InvalidGenerator(f"generator {g} is not a permutation")
            perm = []
            for c in columns:
                img = _act(g, c)
                if img not in pos:
                    raise InvalidGenerator(f"generator maps column {c} outside the column set")
                perm.append(pos[img])
            perms.append(perm)
        return perms


def _apply(perm, row):
    coeffs, rhs = row
    out = [0] * len(coeffs)
    for i, v in enumerate(coeffs):
        if v:
            out[perm[i]] = v
    return tuple(out), rhs


def _orbit(row, perms, eq: bool):
    norm = (lambda r: _flip_if_needed(*r)) if eq else (lambda r: r)
    start = norm(row)
    seen = {start}
    todo = [start]
    while todo:
        r = todo.pop()
        for p in perms:
            img = norm(_apply(p, r))
            if img not in seen:
                seen.add(img)
                todo.append(img)
    return seen


def _lexkey(row):
    return (row[0], row[1])


def orbit_classify(system: InequalitySystem, group: SymmetryGroup):
    """Group the rows of ``system`` into orbits.

    Returns ``[(relation, representative_row, size)]`` where ``size`` counts
    rows of ``system`` in that orbit and the representative is the
    lexicographically smallest coefficient vector of the orbit.
    """
    sysc = canonicalize(system)
    perms = group.column_permutations(sysc.columns)
    out = []
    for rel, rows, eq in ((">=", sysc.ineqs, False), ("=", sysc.eqs, True)):
        remaining = {(_flip_if_needed(*r) if eq else r) for r in rows}
        while remaining:
            r = min(remaining, key=_lexkey)
            orb = _orbit(r, perms, eq)
            members = remaining & orb
            remaining -= orb
            rep = min(orb, key=_lexkey)
            out.append((rel, rep, len(members)))
    out.sort(key=lambda t: (t[0] != "=", _lexkey(t[1])))
    return out


def orbit_of(row, columns, group: SymmetryGroup, equality=False) -> set:
    """Full orbit of a row (``(coeffs, rhs)``) under ``group``."""
    return _orbit(row, group.column_permutations(columns), equality)
