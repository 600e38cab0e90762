"""Causal structures: DAGs with observed and latent nodes.

Latent nodes distribute one subsystem along each outgoing edge.  Structures
produced by post-selection additionally remember, for every split node, the
original node it stands for and the pivot values it was conditioned on; two
alternatives with conflicting pivot values never exist jointly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Mapping

OBSERVED = "observed"
LATENT = "latent"

_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")
_VALUE_RE = re.compile(r"[A-Za-z0-9_]+\Z")


class StructureError(ValueError):
    """Base class for malformed causal structures."""


class CycleDetected(StructureError):
    pass


class DanglingEdge(StructureError):
    pass


class DuplicateName(StructureError):
    pass


class InvalidName(StructureError):
    pass


class LatentWithoutChildren(StructureError):
    pass


class UnknownNode(StructureError, KeyError):
    def __str__(self):
        return ValueError.__str__(self)


class OverlappingSets(StructureError):
    pass


class NotParentless(StructureError):
    pass


class NotObserved(StructureError):
    pass


class InvalidCardinality(StructureError):
    pass


class ParseError(StructureError):
    def __init__(self, message, line=0, column=0):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class EmptyStructure(ParseError):
    pass


@dataclass(frozen=True)
class CausalStructure:
    """Immutable DAG over named nodes.

    ``alternatives`` maps a split node to ``(base, assignment)`` where
    ``assignment`` is a sorted tuple of ``(pivot, value)`` pairs.  Nodes
    absent from the mapping are their own base with an empty assignment.
    """

    nodes: tuple[tuple[str, str], ...]
    edges: tuple[tuple[str, str], ...]
    alternatives: tuple[tuple[str, str, tuple[tuple[str, str], ...]], ...] = ()
    _kind: dict = field(init=False, repr=False, compare=False, hash=False)
    _parents: dict = field(init=False, repr=False, compare=False, hash=False)
    _children: dict = field(init=False, repr=False, compare=False, hash=False)
    _alt: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(sorted(self.nodes)))
        object.__setattr__(self, "edges", tuple(sorted(set(self.edges))))
        object.__setattr__(
            self, "alternatives",
            tuple(sorted((n, b, tuple(sorted(a))) for n, b, a in self.alternatives)))
        kind = {}
        for name, k in self.nodes:
            if name in kind:
                raise DuplicateName(f"duplicate node name {name!r}")
            if k not in (OBSERVED, LATENT):
                raise StructureError(f"node {name!r} has unknown kind {k!r}")
            kind[name] = k
        parents = {n: set() for n in kind}
        children = {n: set() for n in kind}
        for u, v in self.edges:
            for end in (u, v):
                if end not in kind:
                    raise DanglingEdge(f"edge {u} -> {v} refers to unknown node {end!r}")
            parents[v].add(u)
            children[u].add(v)
        alt = {}
        for n, base, assignment in self.alternatives:
            if n not in kind:
                raise DanglingEdge(f"alternative refers to unknown node {n!r}")
            alt[n] = (base, assignment)
        object.__setattr__(self, "_kind", kind)
        object.__setattr__(self, "_parents", {n: frozenset(p) for n, p in parents.items()})
        object.__setattr__(self, "_children", {n: frozenset(c) for n, c in children.items()})
        object.__setattr__(self, "_alt", alt)

    @classmethod
    def build(cls, observed: Iterable[str] = (), latent: Iterable[str] = (),
              edges: Iterable[tuple[str, str]] = (), alternatives=None) -> "CausalStructure":
        nodes = [(n, OBSERVED) for n in observed] + [(n, LATENT) for n in latent]
        alts = []
        for n, (base, assignment) in (alternatives or {}).items():
            if isinstance(assignment, Mapping):
                assignment = tuple(assignment.items())
            alts.append((n, base, tuple((str(p), str(v)) for p, v in assignment)))
        s = cls(tuple(nodes), tuple(edges), tuple(alts))
        validate(s)
        return s

    # -- basic queries -------------------------------------------------
    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.nodes]

    @property
    def observed(self) -> list[str]:
        return [n for n, k in self.nodes if k == OBSERVED]

    @property
    def latent(self) -> list[str]:
        return [n for n, k in self.nodes if k == LATENT]

    def kind(self, n: str) -> str:
        self._check(n)
        return self._kind[n]

    def is_latent(self, n: str) -> bool:
        return self.kind(n) == LATENT

    def parents(self, n: str) -> frozenset[str]:
        self._check(n)
        return self._parents[n]

    def children(self, n: str) -> frozenset[str]:
        self._check(n)
        return self._children[n]

    def base(self, n: str) -> str:
        self._check(n)
        return self._alt.get(n, (n, ()))[0]

    def assignment(self, n: str) -> tuple[tuple[str, str], ...]:
        self._check(n)
        return self._alt.get(n, (n, ()))[1]

    def __contains__(self, n) -> bool:
        return n in self._kind

    def _check(self, n):
        if n not in self._kind:
            raise UnknownNode(f"unknown node {n!r}")

    def subsystem_label(self, owner: str, target: str) -> str:
        """Label of the subsystem that latent ``owner`` sends towards ``target``.

        Alternatives of the same original child receive the same subsystem.
        """
        return f"{owner}_{self.base(target)}"

    def subsystems(self, owner: str) -> list[str]:
        if not self.is_latent(owner):
            raise NotObserved(f"{owner!r} is not latent")
        return sorted({self.subsystem_label(owner, t) for t in self._children[owner]})

    def subsystem_descendants(self, owner: str, target: str) -> set[str]:
        """Nodes having the subsystem on edge ``owner -> target`` as ancestor."""
        if (owner, target) not in set(self.edges):
            raise DanglingEdge(f"no edge {owner} -> {target}")
        label = self.subsystem_label(owner, target)
        out = set()
        for t in self._children[owner]:
            if self.subsystem_label(owner, t) == label:
                out.add(t)
                out |= descendants(self, t)
        return out

    def pivots(self) -> dict[str, list[str]]:
        """Pivot names mapped to the values used by split nodes."""
        vals: dict[str, set] = {}
        for _, assignment in self._alt.values():
            for p, v in assignment:
                vals.setdefault(p, set()).add(v)
        return {p: sorted(v) for p, v in sorted(vals.items())}

    def compatible(self, a: str, b: str) -> bool:
        """False iff ``a`` and ``b`` are alternatives for conflicting pivot values."""
        da = dict(self.assignment(a))
        for p, v in self.assignment(b):
            if da.get(p, v) != v:
                return False
        return True

    def branches(self) -> list[dict[str, str]]:
        """Every full assignment of pivot values (one entry if no pivots)."""
        piv = self.pivots()
        keys = list(piv)
        return [dict(zip(keys, vals)) for vals in product(*(piv[k] for k in keys))]

    def instance(self, branch: Mapping[str, str]) -> list[str]:
        """Nodes present when the pivots take the values in ``branch``."""
        out = []
        for n in self.names:
            if all(branch.get(p) == v for p, v in self.assignment(n)):
                out.append(n)
        return out

    def topological_order(self) -> list[str]:
        order, indeg = [], {n: len(self._parents[n]) for n in self._kind}
        ready = sorted(n for n, d in indeg.items() if d == 0)
        while ready:
            n = ready.pop(0)
            order.append(n)
            for c in sorted(self._children[n]):
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
            ready.sort()
        if len(order) != len(self._kind):
            stuck = sorted(n for n, d in indeg.items() if d > 0)
            raise CycleDetected(f"cycle through nodes {', '.join(stuck)}")
        return order


def validate(structure: CausalStructure) -> None:
    for n in structure.names:
        if not _NAME_RE.match(n):
            raise InvalidName(f"invalid node name {n!r}")
    for u, v in structure.edges:
        if u == v:
            raise CycleDetected(f"self-loop on {u!r}")
    structure.topological_order()
    for n in structure.latent:
        if not structure.children(n):
            raise LatentWithoutChildren(f"latent node {n!r} has no outgoing edge")
    for n, _, assignment in structure.alternatives:
        if structure.is_latent(n):
            raise StructureError(f"latent node {n!r} cannot be an alternative")
        for p, v in assignment:
            if not _VALUE_RE.match(v):
                raise InvalidName(f"invalid pivot value {v!r} on {n!r}")


def ancestors(structure: CausalStructure, n: str) -> set[str]:
    structure._check(n)
    out, stack = set(), list(structure.parents(n))
    while stack:
        p = stack.pop()
        if p not in out:
            out.add(p)
            stack.extend(structure.parents(p))
    return out


def descendants(structure: CausalStructure, n: str) -> set[str]:
    structure._check(n)
    out, stack = set(), list(structure.children(n))
    while stack:
        c = stack.pop()
        if c not in out:
            out.add(c)
            stack.extend(structure.children(c))
    return out


def d_separated(structure: CausalStructure, xs: Iterable[str], ys: Iterable[str],
                zs: Iterable[str] = ()) -> bool:
    """True iff every path between ``xs`` and ``ys`` is blocked by ``zs``.

    A collider is open when it or one of its descendants lies in ``zs``.
    Reachability search over (node, direction) states.
    """
    xs, ys, zs = set(xs), set(ys), set(zs)
    for n in xs | ys | zs:
        structure._check(n)
    if xs & ys or xs & zs or ys & zs:
        raise OverlappingSets("conditioning sets must be pairwise disjoint")
    # nodes that are in zs or have a descendant in zs
    opened = set()
    for z in zs:
        opened.add(z)
        opened |= ancestors(structure, z)
    # direction: "up" = arrived from a child, "down" = arrived from a parent
    frontier = [(x, "up") for x in xs]
    seen = set()
    while frontier:
        node, direction = frontier.pop()
        if (node, direction) in seen:
            continue
        seen.add((node, direction))
        if node in ys:
            return False
        if direction == "up":
            if node in zs:
                continue
            frontier.extend((p, "up") for p in structure.parents(node))
            frontier.extend((c, "down") for c in structure.children(node))
        else:
            if node not in zs:
                frontier.extend((c, "down") for c in structure.children(node))
            if node in opened:
                frontier.extend((p, "up") for p in structure.parents(node))
    return True


def post_select(structure: CausalStructure, pivot: str, values=2,
                naming: str = "{node}_{pivot}{value}"):
    """Split the observed descendants of ``pivot`` into one node per value.

    ``values`` is a count ``n`` (labels ``1..n``) or an explicit label list.
    Returns the new structure and a mapping from every removed node to the
    nodes replacing it (empty list for the pivot itself).
    """
    structure._check(pivot)
    if structure.is_latent(pivot):
        raise NotObserved(f"pivot {pivot!r} is latent")
    if structure.parents(pivot):
        raise NotParentless(f"pivot {pivot!r} has parents")
    if isinstance(values, int):
        if values < 2:
            raise InvalidCardinality(f"need at least 2 values, got {values}")
        labels = [str(v) for v in range(1, values + 1)]
    else:
        labels = [str(v) for v in values]
        if len(labels) < 2 or len(set(labels)) != len(labels):
            raise InvalidCardinality(f"need at least 2 distinct values, got {labels}")
    desc = descendants(structure, pivot)
    latent_desc = sorted(d for d in desc if structure.is_latent(d))
    if latent_desc:
        raise StructureError(
            f"cannot post-select on {pivot!r}: latent descendants {latent_desc}")
    split = {d: [naming.format(node=d, pivot=pivot, value=v) for v in labels]
             for d in sorted(desc)}
    taken = set(structure.names) - desc - {pivot}
    for new in split.values():
        for name in new:
            if name in taken:
                raise DuplicateName(f"split node name {name!r} already in use")
            taken.add(name)

    nodes = [(n, k) for n, k in structure.nodes if n != pivot and n not in desc]
    nodes += [(name, OBSERVED) for new in split.values() for name in new]
    edges = []
    for u, v in structure.edges:
        if pivot in (u, v):
            continue
        if u in desc and v in desc:
            edges += [(split[u][i], split[v][i]) for i in range(len(labels))]
        elif v in desc:
            edges += [(u, name) for name in split[v]]
        elif u in desc:
            edges += [(name, v) for name in split[u]]
        else:
            edges.append((u, v))
    alts = []
    for n, base, assignment in structure.alternatives:
        if n not in desc:
            alts.append((n, base, assignment))
    for d, new in split.items():
        base, assignment = structure._alt.get(d, (d, ()))
        for name, v in zip(new, labels):
            alts.append((name, base, tuple(assignment) + ((pivot, v),)))
    result = CausalStructure(tuple(nodes), tuple(edges), tuple(alts))
    validate(result)
    mapping = {pivot: []}
    mapping.update(split)
    return result, mapping


# -- text format ----------------------------------------------------------

def serialize_structure(structure: CausalStructure) -> str:
    lines = [f"node {n} {k}" for n, k in structure.nodes]
    lines += [f"edge {u} -> {v}" for u, v in structure.edges]
    for n, base, assignment in structure.alternatives:
        tail = " ".join(f"{p}={v}" for p, v in assignment)
        lines.append(f"alt {n} {base} {tail}".rstrip())
    return "\n".join(lines) + "\n"


def parse_structure(text: str) -> CausalStructure:
    nodes, edges, alts = [], [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        col = len(line) - len(line.lstrip()) + 1
        tok = line.split()
        key = tok[0]
        if key == "node":
            if len(tok) != 3 or tok[2] not in (OBSERVED, LATENT):
                raise ParseError("expected 'node NAME observed|latent'", lineno, col)
            _check_name(tok[1], lineno, raw)
            nodes.append((tok[1], tok[2]))
        elif key == "edge":
            if len(tok) != 4 or tok[2] != "->":
                raise ParseError("expected 'edge SRC -> DST'", lineno, col)
            _check_name(tok[1], lineno, raw)
            _check_name(tok[3], lineno, raw)
            edges.append((tok[1], tok[3]))
        elif key == "alt":
            if len(tok) < 3:
                raise ParseError("expected 'alt NAME BASE PIVOT=VALUE ...'", lineno, col)
            assignment = []
            for item in tok[3:]:
                p, sep, v = item.partition("=")
                if not sep or not _NAME_RE.match(p) or not _VALUE_RE.match(v):
                    raise ParseError(f"bad pivot assignment {item!r}", lineno,
                                     raw.find(item) + 1)
                assignment.append((p, v))
            alts.append((tok[1], tok[2], tuple(assignment)))
        else:
            raise ParseError(f"unknown keyword {key!r}", lineno, col)
    if not nodes and not edges:
        raise EmptyStructure("structure file declares no nodes")
    try:
        s = CausalStructure(tuple(nodes), tuple(edges), tuple(alts))
        validate(s)
    except ParseError:
        raise
    except StructureError as exc:
        raise ParseError(str(exc)) from exc
    return s


def _check_name(name, lineno, raw):
    if not _NAME_RE.match(name):
        raise ParseError(f"invalid identifier {name!r}", lineno, raw.find(name) + 1)
