"""Coexisting sets and entropy-vector components of a causal structure.

For non-classical resources a latent node hands one subsystem to each of its
children, and a subsystem ceases to exist once the child it feeds has been
generated from it.  Every ancestrally closed set of generated nodes gives one
joint state; the maximal ones are the maximal coexisting sets.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

from .graph import CausalStructure, StructureError, ancestors, validate


class Theory(str, enum.Enum):
    CLASSICAL = "classical"
    QUANTUM = "quantum"
    BOXWORLD = "boxworld"
    GPT = "gpt"

    @classmethod
    def parse(cls, value) -> "Theory":
        if isinstance(value, cls):
            return value
        aliases = {"c": "classical", "q": "quantum", "b": "boxworld", "box": "boxworld",
                   "box-world": "boxworld", "g": "gpt", "generalgpt": "gpt"}
        key = str(value).strip().lower()
        return cls(aliases.get(key, key))

    @property
    def uses_conditionals(self) -> bool:
        return self in (Theory.BOXWORLD, Theory.GPT)


@dataclass(frozen=True)
class EntropyVariable:
    """``H(front)`` or ``H(front|back)``; systems are canonical labels."""

    front: tuple[str, ...]
    back: tuple[str, ...] = ()

    def __post_init__(self):
        front, back = tuple(sorted(set(self.front))), tuple(sorted(set(self.back)))
        if not front:
            raise ValueError("entropy variable needs a non-empty front")
        if set(front) & set(back):
            raise ValueError(f"front and back overlap: {front} | {back}")
        object.__setattr__(self, "front", front)
        object.__setattr__(self, "back", back)

    @property
    def systems(self) -> frozenset[str]:
        return frozenset(self.front) | frozenset(self.back)

    @property
    def conditional(self) -> bool:
        return bool(self.back)

    def sort_key(self):
        return (len(self.front), self.front, len(self.back), self.back)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __str__(self):
        s = ",".join(self.front)
        if self.back:
            s += "|" + ",".join(self.back)
        return f"H({s})"

    @classmethod
    def parse(cls, text: str) -> "EntropyVariable":
        text = text.strip()
        if not (text.startswith("H(") and text.endswith(")")):
            raise ValueError(f"not an entropy variable: {text!r}")
        body = text[2:-1]
        front, _, back = body.partition("|")
        split = lambda s: tuple(x.strip() for x in s.split(",") if x.strip())
        return cls(split(front), split(back))


def H(*front, given=()) -> EntropyVariable:
    """Shorthand: ``H("X", "Y", given=("Z",))``."""
    return EntropyVariable(tuple(front), tuple(given))


@dataclass(frozen=True)
class SystemInfo:
    label: str
    kind: str  # "observed", "subsystem" or "latent" (whole classical latent node)
    owner: str
    target: str | None = None


class Scenario:
    """A causal structure paired with a theory.

    Holds the system registry, the maximal coexisting sets and bitmask helpers
    used by the constraint generator.
    """

    def __init__(self, structure: CausalStructure, theory):
        validate(structure)
        self.structure = structure
        self.theory = Theory.parse(theory)
        self.systems: dict[str, SystemInfo] = _systems(structure, self.theory)
        self.labels = sorted(self.systems)
        self.index = {lab: i for i, lab in enumerate(self.labels)}
        self.classical_mask = 0
        for lab, info in self.systems.items():
            if info.kind == "observed" or self.theory == Theory.CLASSICAL:
                self.classical_mask |= 1 << self.index[lab]
        self.maximal_masks = [self.mask(s) for s in self.maximal_sets]

    @cached_property
    def states(self) -> list[frozenset[str]]:
        if self.theory == Theory.CLASSICAL:
            return [frozenset(self.labels)]
        return _all_states(self.structure)

    @cached_property
    def maximal_sets(self) -> list[frozenset[str]]:
        return _maximal(self.states)

    # -- bitmask helpers -------------------------------------------------
    def mask(self, labels) -> int:
        m = 0
        for lab in labels:
            m |= 1 << self.index[lab]
        return m

    def unmask(self, m: int) -> tuple[str, ...]:
        out, i = [], 0
        while m:
            if m & 1:
                out.append(self.labels[i])
            m >>= 1
            i += 1
        return tuple(out)

    def coexists(self, m: int) -> bool:
        return any(m & u == m for u in self.maximal_masks)

    def all_classical(self, m: int) -> bool:
        return m & self.classical_mask == m

    def is_classical(self, label: str) -> bool:
        return bool(self.classical_mask >> self.index[label] & 1)

    def coexisting_masks(self) -> list[int]:
        """All non-empty subsets of maximal coexisting sets, as bitmasks."""
        seen = set()
        for u in self.maximal_masks:
            for sub in submasks(u):
                seen.add(sub)
        return sorted(seen)

    def ancestry(self, label: str) -> frozenset[str]:
        """Nodes and subsystems a system depends on, itself included."""
        return self._ancestry[label]

    @cached_property
    def _ancestry(self) -> dict[str, frozenset[str]]:
        s = self.structure
        out = {}
        for lab, info in self.systems.items():
            if info.kind == "subsystem":
                nodes = {info.owner} | ancestors(s, info.owner)
                items = {lab} | nodes
            else:
                nodes = {info.owner} | ancestors(s, info.owner)
                items = set(nodes)
                if self.theory != Theory.CLASSICAL:
                    for n in nodes:
                        for p in s.parents(n):
                            if s.is_latent(p):
                                items.add(s.subsystem_label(p, n))
            out[lab] = frozenset(items)
        return out

    def independent(self, a: int, b: int) -> bool:
        """True if no system in ``a`` shares an ancestor with one in ``b``."""
        left = set().union(*(self.ancestry(x) for x in self.unmask(a)))
        right = set().union(*(self.ancestry(x) for x in self.unmask(b)))
        return not (left & right)


def submasks(m: int):
    """Non-empty submasks of ``m`` in increasing order."""
    sub = m
    out = []
    while sub:
        out.append(sub)
        sub = (sub - 1) & m
    return out[::-1]


def _systems(structure: CausalStructure, theory: Theory) -> dict[str, SystemInfo]:
    out = {}
    for n in structure.observed:
        out[n] = SystemInfo(n, "observed", n)
    for n in structure.latent:
        if theory == Theory.CLASSICAL:
            out[n] = SystemInfo(n, "latent", n)
            continue
        for c in structure.children(n):
            lab = structure.subsystem_label(n, c)
            if lab in out and out[lab].kind != "subsystem":
                raise StructureError(f"subsystem label {lab!r} clashes with a node name")
            out[lab] = SystemInfo(lab, "subsystem", n, structure.base(c))
    return out


def _inputs(s: CausalStructure, n: str) -> tuple[set[str], set[str]]:
    """(persisting observed parents, consumed subsystems) of node ``n``."""
    observed = {p for p in s.parents(n) if not s.is_latent(p)}
    consumed = {s.subsystem_label(p, n) for p in s.parents(n) if s.is_latent(p)}
    return observed, consumed


def _generable(s: CausalStructure, nodes) -> list[str]:
    """Nodes of an instance that are produced during the process."""
    out = []
    for n in nodes:
        if s.parents(n):
            out.append(n)
    return out


def _state(s: CausalStructure, nodes, generated: set[str]) -> frozenset[str]:
    present = set()
    for n in nodes:
        if s.is_latent(n):
            if s.parents(n) and n not in generated:
                continue
            for c in s.children(n):
                if c in nodes and c not in generated:
                    present.add(s.subsystem_label(n, c))
        elif not s.parents(n) or n in generated:
            present.add(n)
    return frozenset(present)


def _ancestral_sets(s: CausalStructure, generable: list[str]):
    gen = set(generable)
    order = [n for n in s.topological_order() if n in gen]
    results = []

    def rec(i, chosen):
        if i == len(order):
            results.append(set(chosen))
            return
        n = order[i]
        rec(i + 1, chosen)
        if all(p in chosen for p in s.parents(n) if p in gen):
            chosen.add(n)
            rec(i + 1, chosen)
            chosen.discard(n)

    rec(0, set())
    return results


def _all_states(s: CausalStructure) -> list[frozenset[str]]:
    states = set()
    for branch in s.branches():
        nodes = set(s.instance(branch))
        for g in _ancestral_sets(s, _generable(s, nodes)):
            st = _state(s, nodes, g)
            if st:
                states.add(st)
    return sorted(states, key=lambda x: (sorted(x)))


def _maximal(sets) -> list[frozenset[str]]:
    sets = sorted(set(sets), key=lambda x: (-len(x), sorted(x)))
    out = []
    for x in sets:
        if not any(x <= y for y in out):
            out.append(x)
    return sorted(out, key=sorted)


def generation_order(structure: CausalStructure, branch=None) -> list[frozenset[str]]:
    """Timeline of joint states along the canonical topological order.

    For post-selected structures ``branch`` picks the pivot values (default:
    the first branch).
    """
    validate(structure)
    if branch is None:
        branch = structure.branches()[0]
    nodes = set(structure.instance(branch))
    gen = [n for n in structure.topological_order() if n in nodes and structure.parents(n)]
    generated: set[str] = set()
    timeline = [_state(structure, nodes, generated)]
    for n in gen:
        generated.add(n)
        timeline.append(_state(structure, nodes, generated))
    return timeline


def maximal_coexisting_sets(structure: CausalStructure, theory) -> list[frozenset[str]]:
    return Scenario(structure, theory).maximal_sets


def enumerate_variables(structure: CausalStructure, theory) -> list[EntropyVariable]:
    return scenario_variables(Scenario(structure, theory))


def scenario_variables(sc: Scenario) -> list[EntropyVariable]:
    out = set()
    for m in sc.coexisting_masks():
        out.add(EntropyVariable(sc.unmask(m)))
    if sc.theory.uses_conditionals:
        for u in sc.maximal_masks:
            for whole in submasks(u):
                if sc.all_classical(whole):
                    continue
                for front in submasks(whole):
                    back = whole & ~front
                    if back:
                        out.add(EntropyVariable(sc.unmask(front), sc.unmask(back)))
    return sorted(out)


def marginal_variables(structure: CausalStructure) -> list[EntropyVariable]:
    """Joint entropies of observed variables that exist together."""
    validate(structure)
    out = set()
    for branch in structure.branches():
        obs = sorted(n for n in structure.instance(branch) if not structure.is_latent(n))
        for k in range(1, len(obs) + 1):
            for combo in combinations(obs, k):
                out.add(EntropyVariable(combo))
    return sorted(out)
