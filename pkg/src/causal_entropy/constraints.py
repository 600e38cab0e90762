"""Linear entropy constraints for a causal structure in a given theory.

Each family instantiates one template over every coexisting set.  Terms are
built with :func:`_cond`, which writes a conditional entropy either as its own
component (non-classical conditionals in box-world/GPT) or as a difference of
joint entropies (classical and quantum theory, all-classical conditionals).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from itertools import combinations, permutations
from math import gcd
from typing import Iterable

from .coexistence import EntropyVariable, Scenario, Theory, scenario_variables, submasks
from .graph import CausalStructure, d_separated, descendants

GE = ">="
EQ = "="


class Family(str, enum.Enum):
    SHANNON = "ShannonClassicalSets"
    POSITIVITY = "Positivity"
    POSITIVITY_CONDITIONAL = "PositivityConditional"
    DATA_PROCESSING = "DataProcessing"
    INDEPENDENCE = "Independence"
    CLASSICAL_SUBSYSTEM = "ClassicalSubsystem"
    SUBADDITIVITY = "Subadditivity"
    CHAIN_LOWER = "ChainLower"
    CHAIN_UPPER = "ChainUpper"
    STRONG_SUBADDITIVITY = "StrongSubadditivity"
    WEAK_MONOTONICITY = "WeakMonotonicity"
    PURIFICATION = "Purification"
    MONOTONICITY_ENTANGLED = "MonotonicityEntangled"
    DSEPARATION = "DSeparationObserved"
    NON_SHANNON_ZY = "NonShannonZY"

    @classmethod
    def parse(cls, value) -> "Family":
        if isinstance(value, cls):
            return value
        for f in cls:
            if value in (f.value, f.name) or str(value).lower() == f.value.lower():
                return f
        raise ValueError(f"unknown constraint family {value!r}")


class QuantumVariant(str, enum.Enum):
    WEAK_MONOTONICITY = "weak_monotonicity"
    POSITIVE_CONDITIONAL = "positive_conditional"


class IncompatibleFamily(ValueError):
    pass


_APPLICABLE = {
    Theory.CLASSICAL: {Family.SHANNON, Family.POSITIVITY, Family.INDEPENDENCE,
                       Family.DSEPARATION, Family.NON_SHANNON_ZY},
    Theory.QUANTUM: {Family.SHANNON, Family.POSITIVITY, Family.POSITIVITY_CONDITIONAL,
                     Family.DATA_PROCESSING, Family.INDEPENDENCE,
                     Family.STRONG_SUBADDITIVITY, Family.WEAK_MONOTONICITY,
                     Family.PURIFICATION, Family.MONOTONICITY_ENTANGLED,
                     Family.DSEPARATION, Family.NON_SHANNON_ZY},
    Theory.GPT: {Family.SHANNON, Family.POSITIVITY, Family.DATA_PROCESSING,
                 Family.INDEPENDENCE, Family.CLASSICAL_SUBSYSTEM, Family.CHAIN_LOWER,
                 Family.CHAIN_UPPER, Family.DSEPARATION, Family.NON_SHANNON_ZY},
}
_APPLICABLE[Theory.BOXWORLD] = _APPLICABLE[Theory.GPT] | {Family.SUBADDITIVITY}


def default_families(theory: Theory, variant: QuantumVariant) -> frozenset[Family]:
    if theory == Theory.CLASSICAL:
        fams = {Family.SHANNON, Family.INDEPENDENCE, Family.DSEPARATION}
    elif theory == Theory.QUANTUM:
        fams = {Family.SHANNON, Family.POSITIVITY, Family.DATA_PROCESSING,
                Family.INDEPENDENCE, Family.STRONG_SUBADDITIVITY, Family.DSEPARATION}
        if variant == QuantumVariant.WEAK_MONOTONICITY:
            fams.add(Family.WEAK_MONOTONICITY)
        else:
            fams.add(Family.POSITIVITY_CONDITIONAL)
    else:
        fams = set(_APPLICABLE[theory]) - {Family.NON_SHANNON_ZY}
    return frozenset(fams)


@dataclass(frozen=True)
class GenerationOptions:
    theory: Theory = Theory.GPT
    quantum_variant: QuantumVariant = QuantumVariant.WEAK_MONOTONICITY
    include_non_shannon: bool = False
    enabled_families: frozenset | None = None

    def __post_init__(self):
        object.__setattr__(self, "theory", Theory.parse(self.theory))
        object.__setattr__(self, "quantum_variant", QuantumVariant(self.quantum_variant))
        if self.enabled_families is not None:
            fams = frozenset(Family.parse(f) for f in self.enabled_families)
            object.__setattr__(self, "enabled_families", fams)
        bad = sorted(f.value for f in self.families - _APPLICABLE[self.theory])
        if bad:
            raise IncompatibleFamily(
                f"families {', '.join(bad)} do not apply to theory {self.theory.value}")

    @property
    def families(self) -> frozenset[Family]:
        fams = (self.enabled_families if self.enabled_families is not None
                else default_families(self.theory, self.quantum_variant))
        if self.include_non_shannon:
            fams = fams | {Family.NON_SHANNON_ZY}
        return frozenset(fams)

    def with_families(self, *extra) -> "GenerationOptions":
        return GenerationOptions(self.theory, self.quantum_variant, self.include_non_shannon,
                                 self.families | {Family.parse(f) for f in extra})


@dataclass(frozen=True)
class LinearConstraint:
    """``sum coefficients[v] * v  (>= | =)  0`` with integer coefficients."""

    coefficients: tuple[tuple[EntropyVariable, int], ...]
    relation: str = GE
    family: str = ""
    detail: str = field(default="", compare=False)

    @classmethod
    def make(cls, coeffs: dict, relation=GE, family="", detail="") -> "LinearConstraint | None":
        items = [(v, Fraction(c)) for v, c in coeffs.items() if c != 0]
        if not items:
            return None
        items.sort(key=lambda t: t[0].sort_key())
        den = reduce(lambda a, b: a * b // gcd(a, b), (c.denominator for _, c in items), 1)
        ints = [(v, int(c * den)) for v, c in items]
        g = reduce(gcd, (abs(c) for _, c in ints))
        ints = [(v, c // g) for v, c in ints]
        if relation == EQ and ints[0][1] < 0:
            ints = [(v, -c) for v, c in ints]
        return cls(tuple(ints), relation, family, detail)

    @property
    def key(self):
        return (self.relation, self.coefficients)

    def as_dict(self) -> dict[EntropyVariable, int]:
        return dict(self.coefficients)

    def evaluate(self, point) -> Fraction:
        return sum((Fraction(c) * Fraction(point[v]) for v, c in self.coefficients),
                   Fraction(0))

    def holds(self, point) -> bool:
        val = self.evaluate(point)
        return val == 0 if self.relation == EQ else val >= 0

    def __str__(self):
        terms = []
        for v, c in self.coefficients:
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            terms.append(f"{sign}{'' if mag == 1 else mag}{v}")
        lhs = " ".join(terms).lstrip("+")
        return f"{lhs} {self.relation} 0"


class Generator:
    """Instantiates constraint templates for one scenario."""

    def __init__(self, structure: CausalStructure, options: GenerationOptions):
        self.options = options
        self.sc = Scenario(structure, options.theory)
        self.structure = structure
        self.out: dict = {}
        self.order: list = []

    # -- term builders ---------------------------------------------------
    def H(self, m: int) -> dict:
        return {EntropyVariable(self.sc.unmask(m)): 1} if m else {}

    def cond(self, front: int, back: int) -> dict:
        if not front:
            return {}
        if not back:
            return self.H(front)
        sc = self.sc
        if not sc.theory.uses_conditionals or sc.all_classical(front | back):
            return _add(self.H(front | back), self.H(back), -1)
        return {EntropyVariable(sc.unmask(front), sc.unmask(back)): 1}

    def emit(self, coeffs: dict, relation: str, family: Family, detail: str):
        c = LinearConstraint.make(coeffs, relation, family.value, detail)
        if c is None or c.key in self.out:
            return
        self.out[c.key] = c
        self.order.append(c)

    def name(self, m: int) -> str:
        return "".join(self.sc.unmask(m)) if m else "∅"

    # -- families --------------------------------------------------------
    def run(self) -> list[LinearConstraint]:
        fams = self.options.families
        steps = [
            (Family.POSITIVITY, self.positivity),
            (Family.SHANNON, self.shannon),
            (Family.STRONG_SUBADDITIVITY, self.strong_subadditivity),
            (Family.INDEPENDENCE, self.independence),
            (Family.DSEPARATION, self.dseparation),
            (Family.DATA_PROCESSING, self.data_processing),
            (Family.CLASSICAL_SUBSYSTEM, self.classical_subsystem),
            (Family.SUBADDITIVITY, self.subadditivity),
            (Family.CHAIN_LOWER, self.chain_lower),
            (Family.CHAIN_UPPER, self.chain_upper),
            (Family.POSITIVITY_CONDITIONAL, self.positivity_conditional),
            (Family.WEAK_MONOTONICITY, self.weak_monotonicity),
            (Family.MONOTONICITY_ENTANGLED, self.monotonicity_entangled),
            (Family.PURIFICATION, self.purification),
            (Family.NON_SHANNON_ZY, self.zhang_yeung),
        ]
        for fam, fn in steps:
            if fam in fams:
                fn()
        return list(self.order)

    def _triples(self, u: int):
        """Disjoint (a, b, c) with a, b non-empty inside ``u``; c may be empty."""
        for whole in submasks(u):
            for a in submasks(whole):
                rest = whole & ~a
                for b in submasks(rest):
                    yield a, b, rest & ~b

    def positivity(self):
        sc = self.sc
        for m in sc.coexisting_masks():
            self.emit(self.H(m), GE, Family.POSITIVITY, f"H({self.name(m)})>=0")
        if sc.theory.uses_conditionals:
            for v in scenario_variables(sc):
                if v.conditional:
                    self.emit({v: 1}, GE, Family.POSITIVITY, f"{v}>=0")
        elif sc.theory == Theory.QUANTUM:
            # conditional entropies with a classical side cannot be negative
            for u in sc.maximal_masks:
                for whole in submasks(u):
                    for a in submasks(whole):
                        b = whole & ~a
                        if b and (sc.all_classical(a) or sc.all_classical(b)):
                            self.emit(self.cond(a, b), GE, Family.POSITIVITY,
                                      f"H({self.name(a)}|{self.name(b)})>=0")

    def shannon(self):
        sc = self.sc
        for u in sc.maximal_masks:
            cl = u & sc.classical_mask
            for row, detail in _elemental(cl):
                self.emit({EntropyVariable(sc.unmask(m)): c for m, c in row.items() if m},
                          GE, Family.SHANNON, detail(self.name))

    def strong_subadditivity(self):
        sc = self.sc
        for u in sc.maximal_masks:
            for row, detail in _elemental(u, conditional_positivity=False):
                self.emit({EntropyVariable(sc.unmask(m)): c for m, c in row.items() if m},
                          GE, Family.STRONG_SUBADDITIVITY, detail(self.name))

    def independence(self):
        sc = self.sc
        seen = set()
        for u in sc.maximal_masks:
            for whole in submasks(u):
                for s in submasks(whole):
                    t = whole & ~s
                    if not t or (t, s) in seen or (s, t) in seen:
                        continue
                    seen.add((s, t))
                    if not sc.independent(s, t):
                        continue
                    detail = f"{self.name(s)} indep {self.name(t)}"
                    if sc.theory.uses_conditionals:
                        self.emit(_add(self.cond(s, t), self.H(s), -1), EQ,
                                  Family.INDEPENDENCE, detail)
                        self.emit(_add(self.cond(t, s), self.H(t), -1), EQ,
                                  Family.INDEPENDENCE, detail)
                    else:
                        self.emit(_add(_add(self.H(s | t), self.H(s), -1), self.H(t), -1),
                                  EQ, Family.INDEPENDENCE, detail)

    def dseparation(self):
        sc = self.sc
        s = self.structure
        if sc.theory == Theory.CLASSICAL:
            node_of = {lab: lab for lab in sc.labels}
            eligible = (1 << len(sc.labels)) - 1
        else:
            node_of = {lab: lab for lab, info in sc.systems.items() if info.kind == "observed"}
            eligible = sc.mask(node_of)
        cache = {}
        for u in sc.maximal_masks:
            obs = u & eligible
            for whole in submasks(obs):
                for x in submasks(whole):
                    rest = whole & ~x
                    for y in submasks(rest):
                        z = rest & ~y
                        if x > y:
                            continue
                        key = (x, y, z)
                        if key not in cache:
                            cache[key] = d_separated(
                                s, sc.unmask(x), sc.unmask(y), sc.unmask(z))
                        if not cache[key]:
                            continue
                        coeffs = _add(self.cond(x, z), self.cond(x, y | z), -1)
                        self.emit(coeffs, EQ, Family.DSEPARATION,
                                  f"{self.name(x)} dsep {self.name(y)} | {self.name(z)}")

    def data_processing(self):
        sc = self.sc
        s = self.structure
        seen = set()
        for n in s.names:
            if not s.parents(n):
                continue
            observed_parents = {p for p in s.parents(n) if not s.is_latent(p)}
            consumed = {s.subsystem_label(p, n) for p in s.parents(n) if s.is_latent(p)}
            if s.is_latent(n):
                produced = set(s.subsystems(n))
            else:
                produced = {n}
            if any(lab not in sc.index for lab in observed_parents | consumed | produced):
                continue
            inputs = sc.mask(observed_parents | consumed)
            cons = sc.mask(consumed)
            prod = sc.mask(produced)
            # systems that exist only after this step can be neither untouched nor conditioned on
            later_nodes = descendants(s, n) | {n}
            later = sc.mask({lab for lab, info in sc.systems.items() if info.owner in later_nodes})
            for u in sc.maximal_masks:
                if u & inputs != inputs:
                    continue
                free = u & ~inputs & ~later
                for extra in [0] + submasks(free):
                    b = inputs | extra
                    c = (b & ~cons) | prod
                    for a in submasks(u & ~b & ~later):
                        if a & c or not sc.coexists(a | c):
                            continue
                        if (a, b, c) in seen:
                            continue
                        seen.add((a, b, c))
                        self.emit(_add(self.cond(a, c), self.cond(a, b), -1), GE,
                                  Family.DATA_PROCESSING,
                                  f"H({self.name(a)}|{self.name(b)})<=H({self.name(a)}|{self.name(c)}) via {n}")

    def classical_subsystem(self):
        sc = self.sc
        for u in sc.maximal_masks:
            for a, b, c in self._triples(u):
                if not c or sc.all_classical(c) or not sc.all_classical(a | b):
                    continue
                if a > b:
                    # H(AB|C) >= H(A|C) and >= H(B|C) are separate instances
                    pass
                self.emit(_add(self.cond(a | b, c), self.cond(a, c), -1), GE,
                          Family.CLASSICAL_SUBSYSTEM,
                          f"H({self.name(a | b)}|{self.name(c)})>=H({self.name(a)}|{self.name(c)})")

    def subadditivity(self):
        sc = self.sc
        for u in sc.maximal_masks:
            for whole in submasks(u):
                if sc.all_classical(whole):
                    continue
                for a in submasks(whole):
                    b = whole & ~a
                    if not b or a > b:
                        continue
                    self.emit(_add(_add(self.H(a), self.H(b)), self.H(whole), -1), GE,
                              Family.SUBADDITIVITY, f"{self.name(a)}+{self.name(b)}")

    def chain_lower(self):
        sc = self.sc
        for u in sc.maximal_masks:
            for a, b, c in self._triples(u):
                if not c or sc.all_classical(c) or not sc.all_classical(a | b):
                    continue
                coeffs = _add(_add(self.cond(a, b | c), self.cond(a | b, c), -1), self.H(b))
                self.emit(coeffs, GE, Family.CHAIN_LOWER,
                          f"A={self.name(a)} B={self.name(b)} C={self.name(c)}")

    def chain_upper(self):
        sc = self.sc
        for u in sc.maximal_masks:
            for a, b, c in self._triples(u):
                if not sc.all_classical(b) or sc.all_classical(a | b | c):
                    continue
                coeffs = _add(_add(self.cond(a | b, c), self.cond(b, c), -1),
                              self.cond(a, b | c), -1)
                rel = EQ if sc.all_classical(c) else GE
                self.emit(coeffs, rel, Family.CHAIN_UPPER,
                          f"A={self.name(a)} B={self.name(b)} C={self.name(c)}")

    def _conditional_pairs(self):
        sc = self.sc
        seen = set()
        for u in sc.maximal_masks:
            for whole in submasks(u):
                for a in submasks(whole):
                    b = whole & ~a
                    if b and (a, b) not in seen:
                        seen.add((a, b))
                        yield a, b

    def positivity_conditional(self):
        for a, b in self._conditional_pairs():
            self.emit(self.cond(a, b), GE, Family.POSITIVITY_CONDITIONAL,
                      f"H({self.name(a)}|{self.name(b)})>=0")

    def monotonicity_entangled(self):
        sc = self.sc
        for a, b in self._conditional_pairs():
            if sc.all_classical(a) or sc.all_classical(b):
                continue
            self.emit(self.cond(a, b), GE, Family.MONOTONICITY_ENTANGLED,
                      f"H({self.name(a)}|{self.name(b)})>=0")

    def weak_monotonicity(self):
        sc = self.sc
        seen = set()
        for u in sc.maximal_masks:
            for a, b, c in self._triples(u):
                # b is non-empty here; c may be empty (Araki-Lieb form)
                if sc.all_classical(a):
                    continue
                key = (a, min(b, c), max(b, c))
                if key in seen:
                    continue
                seen.add(key)
                self.emit(_add(self.cond(a, b), self.cond(a, c)), GE,
                          Family.WEAK_MONOTONICITY,
                          f"H({self.name(a)}|{self.name(b)})+H({self.name(a)}|{self.name(c)})>=0")

    def purification(self):
        sc = self.sc
        s = self.structure
        for n in s.latent:
            if s.parents(n):
                continue
            whole = sc.mask(s.subsystems(n))
            if not sc.coexists(whole):
                continue
            self.emit(self.H(whole), EQ, Family.PURIFICATION, f"{n} pure")
            for part in submasks(whole):
                comp = whole & ~part
                if comp and part < comp:
                    self.emit(_add(self.H(part), self.H(comp), -1), EQ, Family.PURIFICATION,
                              f"{n}: H({self.name(part)})=H({self.name(comp)})")

    def zhang_yeung(self):
        sc = self.sc
        obs = [lab for lab in sc.labels if sc.systems[lab].kind == "observed"]
        bit = {lab: sc.mask([lab]) for lab in obs}
        for c, d, e, f in permutations(obs, 4):
            C, D, E, F = bit[c], bit[d], bit[e], bit[f]
            if not sc.coexists(C | D | E | F):
                continue
            terms = {}
            for coeff, (x, y, z) in [(2, (D, E, F)), (1, (D, E, C)), (1, (F, C, 0)),
                                     (-1, (D, E, 0)), (1, (D, F, E)), (1, (E, F, D))]:
                terms = _add(terms, self._mutual(x, y, z), coeff)
            self.emit(terms, GE, Family.NON_SHANNON_ZY, f"ZY({c},{d},{e},{f})")

    def _mutual(self, x, y, z):
        # I(x:y|z) = H(xz) + H(yz) - H(xyz) - H(z), on unconditional components
        t = _add(self.H(x | z), self.H(y | z))
        t = _add(t, self.H(x | y | z), -1)
        return _add(t, self.H(z), -1)


def _add(a: dict, b: dict, k: int = 1) -> dict:
    out = dict(a)
    for v, c in b.items():
        out[v] = out.get(v, 0) + k * c
        if out[v] == 0:
            del out[v]
    return out


def _elemental(u: int, conditional_positivity: bool = True):
    """Elemental Shannon inequalities over the bits of ``u`` as mask->coeff maps."""
    bits = [1 << i for i in range(u.bit_length()) if u >> i & 1]
    if not bits:
        return
    if conditional_positivity:
        for i in bits:
            rest = u & ~i
            row = {u: 1}
            if rest:
                row[rest] = -1
            yield row, (lambda name, i=i, rest=rest: f"H({name(i)}|{name(rest)})>=0")
    for i, j in combinations(bits, 2):
        others = u & ~(i | j)
        for k in [0] + submasks(others):
            row = {}
            for m, c in ((i | k, 1), (j | k, 1), (i | j | k, -1), (k, -1)):
                if m:
                    row[m] = row.get(m, 0) + c
            yield row, (lambda name, i=i, j=j, k=k: f"I({name(i)}:{name(j)}|{name(k)})>=0")


def generate(structure: CausalStructure, options: GenerationOptions | None = None
             ) -> list[LinearConstraint]:
    return Generator(structure, options or GenerationOptions()).run()


def applicable_gpt_scope(structure: CausalStructure) -> bool:
    """True iff no node has two or more latent parents."""
    for n in structure.names:
        if sum(1 for p in structure.parents(n) if structure.is_latent(p)) >= 2:
            return False
    return True


def variables_for(structure: CausalStructure, options: GenerationOptions) -> list[EntropyVariable]:
    return scenario_variables(Scenario(structure, options.theory))


def to_rows(constraints: Iterable[LinearConstraint], columns: list[EntropyVariable]):
    """Dense integer rows; returns (ineqs, eqs, ineq_provenance, eq_provenance)."""
    idx = {v: i for i, v in enumerate(columns)}
    ineqs, eqs, pi, pe = [], [], [], []
    for c in constraints:
        row = [0] * len(columns)
        for v, k in c.coefficients:
            row[idx[v]] = k
        if c.relation == EQ:
            eqs.append(tuple(row))
            pe.append(c)
        else:
            ineqs.append(tuple(row))
            pi.append(c)
    return ineqs, eqs, pi, pe
