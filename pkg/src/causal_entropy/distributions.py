"""Observed distributions, post-selected families and their entropy vectors.

Probabilities are exact rationals.  A distribution may carry a ``tolerance``
bounding the distance between each stored probability and the true one
(used for strategies with irrational probabilities); entropy enclosures then
widen to cover every distribution within that tolerance.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable

import mpmath

from .coexistence import EntropyVariable
from .graph import ParseError


class NotNormalized(ValueError):
    pass


class UnknownComponent(KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class InconsistentMarginals(ValueError):
    pass


@dataclass(frozen=True)
class ObservedDistribution:
    variables: tuple  # ((name, cardinality), ...)
    mass: dict = field(hash=False)  # outcome tuple -> Fraction
    tolerance: Fraction = Fraction(0)

    def __post_init__(self):
        names = [v for v, _ in self.variables]
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names")
        mass = {}
        for k, p in self.mass.items():
            k = tuple(int(v) for v in k)
            p = Fraction(p)
            if len(k) != len(self.variables):
                raise ValueError(f"outcome {k} has wrong length")
            for v, (name, card) in zip(k, self.variables):
                if not 0 <= v < card:
                    raise ValueError(f"outcome {v} outside alphabet of {name}")
            if p < 0:
                raise ValueError(f"negative probability at {k}")
            if p:
                mass[k] = mass.get(k, 0) + p
        total = sum(mass.values(), Fraction(0))
        if total != 1:
            raise NotNormalized(f"probabilities sum to {total}, not 1")
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "tolerance", Fraction(self.tolerance))

    @property
    def names(self) -> tuple:
        return tuple(v for v, _ in self.variables)

    def marginal(self, names: Iterable[str]) -> dict:
        names = list(names)
        pos = [self.names.index(n) for n in names]
        out: dict = {}
        for k, p in self.mass.items():
            key = tuple(k[i] for i in pos)
            out[key] = out.get(key, 0) + p
        return out

    def __eq__(self, other):
        return (isinstance(other, ObservedDistribution) and self.variables == other.variables
                and self.mass == other.mass and self.tolerance == other.tolerance)


@dataclass(frozen=True)
class PostSelectedFamily:
    """One distribution per pivot assignment.

    ``labels`` maps a post-selected variable label (e.g. ``"X0"``) to its
    base variable and the pivot values it is conditioned on.
    """

    pivots: tuple  # ((name, (value, ...)), ...)
    members: dict = field(hash=False)  # tuple of pivot values -> ObservedDistribution
    labels: dict = field(default_factory=dict, hash=False)  # label -> (base, {pivot: value})
    shared: tuple = ()  # ((variables...), (pivots...)) marginals equal across those pivots

    def __post_init__(self):
        keys = list(product(*[vals for _, vals in self.pivots]))
        missing = [k for k in keys if k not in self.members]
        if missing:
            raise ValueError(f"missing members for pivot values {missing[:3]}")
        for variables, pivs in self.shared:
            self._check_shared(tuple(variables), tuple(pivs))

    @property
    def pivot_names(self) -> tuple:
        return tuple(p for p, _ in self.pivots)

    def member(self, assignment: dict) -> list:
        """Members compatible with a partial pivot assignment."""
        out = []
        for key, dist in self.members.items():
            if all(str(key[i]) == str(assignment[p]) for i, p in enumerate(self.pivot_names)
                   if p in assignment):
                out.append(dist)
        return out

    def _check_shared(self, variables, pivs):
        names = self.pivot_names
        groups: dict = {}
        for key, dist in self.members.items():
            rest = tuple(v for p, v in zip(names, key) if p not in pivs)
            m = dist.marginal(variables)
            if rest in groups and groups[rest] != m:
                raise InconsistentMarginals(
                    f"marginal of {variables} depends on pivots {pivs} at {rest}")
            groups.setdefault(rest, m)

    def __eq__(self, other):
        return (isinstance(other, PostSelectedFamily) and self.pivots == other.pivots
                and self.members == other.members)


# -- entropy enclosures -------------------------------------------------------

@dataclass(frozen=True)
class Enclosure:
    lower: Fraction
    upper: Fraction

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    def __contains__(self, v) -> bool:
        return self.lower <= v <= self.upper

    def __add__(self, other):
        return Enclosure(self.lower + other.lower, self.upper + other.upper)


def _is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def _exact_entropy(probs) -> Fraction | None:
    """Entropy when every probability is a power of two, else None."""
    total = Fraction(0)
    for p in probs:
        if p.numerator != 1 or not _is_power_of_two(p.denominator):
            return None
        total += p * (p.denominator.bit_length() - 1)
    return total


def _dyadic_floor(x: mpmath.mpf, bits: int) -> Fraction:
    return Fraction(int(mpmath.floor(x * 2 ** bits)), 2 ** bits)


def _dyadic_ceil(x: mpmath.mpf, bits: int) -> Fraction:
    return Fraction(int(mpmath.ceil(x * 2 ** bits)), 2 ** bits)


def entropy_enclosure(probs, tolerance: Fraction = Fraction(0), precision: int = 40) -> Enclosure:
    """Enclose ``-sum p log2 p`` by dyadic rationals of width <= 2**-precision.

    Each true probability lies within ``tolerance`` of the stored one.
    """
    probs = [Fraction(p) for p in probs if p or tolerance]
    if tolerance == 0:
        ex = _exact_entropy(probs)
        if ex is not None:
            return Enclosure(ex, ex)
    with mpmath.workprec(precision + 64):
        lo_sum = mpmath.mpf(0)
        hi_sum = mpmath.mpf(0)
        for p in probs:
            lo, hi = _term_bounds(p, tolerance)
            lo_sum += lo
            hi_sum += hi
        # outward rounding of the accumulated sums
        slack = mpmath.mpf(2) ** (-(precision + 48)) * (len(probs) + 1)
        lower = _dyadic_floor(lo_sum - slack, precision + 1)
        upper = _dyadic_ceil(hi_sum + slack, precision + 1)
    if upper - lower > Fraction(1, 2 ** precision):
        raise ArithmeticError("tolerance too large for the requested precision")
    return Enclosure(max(lower, Fraction(0)), upper)


def _f(x):
    return -x * mpmath.log(x, 2) if x > 0 else mpmath.mpf(0)


def _term_bounds(p: Fraction, tol: Fraction):
    """Bounds of -q log2 q over q in [p - tol, p + tol] intersected with [0, 1]."""
    a = max(p - tol, Fraction(0))
    b = min(p + tol, Fraction(1))
    am = mpmath.mpf(a.numerator) / a.denominator
    bm = mpmath.mpf(b.numerator) / b.denominator
    fa, fb = _f(am), _f(bm)
    peak = 1 / mpmath.e
    lo = min(fa, fb)
    hi = max(fa, fb)
    if am <= peak <= bm:
        hi = _f(peak)
    return lo, hi


def _resolve(source, label: str, structure):
    if isinstance(source, PostSelectedFamily):
        if label in source.labels:
            base, assignment = source.labels[label]
            return base, dict(assignment)
        if structure is not None and label in structure.names:
            return structure.base(label), dict(structure.assignment(label))
    return label, {}


def component_distribution(source, component: EntropyVariable, structure=None):
    """Marginal pmf (dict) and tolerance of the variables in ``component``."""
    if component.back:
        raise UnknownComponent(f"{component} is conditional; marginals are unconditional")
    bases, assignment = [], {}
    for label in component.front:
        base, asg = _resolve(source, label, structure)
        for p, v in asg.items():
            if str(assignment.get(p, v)) != str(v):
                raise UnknownComponent(f"{component}: labels need incompatible pivot values")
            assignment[p] = v
        bases.append(base)
    if isinstance(source, ObservedDistribution):
        dists = [source]
    else:
        dists = source.member(assignment)
    if not dists:
        raise UnknownComponent(f"no member hosts {component}")
    for b in bases:
        if b not in dists[0].names:
            raise UnknownComponent(f"variable {b!r} of {component} not in distribution")
    marg = dists[0].marginal(bases)
    for d in dists[1:]:
        if d.marginal(bases) != marg:
            raise InconsistentMarginals(
                f"{component}: marginal differs across members sharing {assignment}")
    n_summed = 1
    for name, card in dists[0].variables:
        if name not in bases:
            n_summed *= card
    return marg, dists[0].tolerance * n_summed


def entropy_vector(source, components, precision: int = 40, structure=None) -> dict:
    """``{component: Enclosure}`` of Shannon entropies in bits."""
    out = {}
    for comp in components:
        if isinstance(comp, str):
            comp = EntropyVariable.parse(comp)
        marg, tol = component_distribution(source, comp, structure)
        probs = list(marg.values())
        if tol:
            probs += [Fraction(0)] * (_cells(source, comp, structure) - len(probs))
        out[comp] = entropy_enclosure(probs, tol, precision)
    return out


def _cells(source, comp, structure) -> int:
    dist = source if isinstance(source, ObservedDistribution) else next(iter(source.members.values()))
    cards = dict(dist.variables)
    n = 1
    for label in comp.front:
        n *= cards[_resolve(source, label, structure)[0]]
    return n


# -- strategies ---------------------------------------------------------------

def _bilocal_labels():
    labels = {}
    for node, pivot in (("X", "A"), ("Y", "B"), ("Z", "C")):
        for v in ("0", "1"):
            labels[f"{node}{v}"] = (node, {pivot: v})
    return labels


_BILOCAL_SHARED = ((("X",), ("B", "C")), (("Y",), ("A", "C")), (("Z",), ("A", "B")),
                   (("X", "Y"), ("C",)), (("Y", "Z"), ("A",)), (("X", "Z"), ("B",)))


def _pr(a: int, b: int, s: int, t: int) -> Fraction:
    return Fraction(1, 2) if (a ^ b) == (s & t) else Fraction(0)


def prbox_bilocal_strategy() -> PostSelectedFamily:
    """Two PR boxes; the middle party routes B into one box, chains the output
    into the other, and outputs both box outputs as ``Y = 2*y1 + y2``."""
    members = {}
    for A, B, C in product((0, 1), repeat=3):
        mass = {}
        for x, y1, y2, z in product((0, 1), repeat=4):
            # route 0: B into box 1, its output into box 2
            p0 = _pr(x, y1, A, B) * _pr(y2, z, y1, C)
            # route 1: B into box 2, its output into box 1
            p1 = _pr(y2, z, B, C) * _pr(x, y1, A, y2)
            p = (p0 + p1) / 2
            if p:
                key = (x, 2 * y1 + y2, z)
                mass[key] = mass.get(key, 0) + p
        members[(str(A), str(B), str(C))] = ObservedDistribution(
            (("X", 2), ("Y", 4), ("Z", 2)), mass)
    pivots = (("A", ("0", "1")), ("B", ("0", "1")), ("C", ("0", "1")))
    return PostSelectedFamily(pivots, members, _bilocal_labels(), _BILOCAL_SHARED)


SINGLET_TOLERANCE_BITS = 200


def _sin2(delta: mpmath.mpf) -> Fraction:
    v = mpmath.sin(delta) ** 2
    return Fraction(int(mpmath.nint(v * 2 ** SINGLET_TOLERANCE_BITS)), 2 ** SINGLET_TOLERANCE_BITS)


def singlet_pair(s: Fraction) -> dict:
    """Outcome pmf on a singlet measured at angles differing by delta, where
    ``s`` approximates sin^2(delta): equal outcomes with s/2, unequal (1-s)/2."""
    return {(0, 0): s / 2, (1, 1): s / 2, (0, 1): (1 - s) / 2, (1, 0): (1 - s) / 2}


def singlet_angles(x):
    return {"X": (x, 3 * x), "Z": (0, 2 * x), "Y1": (0, 2 * x)}


def singlet_bilocal_strategy(x=0.1) -> PostSelectedFamily:
    """Two singlets measured in the rotated bases ``cos t|0> + sin t|1>``.

    Y measures its half of the first singlet at 0 (B=0) or 2x (B=1), then its
    half of the second at (2*y0 + 1)*x; ``Y = 2*y0 + y1``.
    """
    with mpmath.workprec(SINGLET_TOLERANCE_BITS + 64):
        xv = mpmath.mpf(x) if not isinstance(x, Fraction) else mpmath.mpf(x.numerator) / x.denominator
        ang = singlet_angles(xv)
        members = {}
        for A, B, C in product((0, 1), repeat=3):
            p1 = singlet_pair(_sin2(ang["X"][A] - ang["Y1"][B]))
            second = {y0: singlet_pair(_sin2((2 * y0 + 1) * xv - ang["Z"][C])) for y0 in (0, 1)}
            mass = {}
            for (xo, y0), pa in p1.items():
                for (y1, z), pb in second[y0].items():
                    mass[(xo, 2 * y0 + y1, z)] = pa * pb
            members[(str(A), str(B), str(C))] = ObservedDistribution(
                (("X", 2), ("Y", 4), ("Z", 2)), mass,
                tolerance=Fraction(1, 2 ** (SINGLET_TOLERANCE_BITS - 2)))
    pivots = (("A", ("0", "1")), ("B", ("0", "1")), ("C", ("0", "1")))
    return PostSelectedFamily(pivots, members, _bilocal_labels(), _BILOCAL_SHARED)


def product_uniform(variables) -> ObservedDistribution:
    """Independent uniform variables; ``variables`` is ``[(name, card)]``."""
    variables = tuple(variables)
    total = 1
    for _, c in variables:
        total *= c
    mass = {k: Fraction(1, total) for k in product(*[range(c) for _, c in variables])}
    return ObservedDistribution(variables, mass)


def uniform_family(structure, card: int = 2):
    """Independent uniform bits on every observed node, per pivot branch."""
    obs = sorted({structure.base(n) for n in structure.observed})
    pivots = structure.pivots()
    if not pivots:
        return product_uniform([(n, card) for n in obs])
    values = {}
    for _, base, asg in structure.alternatives:
        for p, v in asg:
            values.setdefault(p, set()).add(v)
    piv = tuple((p, tuple(sorted(values[p]))) for p in sorted(values))
    names = [n for n in obs if n not in values]
    dist = product_uniform([(n, card) for n in names])
    members = {k: dist for k in product(*[v for _, v in piv])}
    labels = {n: (structure.base(n), dict(structure.assignment(n))) for n in structure.observed}
    return PostSelectedFamily(piv, members, labels)


# -- file format ----------------------------------------------------------------

_DECL = re.compile(r"^([A-Za-z][A-Za-z0-9_]*):(\d+)$")


def _decls(tokens, line_no, what):
    out = []
    for t in tokens:
        m = _DECL.match(t)
        if not m or int(m.group(2)) < 1:
            raise ParseError(f"bad {what} declaration {t!r}", line_no, 1)
        out.append((m.group(1), int(m.group(2))))
    return out


def parse_distribution(text: str):
    """Parse the ``vars``/``pivot`` text format (see module docs)."""
    variables = pivots = None
    rows = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.split()
        if head[0] == "vars":
            variables = _decls(head[1:], no, "variable")
            continue
        if head[0] == "pivot":
            pivots = _decls(head[1:], no, "pivot")
            continue
        if variables is None:
            raise ParseError("probability line before 'vars' header", no, 1)
        left, bar, right = line.partition("|")
        if not bar:
            left, right = "", line
        ptoks = left.split()
        otoks = right.split()
        if len(otoks) != len(variables) + 1:
            raise ParseError(f"expected {len(variables)} outcomes and a probability", no, 1)
        if len(ptoks) != len(pivots or ()):
            raise ParseError(f"expected {len(pivots or ())} pivot values", no, 1)
        try:
            outcome = tuple(int(t) for t in otoks[:-1])
            prob = Fraction(otoks[-1])
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"malformed outcome or probability in {line!r}", no, 1) from None
        rows.append((tuple(ptoks), outcome, prob, no))
    if variables is None:
        raise ParseError("missing 'vars' header", 1, 1)
    groups: dict = {}
    for pv, outcome, prob, no in rows:
        for v, (name, card) in zip(outcome, variables):
            if not 0 <= v < card:
                raise ParseError(f"outcome {v} outside alphabet of {name}", no, 1)
        groups.setdefault(pv, {})
        groups[pv][outcome] = groups[pv].get(outcome, 0) + prob
    if not pivots:
        return ObservedDistribution(tuple(variables), groups.get((), {}))
    values = [sorted({pv[i] for pv in groups}, key=_value_key) for i in range(len(pivots))]
    for (name, card), vals in zip(pivots, values):
        if len(vals) > card:
            raise ParseError(f"pivot {name} has more than {card} values", 1, 1)
    members = {pv: ObservedDistribution(tuple(variables), m) for pv, m in groups.items()}
    piv = tuple((name, tuple(vals)) for (name, _), vals in zip(pivots, values))
    return PostSelectedFamily(piv, members)


def _value_key(v):
    return (0, int(v), v) if v.lstrip("-").isdigit() else (1, 0, v)


def format_distribution(source) -> str:
    lines = []
    if isinstance(source, ObservedDistribution):
        lines.append("vars " + " ".join(f"{n}:{c}" for n, c in source.variables))
        for k in sorted(source.mass):
            lines.append(" ".join(map(str, k)) + f" {source.mass[k]}")
        return "\n".join(lines) + "\n"
    first = next(iter(source.members.values()))
    lines.append("vars " + " ".join(f"{n}:{c}" for n, c in first.variables))
    lines.append("pivot " + " ".join(f"{p}:{len(v)}" for p, v in source.pivots))
    for key in product(*[v for _, v in source.pivots]):
        dist = source.members[key]
        for k in sorted(dist.mass):
            p = dist.mass[k]
            lines.append(" ".join(key) + " | " + " ".join(map(str, k)) + f" {p.numerator}/{p.denominator}")
    return "\n".join(lines) + "\n"
