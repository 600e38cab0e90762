"""Incompatibility certificates for observed entropy vectors."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .coexistence import EntropyVariable, Scenario, marginal_variables, scenario_variables
from .constraints import GenerationOptions, LinearConstraint, generate
from .distributions import Enclosure
from .graph import CausalStructure, parse_structure, serialize_structure
from .polyhedra import InequalitySystem, Infeasible, Undecided, lp_feasible, pinned_problem
from .polyhedra.lp import check_farkas


class DimensionMismatch(ValueError):
    pass


class NonEntropicPoint(ValueError):
    pass


class CertificateError(ValueError):
    pass


class Verdict(str, enum.Enum):
    COMPATIBLE = "Compatible"
    INCOMPATIBLE = "Incompatible"
    INCONCLUSIVE = "Inconclusive"

    @property
    def text(self) -> str:
        # compatibility of the entropic relaxation says nothing definite
        return "Inconclusive-Compatible" if self == Verdict.COMPATIBLE else self.value


@dataclass(frozen=True)
class CertRow:
    multiplier: Fraction
    relation: str  # ">=" or "="
    coefficients: tuple  # ((EntropyVariable, int), ...)
    rhs: Fraction
    provenance: str


@dataclass
class CertificationResult:
    verdict: Verdict
    certificate: object = None  # list[CertRow] or dict point
    pinned: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    structure: CausalStructure | None = None
    options: GenerationOptions | None = None

    @property
    def incompatible(self) -> bool:
        return self.verdict == Verdict.INCOMPATIBLE


def _as_enclosure(v) -> Enclosure:
    if isinstance(v, Enclosure):
        return v
    if isinstance(v, tuple) and len(v) == 2:
        return Enclosure(Fraction(v[0]), Fraction(v[1]))
    f = Fraction(v)
    return Enclosure(f, f)


def _normalize_point(structure, entropy_point) -> dict:
    expected = set(marginal_variables(structure))
    point = {}
    for k, v in entropy_point.items():
        key = EntropyVariable.parse(k) if isinstance(k, str) else k
        point[key] = _as_enclosure(v)
    got = set(point)
    if got != expected:
        missing = sorted(map(str, expected - got))[:5]
        extra = sorted(map(str, got - expected))[:5]
        raise DimensionMismatch(
            f"entropy point must cover the {len(expected)} marginal components; "
            f"missing {missing}, unexpected {extra}")
    return point


def observed_shannon_rows(structure):
    """Elemental Shannon inequalities for the observed variables of each branch."""
    rows = set()
    for branch in structure.branches():
        obs = sorted(n for n in structure.instance(branch) if not structure.is_latent(n))
        full = frozenset(obs)
        H = lambda s: EntropyVariable(tuple(sorted(s)))
        for x in obs:
            rest = full - {x}
            row = {H(full): 1}
            if rest:
                row[H(rest)] = -1
            rows.add(tuple(sorted(row.items(), key=lambda t: t[0].sort_key())))
        for x, y in combinations(obs, 2):
            others = sorted(full - {x, y})
            for k in range(len(others) + 1):
                for ks in combinations(others, k):
                    K = set(ks)
                    row = {}
                    for s, c in ((K | {x}, 1), (K | {y}, 1), (K | {x, y}, -1), (K, -1)):
                        if s:
                            row[H(s)] = row.get(H(s), 0) + c
                    rows.add(tuple(sorted(((v, c) for v, c in row.items() if c),
                                          key=lambda t: t[0].sort_key())))
    return sorted(rows, key=lambda r: [(v.sort_key(), c) for v, c in r])


def _box_max(row, point) -> Fraction:
    """Largest value of ``row . x`` over the enclosure box."""
    total = Fraction(0)
    for v, c in row:
        enc = point[v]
        total += c * (enc.upper if c > 0 else enc.lower)
    return total


def check_entropic(structure, point):
    for row in observed_shannon_rows(structure):
        if _box_max(row, point) < 0:
            desc = " ".join(f"{c:+d}{v}" for v, c in row)
            raise NonEntropicPoint(f"point violates the Shannon inequality {desc} >= 0")


def build_system(structure, options) -> InequalitySystem:
    cons = generate(structure, options)
    cols = scenario_variables(Scenario(structure, options.theory))
    return InequalitySystem.from_constraints(cons, cols)


def certify(structure: CausalStructure, options: GenerationOptions, entropy_point,
            exact_only: bool = False) -> CertificationResult:
    """Pin the marginal components to ``entropy_point`` (values or enclosures)
    and decide feasibility of the generated system over the whole box."""
    point = _normalize_point(structure, entropy_point)
    check_entropic(structure, point)
    system = build_system(structure, options)
    pins, bounds = [], []
    for v in sorted(point, key=lambda v: v.sort_key()):
        enc = point[v]
        if enc.exact:
            pins.append((v, enc.lower))
        else:
            bounds.append((v, enc.lower, enc.upper))
    notes = [f"families: {', '.join(sorted(f.value for f in options.families))}",
             f"{len(system.ineqs)} inequalities, {len(system.eqs)} equalities, "
             f"{system.width} components"]
    try:
        res = lp_feasible(system, pins, bounds, exact_only=exact_only)
    except Undecided as e:
        res = None
        notes.append(str(e))
    if res is None:
        return CertificationResult(Verdict.INCONCLUSIVE, None, point, notes, structure, options)
    if isinstance(res, Infeasible):
        rows = certificate_rows(system, pins, bounds, res)
        if not verify_rows(rows):
            raise CertificateError("internal error: Farkas certificate failed verification")
        return CertificationResult(Verdict.INCOMPATIBLE, rows, point, notes, structure, options)
    witness = dict(zip(system.columns, res.point))
    return CertificationResult(Verdict.COMPATIBLE, witness, point, notes, structure, options)


def certificate_rows(system, pins, bounds, res) -> list[CertRow]:
    p = pinned_problem(system, pins, bounds)
    cols = system.columns
    out = []
    for mult, row, rhs, lab in zip(res.ineq_multipliers, p.A, p.b, p.a_labels):
        if mult:
            coeffs = tuple((cols[j], v) for j, v in sorted(row.items()))
            out.append(CertRow(Fraction(mult), ">=", coeffs, Fraction(rhs), lab))
    for mult, row, rhs, lab in zip(res.eq_multipliers, p.E, p.d, p.e_labels):
        if mult:
            coeffs = tuple((cols[j], v) for j, v in sorted(row.items()))
            out.append(CertRow(Fraction(mult), "=", coeffs, Fraction(rhs), lab))
    return out


def verify_rows(rows: list[CertRow]) -> bool:
    """The multipliers combine the rows into ``0 >= c`` with ``c > 0``."""
    acc: dict = {}
    bound = Fraction(0)
    for r in rows:
        if r.relation == ">=" and r.multiplier < 0:
            return False
        for v, c in r.coefficients:
            acc[v] = acc.get(v, 0) + r.multiplier * c
        bound += r.multiplier * r.rhs
    return all(x == 0 for x in acc.values()) and bound > 0


def violated_inequalities(projected: InequalitySystem, entropy_point):
    """Rows of ``projected`` violated everywhere on the enclosure box.

    Returns ``[(row_dict, relation, slack)]`` sorted by slack, where ``slack``
    is the largest value of ``row . x`` over the box (negative means violated;
    for equalities the distance from zero is reported negatively).
    """
    point = {}
    for k, v in entropy_point.items():
        key = EntropyVariable.parse(k) if isinstance(k, str) else k
        point[key] = _as_enclosure(v)
    missing = [c for c in projected.columns if c not in point]
    if missing:
        raise DimensionMismatch(f"point lacks components {[str(m) for m in missing[:5]]}")
    out = []
    for coeffs, rhs in projected.ineqs:
        row = tuple((c, k) for c, k in zip(projected.columns, coeffs) if k)
        slack = _box_max(row, point) - rhs
        if slack < 0:
            out.append((dict(row), ">=", slack))
    for coeffs, rhs in projected.eqs:
        row = tuple((c, k) for c, k in zip(projected.columns, coeffs) if k)
        hi = _box_max(row, point) - rhs
        lo = -_box_max(tuple((c, -k) for c, k in row), point) - rhs
        if hi < 0:
            out.append((dict(row), "=", hi))
        elif lo > 0:
            out.append((dict(row), "=", -lo))
    out.sort(key=lambda t: t[2])
    return out


# -- certificate files ------------------------------------------------------------

def _fmt_row(coeffs):
    return " ".join(f"{c}*{v}" for v, c in coeffs)


def format_certificate(result: CertificationResult) -> str:
    if not result.incompatible:
        raise CertificateError("only Incompatible results carry a certificate")
    opts = result.options
    lines = ["causal-entropy certificate 1",
             f"theory {opts.theory.value}",
             f"variant {opts.quantum_variant.value}",
             "families " + ",".join(sorted(f.value for f in opts.families)),
             "structure-begin"]
    lines += serialize_structure(result.structure).rstrip("\n").splitlines()
    lines.append("structure-end")
    for r in result.certificate:
        lines.append(f"row\t{r.multiplier}\t{r.relation}\t{r.rhs}\t{_fmt_row(r.coefficients)}"
                     f"\t# {r.provenance}")
    return "\n".join(lines) + "\n"


def parse_certificate(text: str):
    lines = text.splitlines()
    if not lines or not lines[0].startswith("causal-entropy certificate"):
        raise CertificateError("not a certificate file")
    meta, struct, rows = {}, [], []
    in_struct = False
    for ln in lines[1:]:
        if in_struct:
            if ln == "structure-end":
                in_struct = False
            else:
                struct.append(ln)
            continue
        if ln == "structure-begin":
            in_struct = True
        elif ln.startswith("row\t"):
            body, _, prov = ln.partition("\t# ")
            parts = body.split("\t")
            if len(parts) != 5:
                raise CertificateError(f"malformed row line: {ln!r}")
            _, mult, rel, rhs, coeffs = parts
            terms = []
            for tok in coeffs.split(" "):
                c, _, v = tok.partition("*")
                terms.append((EntropyVariable.parse(v), int(c)))
            try:
                rows.append(CertRow(Fraction(mult), rel, tuple(terms), Fraction(rhs), prov))
            except (ValueError, ZeroDivisionError) as e:
                raise CertificateError(str(e)) from None
        elif ln.strip():
            key, _, val = ln.partition(" ")
            meta[key] = val
    try:
        structure = parse_structure("\n".join(struct) + "\n")
    except Exception as e:
        raise CertificateError(f"embedded structure invalid: {e}") from None
    opts = GenerationOptions(theory=meta.get("theory", "gpt"),
                             quantum_variant=meta.get("variant", "weak_monotonicity"),
                             enabled_families=[f for f in meta.get("families", "").split(",") if f])
    return structure, opts, rows


def verify_certificate(text: str) -> tuple[bool, str]:
    """Re-check a certificate: every constraint row must be generated for the
    embedded structure and theory, and the multipliers must combine the rows
    into a contradiction."""
    try:
        structure, opts, rows = parse_certificate(text)
    except (CertificateError, ValueError) as e:
        return False, f"unreadable certificate: {e}"
    generated = {c.key for c in generate(structure, opts)}
    for r in rows:
        if r.provenance.startswith(("pin ", "bound ")):
            if len(r.coefficients) != 1 or abs(r.coefficients[0][1]) != 1:
                return False, f"malformed pin row: {r.provenance}"
            continue
        if r.rhs != 0:
            return False, f"constraint row with nonzero offset: {r.provenance}"
        lc = LinearConstraint.make(dict(r.coefficients), r.relation)
        if lc is None or lc.key not in generated:
            return False, f"row not among generated constraints: {r.provenance}"
    if not verify_rows(rows):
        return False, "multipliers do not combine into a contradiction"
    return True, f"valid: {len(rows)} rows combine to a contradiction"
