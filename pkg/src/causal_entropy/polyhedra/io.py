"""Tab-separated matrix export and import.

Header: column names followed by a ``rel`` column; each line holds integer
coefficients and ``>=`` or ``=``.  A row ``v`` means ``v.H >= 0`` (or ``= 0``).
"""

from __future__ import annotations

from .system import InequalitySystem


class TSVError(ValueError):
    pass


def dumps(system: InequalitySystem) -> str:
    if not system.homogeneous:
        raise TSVError("matrix export covers homogeneous systems only")
    lines = ["\t".join([str(c) for c in system.columns] + ["rel"])]
    for rel, rows in ((">=", system.ineqs), ("=", system.eqs)):
        for coeffs, _ in rows:
            lines.append("\t".join([str(v) for v in coeffs] + [rel]))
    return "\n".join(lines) + "\n"


def loads(text: str, parse_column=None) -> InequalitySystem:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise TSVError("empty matrix file")
    header = lines[0].split("\t")
    has_rel = header[-1] == "rel"
    names = header[:-1] if has_rel else header
    cols = tuple(parse_column(h) if parse_column else h for h in names)
    ineqs, eqs = [], []
    for no, ln in enumerate(lines[1:], start=2):
        parts = ln.split("\t")
        rel = parts.pop() if has_rel else ">="
        if len(parts) != len(cols):
            raise TSVError(f"line {no}: expected {len(cols)} coefficients, got {len(parts)}")
        try:
            row = tuple(int(p) for p in parts)
        except ValueError as e:
            raise TSVError(f"line {no}: {e}") from None
        if rel == ">=":
            ineqs.append((row, 0))
        elif rel == "=":
            eqs.append((row, 0))
        else:
            raise TSVError(f"line {no}: unknown relation {rel!r}")
    return InequalitySystem(cols, tuple(ineqs), tuple(eqs))
