"""Command line interface: ``causal-entropy <command> ...``.

Exit codes: 0 success (and Compatible/Inconclusive verdicts), 1 an
Incompatible verdict or a certificate that fails verification, 2 bad input
or an exhausted elimination budget.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

from . import __version__
from .catalog import NAMES, catalog
from .certification import (CertificateError, DimensionMismatch, NonEntropicPoint,
                            certify, format_certificate, parse_certificate,
                            verify_certificate)
from .coexistence import EntropyVariable, Scenario, Theory, marginal_variables, scenario_variables
from .constraints import GenerationOptions, IncompatibleFamily, generate
from .distributions import (NotNormalized, InconsistentMarginals, UnknownComponent, entropy_vector,
                            parse_distribution, prbox_bilocal_strategy, singlet_bilocal_strategy)
from .graph import StructureError, parse_structure, post_select, serialize_structure
from .polyhedra import (Budget, BudgetExceeded, InequalitySystem, InvalidGenerator, SymmetryGroup,
                        TSVError, dump_tsv, eliminate, load_tsv, orbit_classify)

KEEP_PRESETS = {
    "restricted7": ("X1", "X2", "Y1", "Y2", "Z", "X1 Y1", "X2 Y2"),
}


class UsageError(ValueError):
    pass


def _structure(arg: str):
    if arg in NAMES:
        return catalog(arg)
    path = Path(arg)
    if not path.exists():
        raise UsageError(f"{arg!r} is neither a catalog name ({', '.join(NAMES)}) nor a file")
    return parse_structure(path.read_text("utf-8"))


def _options(args) -> GenerationOptions:
    fams = None
    if getattr(args, "families", None):
        fams = [f.strip() for f in args.families.split(",") if f.strip()]
    return GenerationOptions(theory=args.theory, quantum_variant=args.quantum_variant,
                             include_non_shannon=getattr(args, "non_shannon", False),
                             enabled_families=fams)


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("CAUSAL_ENTROPY_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"CAUSAL_ENTROPY_THREADS must be an integer, got {env!r}") from None
    return 1


def _keep(structure, spec: str):
    if spec == "observed":
        return marginal_variables(structure)
    names = KEEP_PRESETS.get(spec)
    if names is None:
        names = [c.strip() for c in spec.split(",") if c.strip()]
    out = []
    for name in names:
        name = name.strip()
        if name.startswith("H("):
            out.append(EntropyVariable.parse(name))
        else:
            out.append(EntropyVariable(tuple(sorted(name.replace(",", " ").split()))))
    return out


def _budget(spec: str | None) -> Budget:
    if not spec:
        return Budget()
    rows, _, secs = spec.partition(",")
    try:
        return Budget(max_rows=int(rows) if rows else Budget.max_rows,
                      seconds=float(secs) if secs else None)
    except ValueError:
        raise UsageError(f"--budget expects ROWS[,SECONDS], got {spec!r}") from None


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, "utf-8")
    else:
        sys.stdout.write(text)


def _orbit_summary(system: InequalitySystem, group: SymmetryGroup) -> str:
    lines = ["# orbits: relation, size, representative"]
    for rel, (coeffs, _), size in orbit_classify(system, group):
        terms = " ".join(f"{c:+d}{v}" for v, c in zip(system.columns, coeffs) if c)
        lines.append(f"# {rel}\t{size}\t{terms}")
    return "\n".join(lines) + "\n"


# -- commands ------------------------------------------------------------------

def cmd_catalog(args) -> int:
    for name in NAMES:
        print(name)
    return 0


def cmd_variables(args) -> int:
    s = _structure(args.structure)
    cols = (marginal_variables(s) if args.marginal
            else scenario_variables(Scenario(s, Theory.parse(args.theory))))
    for c in cols:
        print(c)
    return 0


def cmd_postselect(args) -> int:
    s = _structure(args.structure)
    values = args.values
    if values.isdigit():
        values = int(values)
    else:
        values = [v for v in values.split(",") if v]
    new, mapping = post_select(s, args.pivot, values, naming=args.naming)
    sys.stdout.write(serialize_structure(new))
    return 0


def cmd_analyze(args) -> int:
    s = _structure(args.structure)
    opts = _options(args)
    keep = _keep(s, args.keep)
    cols = scenario_variables(Scenario(s, opts.theory))
    missing = [str(k) for k in keep if k not in set(cols)]
    if missing:
        raise UsageError(f"--keep components not in the entropy vector: {', '.join(missing)}")
    group = SymmetryGroup.parse(Path(args.symmetry).read_text("utf-8")) if args.symmetry else None
    t0 = time.monotonic()
    system = InequalitySystem.from_constraints(generate(s, opts), cols)
    status = 0
    try:
        out = eliminate(system, keep, budget=_budget(args.budget), redundancy=args.redundancy,
                        threads=_threads(args))
    except BudgetExceeded as e:
        out = e.partial
        status = 2
        print(f"warning: {e}; writing a sound but possibly incomplete system", file=sys.stderr)
    # column order follows --keep
    out = out.reorder(keep) if list(out.columns) != list(keep) else out
    header = ""
    if not args.deterministic:
        header = f"# elapsed {time.monotonic() - t0:.2f}s\n"
    text = header + dump_tsv(out)
    if group is not None:
        text += _orbit_summary(out, group)
    _emit(text, args.out)
    return status


def _entropy_source(spec: str):
    if spec == "prbox-bilocal":
        return prbox_bilocal_strategy()
    if spec.startswith("singlet-bilocal"):
        _, _, x = spec.partition(":")
        try:
            return singlet_bilocal_strategy(float(x) if x else 0.1)
        except ValueError:
            raise UsageError(f"bad angle in {spec!r}") from None
    path = Path(spec)
    if not path.exists():
        raise UsageError(f"{spec!r} is neither a builtin (prbox-bilocal, singlet-bilocal:x) nor a file")
    return parse_distribution(path.read_text("utf-8"))


def cmd_certify(args) -> int:
    s = _structure(args.structure)
    opts = _options(args)
    source = _entropy_source(args.distribution)
    point = entropy_vector(source, marginal_variables(s), precision=args.precision, structure=s)
    t0 = time.monotonic()
    res = certify(s, opts, point)
    print(f"verdict: {res.verdict.text}")
    if not args.deterministic:
        print(f"elapsed: {time.monotonic() - t0:.2f}s")
    for note in res.notes:
        print(f"note: {note}")
    if res.incompatible:
        Path(args.out).write_text(format_certificate(res), "utf-8")
        print(f"certificate: {args.out} ({len(res.certificate)} rows)")
        return 1
    return 0


def cmd_verify(args) -> int:
    text = Path(args.certificate).read_text("utf-8")
    parse_certificate(text)  # malformed files are input errors (exit 2)
    ok, message = verify_certificate(text)
    print(("valid: " if ok else "invalid: ") + message.removeprefix("valid: ").removeprefix("invalid: "))
    return 0 if ok else 1


def cmd_orbits(args) -> int:
    system = load_tsv(Path(args.matrix).read_text("utf-8"), EntropyVariable.parse)
    group = SymmetryGroup.parse(Path(args.generators).read_text("utf-8"))
    sys.stdout.write(_orbit_summary(system, group))
    return 0


# -- parser --------------------------------------------------------------------

def _add_theory(p, default="gpt"):
    p.add_argument("--theory", default=default,
                   help="classical, quantum, boxworld or gpt (default %(default)s)")
    p.add_argument("--quantum-variant", default="weak_monotonicity",
                   choices=["weak_monotonicity", "positive_conditional"])
    p.add_argument("--families", help="comma separated constraint families replacing the defaults")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="causal-entropy",
                                 description="Entropic constraints for causal structures.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--threads", type=int, default=None,
                    help="worker threads for redundancy checks (env CAUSAL_ENTROPY_THREADS)")
    ap.add_argument("--deterministic", action="store_true",
                    help="omit timing lines so repeated runs are byte-identical")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="project the constraint system onto observed entropies")
    p.add_argument("structure")
    _add_theory(p)
    p.add_argument("--keep", default="observed",
                   help="observed, restricted7, or a comma separated list like 'X1 Y1,Z'")
    p.add_argument("--non-shannon", action="store_true", help="add Zhang-Yeung instances")
    p.add_argument("--budget", help="ROWS[,SECONDS] limit for the elimination")
    p.add_argument("--redundancy", default="lp", choices=["lp", "syntactic"])
    p.add_argument("--symmetry", help="generator file; appends an orbit summary")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("certify", help="test an observed distribution against a structure")
    p.add_argument("structure")
    p.add_argument("distribution", help="prbox-bilocal, singlet-bilocal[:x] or a .dist file")
    _add_theory(p)
    p.add_argument("--precision", type=int, default=40, help="enclosure width 2^-bits")
    p.add_argument("--out", default="certificate.txt", help="certificate file on Incompatible")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("verify-certificate", help="re-check a certificate file")
    p.add_argument("certificate")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("catalog", help="list built-in structures")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("postselect", help="split descendants of a parentless observed node")
    p.add_argument("structure")
    p.add_argument("pivot")
    p.add_argument("--values", default="2", help="a count or comma separated labels")
    p.add_argument("--naming", default="{node}_{pivot}{value}")
    p.set_defaults(func=cmd_postselect)

    p = sub.add_parser("orbits", help="classify the rows of a matrix file under a symmetry group")
    p.add_argument("matrix")
    p.add_argument("generators")
    p.set_defaults(func=cmd_orbits)

    p = sub.add_parser("variables", help="list entropy vector components")
    p.add_argument("structure")
    p.add_argument("--theory", default="gpt")
    p.add_argument("--marginal", action="store_true", help="observed components only")
    p.set_defaults(func=cmd_variables)
    return ap


_INPUT_ERRORS = (UsageError, StructureError, IncompatibleFamily, TSVError, InvalidGenerator,
                 CertificateError, DimensionMismatch, NonEntropicPoint, NotNormalized,
                 InconsistentMarginals, UnknownComponent, OSError, ValueError, KeyError)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except _INPUT_ERRORS as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
