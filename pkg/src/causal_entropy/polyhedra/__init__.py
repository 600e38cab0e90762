"""Exact polyhedral computations: systems, LP, projection and symmetry."""

from ._backend import BACKEND
from .fme import Budget, BudgetExceeded, Stats, eliminate, remove_redundant
from .lp import (Feasible, Implication, Infeasible, contains_rows, equal_cones, implies,
                 lp_feasible, pinned_problem, verify, Undecided)
from .system import InequalitySystem, canonicalize, normalize

__all__ = [
    "BACKEND", "Budget", "BudgetExceeded", "Feasible", "Implication", "Infeasible",
    "InequalitySystem", "Stats", "canonicalize", "contains_rows", "eliminate", "equal_cones",
    "implies", "lp_feasible", "normalize", "pinned_problem", "remove_redundant", "verify", "Undecided",
]

from .io import TSVError, dumps as dump_tsv, loads as load_tsv  # noqa: E402
from .symmetry import InvalidGenerator, SymmetryGroup, orbit_classify, orbit_of  # noqa: E402

__all__ += ["InvalidGenerator", "SymmetryGroup", "TSVError", "dump_tsv", "load_tsv",
            "orbit_classify", "orbit_of"]
