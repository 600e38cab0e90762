import random
from fractions import Fraction

import numpy as np
import pytest

from causal_entropy.polyhedra import (BACKEND, Budget, BudgetExceeded, Feasible, Infeasible,
                                      InequalitySystem, InvalidGenerator, SymmetryGroup,
                                      TSVError, canonicalize, dump_tsv, eliminate, equal_cones,
                                      implies, load_tsv, lp_feasible, orbit_classify, orbit_of,
                                      remove_redundant, verify)
from causal_entropy.polyhedra import _kernels_py

from oracles import in_projection, random_cone, satisfies


def system(cols, ineqs=(), eqs=()):
    return InequalitySystem(tuple(cols), tuple(ineqs), tuple(eqs))


# -- elimination against the sampling oracle ---------------------------------------

@pytest.mark.parametrize("redundancy", ["lp", "syntactic"])
def test_fme_matches_lp_oracle(redundancy):
    rng = random.Random(2024 if redundancy == "lp" else 99)
    cols = ["a", "b", "c", "d"]
    for _ in range(200):
        ineqs = random_cone(rng)
        eqs = [((1, -1, 0, 0), 0)] if rng.random() < 0.2 else []
        sysm = system(cols, ineqs, eqs)
        keep = sorted(rng.sample(range(4), 2))
        out = eliminate(sysm, [cols[k] for k in keep], redundancy=redundancy)
        assert list(out.columns) == [cols[k] for k in keep]
        for _ in range(12):
            pt = [Fraction(rng.randint(-4, 4)) for _ in keep]
            expect = in_projection(ineqs, eqs, 4, keep, [float(v) for v in pt])
            assert satisfies(out.ineqs, out.eqs, pt) == expect, (ineqs, eqs, keep, pt)


def test_fme_small_example():
    # x - y >= 0, y >= 0  =>  x >= 0
    s = system(["x", "y"], [((1, -1), 0), ((0, 1), 0)])
    out = eliminate(s, ["x"])
    assert out.ineqs == (((1,), 0),)


def test_fme_equality_substitution():
    s = system(["x", "y", "z"], [((0, 1, 0), 0), ((0, 0, 1), 0)], [((1, -1, -1), 0)])
    out = eliminate(s, ["x"])
    assert out.ineqs == (((1,), 0),) and not out.eqs


def test_fme_budget():
    rng = random.Random(3)
    rows = [(tuple(rng.randint(-3, 3) for _ in range(6)), 0) for _ in range(40)]
    s = system([f"c{i}" for i in range(6)], rows)
    with pytest.raises(BudgetExceeded) as info:
        eliminate(s, ["c0"], budget=Budget(max_rows=5), redundancy="syntactic")
    assert info.value.partial.columns == ("c0",)


def test_fme_unknown_keep():
    with pytest.raises(KeyError):
        eliminate(system(["x"], [((1,), 0)]), ["q"])


def test_remove_redundant():
    s = system(["x", "y"], [((1, 0), 0), ((0, 1), 0), ((1, 1), 0), ((2, 1), 0)])
    assert set(remove_redundant(s).ineqs) == {((1, 0), 0), ((0, 1), 0)}


# -- compiled kernel against the NumPy fallback ----------------------------------

def test_kernel_backends_agree():
    if BACKEND != "cython":
        pytest.skip("compiled kernel not built")
    from causal_entropy.polyhedra import _kernels
    rng = np.random.default_rng(0)
    for _ in range(50):
        w = int(rng.integers(2, 8))
        pos = rng.integers(-9, 10, size=(int(rng.integers(1, 6)), w))
        neg = rng.integers(-9, 10, size=(int(rng.integers(1, 6)), w))
        pos[:, 0] = rng.integers(1, 5, size=len(pos))
        neg[:, 0] = -rng.integers(1, 5, size=len(neg))
        a, ok_a = _kernels.combine(np.ascontiguousarray(pos), np.ascontiguousarray(neg), 0, 2 ** 62)
        b, ok_b = _kernels_py.combine(pos, neg, 0, 2 ** 62)
        assert ok_a and ok_b
        assert np.array_equal(np.asarray(a), b)
        assert not np.asarray(a)[:, 0].any()


def test_kernel_overflow_flag():
    big = np.array([[2 ** 40, 1]], dtype=np.int64)
    neg = np.array([[-(2 ** 40), 1]], dtype=np.int64)
    _, ok = _kernels_py.combine(big, neg, 0, 2 ** 62)
    assert not ok
    if BACKEND == "cython":
        from causal_entropy.polyhedra import _kernels
        _, ok = _kernels.combine(big, neg, 0, 2 ** 62)
        assert not ok


def test_elimination_with_huge_coefficients_is_exact():
    k = 2 ** 40
    s = system(["x", "y", "z"], [((k, -k + 1, 0), 0), ((0, k, -1), 0), ((0, 0, 1), 0)])
    out = eliminate(s, ["x", "z"], redundancy="syntactic")
    assert implies(out, ((k * k, -(k - 1)), 0))


# -- exact LP ---------------------------------------------------------------------

def test_feasible_point_verified():
    s = system(["x", "y"], [((1, 0), 1), ((0, 1), 2), ((-1, -1), -10)])
    res = lp_feasible(s)
    assert isinstance(res, Feasible) and verify(s, res)
    assert all(isinstance(v, Fraction) for v in res.point)


def test_infeasible_has_farkas_certificate():
    s = system(["x"], [((1,), 1), ((-1,), 0)])
    res = lp_feasible(s)
    assert isinstance(res, Infeasible) and verify(s, res)


def test_pins_and_bounds():
    s = system(["x", "y"], [((1, -1), 0)])
    assert isinstance(lp_feasible(s, [("x", Fraction(1, 3))], [("y", 0, Fraction(1, 4))]), Feasible)
    res = lp_feasible(s, [("x", Fraction(1, 5))], [("y", Fraction(1, 4), 1)])
    assert isinstance(res, Infeasible)
    assert verify(s, res, [("x", Fraction(1, 5))], [("y", Fraction(1, 4), 1)])


def test_tampered_certificate_rejected():
    s = system(["x"], [((1,), 1), ((-1,), 0)])
    res = lp_feasible(s)
    bad = Infeasible(tuple(-v for v in res.ineq_multipliers), res.eq_multipliers)
    assert not verify(s, bad)


def test_implies_with_witness():
    s = system(["x", "y", "z"], [((1, -1, 0), 0), ((0, 1, -1), 0)])
    imp = implies(s, (1, 0, -1))
    assert imp
    y = imp.ineq_multipliers
    combo = [sum(y[i] * s.ineqs[i][0][j] for i in range(len(y))) for j in range(3)]
    assert combo == [1, 0, -1] and all(v >= 0 for v in y)
    assert not implies(s, (-1, 0, 1))


def test_implies_equality_candidate():
    from causal_entropy.coexistence import H
    from causal_entropy.constraints import EQ, LinearConstraint
    s = InequalitySystem((H("x"), H("y")), (), (((1, -1), 0),))
    assert implies(s, ((2, -2), 0))
    assert implies(s, ((-1, 1), 0))
    assert not implies(s, ((1, 0), 0))
    assert implies(s, LinearConstraint.make({H("x"): 1, H("y"): -1}, EQ))


def test_equal_cones():
    a = system(["x", "y"], [((1, 0), 0), ((0, 1), 0)])
    b = system(["x", "y"], [((1, 0), 0), ((0, 1), 0), ((1, 1), 0)])
    c = system(["x", "y"], [((1, 0), 0)])
    assert equal_cones(a, b)
    assert not equal_cones(a, c)
    assert equal_cones(a, b.reorder(["y", "x"]))


def test_implies_agrees_with_sampling():
    rng = random.Random(11)
    from scipy.optimize import linprog
    for _ in range(60):
        ineqs = random_cone(rng, width=3, rows=4)
        cand = tuple(rng.randint(-2, 2) for _ in range(3))
        if not any(cand):
            continue
        s = system(["a", "b", "c"], ineqs)
        A = [[-v for v in r] for r, _ in ineqs]
        res = linprog(cand, A_ub=A or None, b_ub=[0] * len(A) or None,
                      bounds=[(-1, 1)] * 3, method="highs")
        assert bool(implies(s, cand)) == (res.fun > -1e-9)


# -- canonical form, TSV, symmetry -----------------------------------------------

def test_canonicalize_removes_duplicates_and_scales():
    s = system(["x", "y"], [((2, 4), 0), ((1, 2), 0), ((0, 0), 0)])
    assert canonicalize(s).ineqs == (((1, 2), 0),)


def test_tsv_round_trip():
    s = system(["x", "y", "z"], [((1, -1, 0), 0), ((0, 2, -1), 0)], [((1, 1, -1), 0)])
    text = dump_tsv(s)
    assert text.splitlines()[0] == "x\ty\tz\trel"
    assert load_tsv(text) == s
    assert dump_tsv(load_tsv(text)) == text


@pytest.mark.parametrize("text", ["", "x\ty\trel\n1\t>=\n", "x\trel\na\t>=\n", "x\trel\n1\t<\n"])
def test_tsv_errors(text):
    with pytest.raises(TSVError):
        load_tsv(text)


def test_tsv_rejects_affine():
    with pytest.raises(TSVError):
        dump_tsv(system(["x"], [((1,), 1)]))


def test_symmetry_parse_and_format():
    g = SymmetryGroup.parse("# swap\n(a b)\n(c d e)\n\n")
    assert SymmetryGroup.parse(g.format()) == g
    with pytest.raises(InvalidGenerator):
        SymmetryGroup.parse("a b\n")
    with pytest.raises(InvalidGenerator):
        SymmetryGroup.parse("(a b)(a c)\n")


def test_orbits():
    from causal_entropy.coexistence import EntropyVariable as V
    cols = (V(("a",)), V(("b",)), V(("a", "b")))
    g = SymmetryGroup.parse("(a b)\n")
    s = InequalitySystem(cols, (((1, 0, 0), 0), ((0, 1, 0), 0), ((1, 1, -1), 0)))
    classes = orbit_classify(s, g)
    assert sorted(size for _, _, size in classes) == [1, 2]
    assert orbit_of(((1, 0, 0), 0), cols, g) == {((1, 0, 0), 0), ((0, 1, 0), 0)}
