import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from orbitstrata.example_o3 import consistency_failures
from orbitstrata.numfield import R3
from orbitstrata.pmatrix import (MIB, NotDivisible, StratumRule, build_pmatrix,
                                 check_divisibility, classify_point, table_records,
                                 table_report, verify_relation)
from orbitstrata.polyring import Poly, VarSet, parse_poly

import oracles

x8 = st.lists(st.floats(-3, 3, allow_nan=False), min_size=8, max_size=8)


@pytest.fixture(scope="module")
def gram_numeric():
    return sp.lambdify([oracles.X], oracles.gradient_gram(), "numpy")


def pp(bundle, text):
    return parse_poly(text, bundle.pvars)


# --- build_pmatrix --------------------------------------------------------------

def test_printed_entries(bundle, pm):
    assert pm.hat[1][2].is_zero()
    assert pm.hat[3][3] == pp(bundle, "12*p2^2 + 12*p5")
    assert pm.hat[2][3] == pp(bundle, "-36*p1*p2 + 36*p2^2 + 18*p5")


def test_trivial_group_on_the_line():
    x = VarSet(["x"])
    pm = build_pmatrix(None, MIB(["p"], [Poly.var(x, "x")]))
    assert pm.hat == [[Poly.const(pm.pvars, 1)]]


def test_sixth_row(bundle):
    pm6 = bundle.pmatrix_so3()
    want = oracles.printed_sixth_row()
    for a in range(5):
        assert oracles.sym_equal(oracles.to_sympy(pm6.hat[a][5]), sp.sympify(want[a]))


def test_stored_matches_recomputed(bundle, pm):
    assert bundle.stored_pmatrix().hat == pm.hat


def test_structure(pm):
    assert pm.structure_issues() == []
    assert pm.degrees == (2, 2, 3, 3, 4)


def test_non_invariant_basis_is_rejected(bundle):
    polys = list(bundle.mib.polys)
    polys[1] = parse_poly("x6^2", bundle.xvars)
    with pytest.raises(ValueError):
        build_pmatrix(bundle.rep, MIB(bundle.mib.names, polys))


# --- divisibility ---------------------------------------------------------------

def test_divisibility_examples(bundle, pm):
    q = check_divisibility(pm.det(), bundle.active)
    assert not q.is_zero()
    assert q * bundle.active == pm.det()
    p1 = Poly.var(bundle.pvars, "p1")
    assert check_divisibility(p1 ** 2, p1) == p1
    with pytest.raises(NotDivisible):
        check_divisibility(p1 ** 2 + Poly.const(bundle.pvars, 1), p1)


def test_active_factor_as_printed(bundle):
    assert oracles.sym_equal(oracles.to_sympy(bundle.active), oracles.printed_active_factor())


# --- classification -------------------------------------------------------------

def test_classify_examples(bundle, pm):
    xt = [1, 1, 0, 0, 0, 0, 1, 1]
    pt = [float(v) for v in bundle.mib.evaluate(xt)]
    assert np.allclose(pt, [4, 2, 4 * math.sqrt(3), 2 * math.sqrt(3), 8])
    v = classify_point(pm, pt, rules=bundle.rules)
    assert v.psd and v.rank == 4 and v.stratum_label == "S4"

    v = classify_point(pm, [0] * 5, rules=bundle.rules)
    assert v.psd and v.rank == 0 and v.stratum_label == "S0"

    pt = [1, 0, float(-2 * R3), 0, 0]
    v = classify_point(pm, pt, rules=bundle.rules)
    assert v.psd and v.rank == 1 and v.stratum_label == "S1"
    assert set(v.satisfied) == {"p2", "p4", "p5", "12*p1^3 - p3^2"}


def test_classify_outside(pm):
    v = classify_point(pm, [-1, 0, 0, 0, 0])
    assert not v.psd and not v.in_orbit_space
    assert "outside" in v.describe()


def test_classify_input_errors(pm):
    with pytest.raises(ValueError):
        classify_point(pm, [0] * 4)
    with pytest.raises(ValueError):
        classify_point(pm, [0] * 5, tol=0)


def test_classify_with_relation(bundle):
    pm6 = bundle.pmatrix_so3()
    xt = [1, 1, 0, 1, 0, 1, 1, 1]
    pt = [float(v) for v in bundle.mib6.evaluate(xt)]
    assert classify_point(pm6, pt, relations=[bundle.so3_relation]).on_Z
    pt[5] += 1.0
    v = classify_point(pm6, pt, relations=[bundle.so3_relation])
    assert not v.on_Z and not v.in_orbit_space


@given(x8)
def test_image_points_are_psd(bundle, pm, gram_numeric, x):
    p = bundle.mib.evaluate_float(x)
    got = pm.at_float(p)
    want = np.array(gram_numeric(x), dtype=float)
    scale = max(1.0, np.abs(want).max())
    assert np.abs(got - want).max() <= 1e-9 * scale
    ev = np.linalg.eigvalsh(got)
    assert ev.min() >= -1e-9 * max(1.0, np.abs(ev).max())


def test_generic_rank_is_full(bundle, pm):
    rng = np.random.default_rng(5)
    for _ in range(50):
        x = rng.uniform(-3, 3, 8)
        v = classify_point(pm, bundle.mib.evaluate_float(x), rules=bundle.rules)
        assert v.rank == 5 and v.stratum_label == "S5"


def test_exact_consistency_sample(bundle):
    assert consistency_failures(bundle, trials=25, seed=11) == []


# --- relations ------------------------------------------------------------------

def test_relation_examples(bundle):
    v = verify_relation(bundle.so3_relation, bundle.mib6)
    assert v and v.symbolic
    p1 = Poly.var(bundle.pvars, "p1")
    assert verify_relation(p1 - p1, bundle.mib)
    bad = verify_relation(p1 - Poly.var(bundle.pvars, "p2"), bundle.mib)
    assert not bad and bad.counterexample is not None


def test_relation_matches_oracle(bundle):
    rel = oracles.to_sympy(bundle.so3_relation)
    assert oracles.substitute_invariants(rel, q=6) == 0


# --- reports --------------------------------------------------------------------

def test_table_report_lists_every_rule(bundle):
    text = table_report(bundle.rules)
    recs = table_records(bundle.rules)
    assert len(recs) == len(bundle.rules)
    for r in bundle.rules:
        assert r.label in text
    rule = StratumRule("T", 1, [Poly.var(bundle.pvars, "p2")], [Poly.var(bundle.pvars, "p1")])
    assert rule.describe() == (["p2 = 0"], ["p1 > 0"])
