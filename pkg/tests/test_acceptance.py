"""Acceptance criteria for the O(3) example, one test per criterion.

Each test records a PASS/FAIL line; the lines are printed as they happen
(visible with ``-s``) and again in the terminal summary.
"""
import contextlib
import math

import numpy as np
import pytest
import sympy as sp

from orbitstrata.example_o3 import consistency_failures, reynolds_failures, verify_bundle
from orbitstrata.invariant_rewrite import gradient_gram
from orbitstrata.pmatrix import NotDivisible, check_divisibility, classify_point, verify_relation
from orbitstrata.polyring import parse_poly
from orbitstrata.phase_min import Potential, minimize_on_stratum, parse_grid, phase_scan
from orbitstrata.strata_param import (delta_region, relations_vanish, roundtrip_classify,
                                      sample_delta, sampling_equivalence, verify_factorization)

import oracles

RESULTS: list[str] = []

SINGULAR = ("S1", "S2A", "S2B", "S3", "S4")


@contextlib.contextmanager
def criterion(number: int, title: str):
    try:
        yield
    except BaseException:
        RESULTS.append(f"FAIL  criterion {number:2d}: {title}")
        print(RESULTS[-1])
        raise
    RESULTS.append(f"PASS  criterion {number:2d}: {title}")
    print(RESULTS[-1])


def lmat(param, rows):
    return [[parse_poly(str(e), param.lvars) for e in row] for row in rows]


# 1 ------------------------------------------------------------------------------

def test_c01_pmatrix_reproduction(pm):
    with criterion(1, "P-matrix reproduces all 15 printed entries exactly"):
        printed = oracles.printed_pmatrix()
        entries = [(a, b) for a in range(5) for b in range(a, 5)]
        assert len(entries) == 15
        bad = [f"P{a + 1}{b + 1}" for a, b in entries
               if not oracles.sym_equal(oracles.to_sympy(pm.hat[a][b]), printed[a, b])]
        assert not bad, bad
        p = oracles.PS
        d = (2, 2, 3, 3, 4)
        for a in range(5):
            assert oracles.to_sympy(pm.hat[0][a]) == 2 * d[a] * p[a]
        want55 = sp.Rational(4, 3) * (p[2] * p[3] + p[3] ** 2 + 9 * p[0] * p[4])
        assert oracles.sym_equal(oracles.to_sympy(pm.hat[4][4]), sp.expand(want55))


# 2 ------------------------------------------------------------------------------

def test_c02_consistency_identity(bundle):
    with criterion(2, "P(p(x)) equals the gradient Gram matrix at 1000 rational points"):
        # the exact Gram matrix used below must itself match the sympy one
        gram = gradient_gram(list(bundle.mib.polys))
        ref = oracles.gradient_gram()
        assert all(oracles.sym_equal(oracles.to_sympy(gram[a][b]), ref[a, b])
                   for a in range(5) for b in range(a, 5))
        assert consistency_failures(bundle, 1000, seed=2024) == []


# 3 ------------------------------------------------------------------------------

def test_c03_active_factor_divides_det(bundle, pm):
    with criterion(3, "det P is exactly divisible by the active factor"):
        try:
            quotient = check_divisibility(pm.det(), bundle.active)
        except NotDivisible as exc:
            pytest.fail(f"nonzero remainder {exc.remainder}")
        assert not quotient.is_zero()
        assert oracles.sym_equal(oracles.to_sympy(bundle.active), oracles.printed_active_factor())
        det = sp.expand(oracles.printed_pmatrix().det(method="berkowitz"))
        _, rem = sp.div(det, oracles.printed_active_factor(), *oracles.PS[:5])
        assert rem == 0


# 4 ------------------------------------------------------------------------------

def sympy_factorization_residual(param):
    """P(phi) - J Lambda J^T computed in sympy from the printed P-matrix."""
    lam = sp.symbols(" ".join(param.lvars.names) + ",") if param.rank_target else ()
    phi = [oracles.to_sympy(f) for f in param.phi]
    subs = dict(zip(oracles.PS[:5], phi))
    lhs = oracles.printed_pmatrix().subs(subs, simultaneous=True)
    if not lam:
        return lhs.applyfunc(sp.expand)
    jac = sp.Matrix(5, len(lam), lambda a, k: sp.diff(phi[a], lam[k]))
    big = sp.Matrix([[oracles.to_sympy(e) for e in row] for row in param.lambda_hat])
    return (lhs - jac * big * jac.T).applyfunc(sp.expand)


def test_c04_factorization_identity(bundle, pm):
    with criterion(4, "P(phi) = J Lambda J^T and A(phi) = 0 on S0 and the five singular strata"):
        for label in ("S0",) + SINGULAR:
            param = bundle.param(label)
            v = verify_factorization(param, pm, active=bundle.active)
            assert v.holds, (label, v.first_bad)
            assert v.active_vanishes is True, label
            assert sympy_factorization_residual(param).is_zero_matrix, label
            a_phi = oracles.printed_active_factor().subs(
                dict(zip(oracles.PS[:5], (oracles.to_sympy(f) for f in param.phi))),
                simultaneous=True)
            assert oracles.sym_equal(a_phi, 0), label


# 5 ------------------------------------------------------------------------------

PRINTED_LAMBDA = {
    "S4": [[1, 0, 0, 0], [0, "4*l2", 0, "2*l4"], [0, 0, "4*l3", "4*l4"],
           [0, "2*l4", "4*l4", "4*l3^2 + 16*l2*l3"]],
    "S3": [[1, 0, 0], [0, "4*l2", 0], [0, 0, "4*l3"]],
    "S2A": [[1, 0], [0, "4*l2"]],
    "S2B": [["4*l1", "6*l2"], ["6*l2", "9*l1^2"]],
    "S1": [[1]],
}

PRINTED_DELTA = {
    "S4": ["l2", "l3", "4*l2*l3^2 - l4^2"],
    "S3": ["l2", "l3"],
    "S2A": ["l2"],
    "S2B": ["l1", "l1^3 - l2^2"],
}


def test_c05_lambda_and_delta(bundle):
    with criterion(5, "Lambda matrices exact; Delta sampling-equivalent on 10^4 points"):
        for label, rows in PRINTED_LAMBDA.items():
            param = bundle.param(label)
            assert param.lambda_hat == lmat(param, rows), label
        for label, conds in PRINTED_DELTA.items():
            param = bundle.param(label)
            printed = [parse_poly(c, param.lvars) for c in conds]
            dis = sampling_equivalence(param.delta_ineqs, printed, param.rank_target,
                                       count=10_000, seed=5)
            assert dis == [], (label, len(dis))
        assert bundle.param("S1").delta_ineqs == []


# 6 ------------------------------------------------------------------------------

def numeric_rank(jac, tol=1e-9):
    s = np.linalg.svd(np.asarray(jac, dtype=float), compute_uv=False)
    return int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0


def test_c06_jacobian_rank(bundle):
    with criterion(6, "rank J = l at 1000 Delta samples per stratum; S1 drops only at l1 = 0"):
        for label in SINGULAR:
            param = bundle.param(label)
            res = sample_delta(param, 1000, seed=6)
            assert len(res.points) == 1000 and not res.rank_deficient, label
            ranks = {numeric_rank(param.jacobian_float(lam)) for lam in res.points}
            assert ranks == {param.rank_target}, (label, ranks)
        s1 = bundle.param("S1")
        region = delta_region(s1)
        for k in range(-20, 21):
            want = 0 if k == 0 else 1
            assert numeric_rank(s1.jacobian_float((k / 10,))) == want
            assert region.jacobian_rank((k / 10,)) == want


# 7 ------------------------------------------------------------------------------

def test_c07_relation_table(bundle):
    with criterion(7, "relations table: equalities vanish under phi, inequalities hold on Delta"):
        for label in SINGULAR:
            param = bundle.param(label)
            rule = next(r for r in bundle.rules if r.label == label)
            assert all(r.is_zero() for r in relations_vanish(rule.equalities, param,
                                                             bundle.mib.names)), label
            subs = dict(zip(oracles.PS[:5], (oracles.to_sympy(f) for f in param.phi)))
            for eq in rule.equalities:
                assert oracles.sym_equal(oracles.to_sympy(eq).subs(subs, simultaneous=True), 0)
            pts = sample_delta(param, 1000, seed=7).points
            phis = np.array([param.phi_float(lam) for lam in pts])
            for g in rule.inequalities:
                assert np.all(g.to_numpy()(phis) > 0), (label, str(g))


# 8 ------------------------------------------------------------------------------

def test_c08_roundtrip(bundle, pm):
    with criterion(8, "phi(lambda) classifies back to its stratum; typical points too"):
        for label in bundle.strata:
            param = bundle.param(label)
            v = roundtrip_classify(param, pm, count=200, seed=8, rules=bundle.rules)
            assert v.ok, (label, v.failure)
            spec = bundle.stratum(label)
            t = classify_point(pm, bundle.mib.evaluate_float(spec.typical_point),
                               rules=bundle.rules)
            assert t.psd and t.rank == spec.expected_dim and t.stratum_label == label


# 9 ------------------------------------------------------------------------------

def test_c09_so3_variant(bundle):
    with criterion(9, "243 p6^2 + A vanishes on p(x); six SO(3) strata with S4 absorbed"):
        assert verify_relation(bundle.so3_relation, bundle.mib6).holds
        inv = oracles.tensor_invariants()
        assert sp.expand(243 * inv[5] ** 2
                         + oracles.substitute_invariants(oracles.printed_active_factor())) == 0
        rep = verify_bundle(bundle, only=["lattice"])
        count = next(i for i in rep.items if i.name == "SO(3) stratum count is 6")
        assert count.passed, count.detail
        pm6 = bundle.pmatrix_so3()
        v = classify_point(pm6, bundle.mib6.evaluate_float(bundle.stratum("S4").typical_point))
        assert v.psd and v.rank == 5


# 10 -----------------------------------------------------------------------------

def test_c10_reynolds_cross_check(bundle):
    with criterion(10, "Reynolds averages for |K| = 2, 4, 6 rewrite in the lambda basis"):
        orders = {}
        for label, spec in bundle.strata.items():
            if spec.extra.get("k_order") in (2, 4, 6):
                order, bad = reynolds_failures(spec)
                assert order == spec.extra["k_order"], label
                assert bad == [], (label, bad)
                orders[label] = order
        assert set(orders.values()) == {2, 4, 6}


# 11 -----------------------------------------------------------------------------

def grid_minimum(pot, param, box=(-5.0, 5.0), step=1e-2, final=1e-6):
    """Brute-force minimum over a grid of Delta ∩ box ∩ {p1 <= R^2}, zoomed around the best cell."""
    l = param.rank_target
    phi = [f.to_numpy() for f in param.phi]
    ineqs = [g.to_numpy() for g in param.delta_ineqs]
    energy = pot.expr.to_numpy()
    r2 = pot.radius ** 2

    def best_on(axes):
        mesh = np.stack([a.ravel() for a in np.meshgrid(*axes, indexing="ij")], axis=1)
        ok = np.ones(len(mesh), dtype=bool)
        for g in ineqs:
            ok &= g(mesh) > 0
        p = np.column_stack([np.broadcast_to(f(mesh), (len(mesh),)) for f in phi])
        ok &= p[:, 0] <= r2
        vals = np.where(ok, energy(p), np.inf)
        k = int(np.argmin(vals))
        return float(vals[k]), mesh[k]

    val, x = best_on([np.arange(box[0], box[1] + step / 2, step)] * l)
    h = step
    while h > final:
        zoom = [np.clip(np.linspace(c - 2 * h, c + 2 * h, 201), *box) for c in x]
        v, y = best_on(zoom)
        if v <= val:
            val, x = v, y
        h /= 50
    return val


GRID_CASES = [
    ("S1", "p1^2 - 2*p1 + 1/5*p3"),
    ("S2A", "p1^2 - p1 - 2*p2 + 1/5*p3 + 1/5*p4 + 1/10*p5"),
    ("S2B", "p1^2 - p1 + 1/10*p3"),
]


def test_c11_optimizer(bundle):
    with criterion(11, "optimizer within 1e-4 of a grid search; scaling keeps the winner"):
        for label, text in GRID_CASES:
            pot = Potential.from_text(text, bundle.pvars)
            param = bundle.param(label)
            got = minimize_on_stratum(pot, param, seeds=8).value
            want = grid_minimum(pot, param)
            assert math.isfinite(want) and abs(got - want) <= 1e-4, (label, got, want)

        pot = Potential.from_text("a1*p1 + p1^2 - 2*p2 + 1/5*p3 + 1/5*p4 + 1/10*p5",
                                  bundle.pvars)
        # crosses the S2A -> S0 transition at a1 = 2 without landing on it
        grid = parse_grid("a1=-0.75:3.75:10")
        labels = ["S0", "S1", "S2A", "S2B", "S3", "S4"]
        base = phase_scan(pot, bundle, grid, seeds=6, labels=labels)
        winners = [r.winner for r in base]
        assert all(winners) and len(set(winners)) > 1
        for c in (0.01, 3, 250):
            scaled = phase_scan(pot.scaled(c), bundle, grid, seeds=6, labels=labels)
            assert [r.winner for r in scaled] == winners, c
