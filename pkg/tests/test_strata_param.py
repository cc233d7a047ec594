import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from orbitstrata.numfield import R3
from orbitstrata.pmatrix import classify_point
from orbitstrata.polyring import Poly, parse_poly
from orbitstrata.strata_param import (SamplingExhausted, build_lambda_matrix, build_phi,
                                      definite_minor_certificate, delta_region, jacobian,
                                      relations_vanish, roundtrip_classify, sample_delta,
                                      sampling_equivalence, typical_point_check,
                                      verify_factorization)

SINGULAR = ("S1", "S2A", "S2B", "S3", "S4")


def lp(param, text):
    return parse_poly(text, param.lvars)


def mat(param, rows):
    return [[lp(param, str(e)) for e in row] for row in rows]


# --- Lambda-hat -----------------------------------------------------------------

def test_lambda_matrix_examples(bundle):
    s4, s3, s2b = (bundle.param(k) for k in ("S4", "S3", "S2B"))
    assert build_lambda_matrix(s4.spec) == mat(s4, [[1, 0, 0, 0], [0, "4*l2", 0, "2*l4"],
                                                    [0, 0, "4*l3", "4*l4"],
                                                    [0, "2*l4", "4*l4", "4*l3^2 + 16*l2*l3"]])
    assert build_lambda_matrix(s3.spec) == mat(s3, [[1, 0, 0], [0, "4*l2", 0], [0, 0, "4*l3"]])
    assert build_lambda_matrix(s2b.spec) == mat(s2b, [["4*l1", "6*l2"], ["6*l2", "9*l1^2"]])


# --- phi --------------------------------------------------------------------------

def test_phi_examples(bundle):
    s4, s2b, s1 = (bundle.param(k) for k in ("S4", "S2B", "S1"))
    assert build_phi(s4.spec, bundle.mib)[3] == lp(s4, "r3*l1*l3 - 3/2*l4")
    assert build_phi(s2b.spec, bundle.mib) == [lp(s2b, t) for t in
                                               ("l1", "0", "-2*r3*l2", "0", "0")]
    assert build_phi(s1.spec, bundle.mib) == [lp(s1, t) for t in
                                              ("l1^2", "0", "-2*r3*l1^3", "0", "0")]


def test_jacobian_is_derivative_of_phi(bundle):
    for lbl in SINGULAR:
        p = bundle.param(lbl)
        assert p.jacobian == jacobian(p.phi, p.lvars)
        for a, f in enumerate(p.phi):
            for k, name in enumerate(p.lvars.names):
                assert p.jacobian[a][k] == f.diff(name)


# --- factorization ------------------------------------------------------------------

@pytest.mark.parametrize("label", ("S0",) + SINGULAR)
def test_factorization_holds(bundle, pm, label):
    v = verify_factorization(bundle.param(label), pm, active=bundle.active)
    assert v.holds and v.active_vanishes is True


def test_corrupted_phi_fails_at_2_2(bundle, pm):
    s4 = bundle.param("S4")
    phi = list(s4.phi)
    phi[1] = phi[1] + lp(s4, "l1^2")
    bad = type(s4)(s4.spec, s4.lvars, s4.lambda_hat, phi, s4.jacobian, s4.delta_ineqs)
    v = verify_factorization(bad, pm)
    assert not v and v.first_bad == (2, 2) and v.residual


# --- Delta ------------------------------------------------------------------------

PRINTED_DELTA = {
    "S4": ["l2", "l3", "4*l2*l3^2 - l4^2"],
    "S3": ["l3", "l2"],
    "S2A": ["l2"],
    "S2B": ["l1", "l1^3 - l2^2"],
    "S1": [],
}


@pytest.mark.parametrize("label", SINGULAR)
def test_delta_sampling_equivalent(bundle, label):
    p = bundle.param(label)
    region = delta_region(p)
    printed = [lp(p, t) for t in PRINTED_DELTA[label]]
    assert sampling_equivalence(region.inequalities, printed, p.rank_target,
                                count=4000, seed=2) == []


def test_delta_detects_a_wrong_region(bundle):
    p = bundle.param("S4")
    wrong = [lp(p, t) for t in ("l2", "l3", "l2*l3^2 - l4^2")]
    assert sampling_equivalence(delta_region(p).inequalities, wrong, 4, count=4000)


def test_sample_examples(bundle):
    s4 = bundle.param("S4")
    region = delta_region(s4)
    assert region.contains((1, 1, 2, 0))
    assert region.jacobian_rank((1, 1, 2, 0)) == 4

    s1 = bundle.param("S1")
    r1 = delta_region(s1)
    assert r1.jacobian_rank((0.0,)) == 0 and r1.jacobian_rank((0.3,)) == 1

    s3 = bundle.param("S3")
    res = sample_delta(s3, 200, seed=4)
    assert len(res.points) == 200 and not res.rank_deficient
    assert all(lam[1] > 0 and lam[2] > 0 for lam in res.points)


def test_sampling_is_reproducible(bundle):
    p = bundle.param("S2B")
    assert sample_delta(p, 20, seed=9).points == sample_delta(p, 20, seed=9).points


def test_sampling_exhausted(bundle):
    s2b = bundle.param("S2B")
    # l1 > 0 is impossible in this box
    with pytest.raises(SamplingExhausted):
        sample_delta(s2b, 5, box=[(-3, -1), (-1, 1)])
    with pytest.raises(ValueError):
        sample_delta(s2b, 5, box=(1, 1))


def test_minor_certificate(bundle):
    for lbl in ("S2A", "S2B", "S3"):
        p = bundle.param(lbl)
        pts = sample_delta(p, 200, seed=1).points
        assert definite_minor_certificate(p, pts) is not None
    # every 4x4 minor of the S4 Jacobian changes sign on Delta; rank rests on sampling there
    s4 = bundle.param("S4")
    assert definite_minor_certificate(s4, sample_delta(s4, 200, seed=1).points) is None


# --- roundtrip ---------------------------------------------------------------------

@pytest.mark.parametrize("label", ("S0",) + SINGULAR)
def test_roundtrip(bundle, pm, label):
    assert roundtrip_classify(bundle.param(label), pm, count=60, seed=3, rules=bundle.rules)


def test_s4_boundary_drops_rank(bundle, pm):
    s4 = bundle.param("S4")
    l2, l3 = 0.7, 1.3
    lam = (0.4, l2, l3, 2 * l3 * math.sqrt(l2))
    v = classify_point(pm, s4.phi_float(lam), rules=bundle.rules)
    assert v.psd and v.rank < 4


@pytest.mark.parametrize("label", ("S0",) + SINGULAR)
def test_typical_points(bundle, label):
    v = typical_point_check(bundle.param(label), bundle.mib)
    assert v.ok


def test_s1_typical_lambda(bundle):
    p = bundle.param("S1")
    assert p.lambda_of([1, 0, 0, 0, 0, 0, 0, 0]) == [1]
    assert [f.eval([1]) for f in p.phi] == [1, 0, -2 * R3, 0, 0]


# --- relation table ------------------------------------------------------------------

@pytest.mark.parametrize("label", SINGULAR)
def test_relation_equalities_vanish(bundle, label):
    rule = next(r for r in bundle.rules if r.label == label)
    assert all(r.is_zero() for r in relations_vanish(rule.equalities, bundle.param(label),
                                                     bundle.mib.names))


@given(st.floats(0.05, 2.5), st.floats(0.05, 2.5), st.floats(-2, 2), st.floats(-0.99, 0.99))
def test_s4_image_has_rank_four(bundle, pm, l2, l3, l1, t):
    lam = (l1, l2, l3, t * 2 * l3 * math.sqrt(l2))
    s4 = bundle.param("S4")
    v = classify_point(pm, s4.phi_float(lam), tol=1e-9)
    assert v.psd and v.rank == 4


def test_phi_of_s0_is_origin(bundle):
    p = bundle.param("S0")
    assert p.rank_target == 0
    assert all(isinstance(f, Poly) and f.is_zero() for f in p.phi)
    assert np.array_equal(p.phi_float(()), np.zeros(5))
