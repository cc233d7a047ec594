import pytest
from hypothesis import given, strategies as st

from orbitstrata.invariant_rewrite import (NoExpression, RewriteProblem, Rewriter,
                                           gradient_gram, rewrite, rewrite_matrix,
                                           weighted_exponents)
from orbitstrata.numfield import FieldElem
from orbitstrata.polyring import Poly, VarSet, parse_poly


@pytest.fixture(scope="module")
def rw(bundle):
    return Rewriter(bundle.mib.names, bundle.mib.polys)


def p(bundle, text):
    return parse_poly(text, bundle.pvars)


# --- worked examples ---------------------------------------------------------

def test_sum_of_squares_is_p1(bundle, rw):
    x = bundle.xvars
    total = sum((Poly.var(x, n) ** 2 for n in x.names), Poly.zero(x))
    assert rw.rewrite(total) == p(bundle, "p1")


def test_gradient_norm_of_p2(bundle, rw):
    p2 = bundle.mib.polys[1]
    g = gradient_gram([p2])[0][0]
    assert g == parse_poly("4*x6^2 + 4*x7^2 + 4*x8^2", bundle.xvars)
    assert rw.rewrite(g) == p(bundle, "4*p2")


def test_degree_one_has_no_expression(bundle, rw):
    with pytest.raises(NoExpression):
        rw.rewrite(Poly.var(bundle.xvars, "x1"))


def test_non_invariant_reports_residual(bundle, rw):
    with pytest.raises(NoExpression) as exc:
        rw.rewrite(parse_poly("x1^2", bundle.xvars))
    assert exc.value.residual is not None and not exc.value.residual.is_zero()


def test_problem_front_end(bundle):
    x = bundle.xvars
    basis = [(n, f, None) for n, f in zip(bundle.mib.names, bundle.mib.polys)]
    total = sum((Poly.var(x, n) ** 2 for n in x.names), Poly.zero(x))
    assert rewrite(RewriteProblem(total, basis, 2)) == p(bundle, "p1")
    with pytest.raises(NoExpression):
        rewrite(RewriteProblem(total * total, basis, 2))
    bad = [(n, f, 7) for n, f, _ in basis]
    with pytest.raises(ValueError):
        rewrite(RewriteProblem(total, bad, 2))


def test_gram_matrix_entries(bundle):
    hat = rewrite_matrix(gradient_gram(bundle.mib.polys), bundle.mib.names, bundle.mib.polys)
    assert hat[2][2] == (p(bundle, "p1") - p(bundle, "p2")) ** 2 * p(bundle, "108")
    assert hat[3][3] == p(bundle, "12*p2^2 + 12*p5")
    assert hat[1][2].is_zero()
    assert hat[2][3] == p(bundle, "-36*p1*p2 + 36*p2^2 + 18*p5")
    for a in range(5):
        for b in range(5):
            assert hat[a][b] == hat[b][a]


def test_one_by_one_matrix(bundle):
    p1 = bundle.mib.polys[0]
    assert rewrite_matrix([[p1]], ["p1"], [p1]) == [[Poly.var(VarSet(["p1"], [2]), "p1")]]


def test_matrix_error_names_entry(bundle):
    x = bundle.xvars
    m = [[bundle.mib.polys[0], Poly.var(x, "x1")], [Poly.var(x, "x1"), bundle.mib.polys[0]]]
    with pytest.raises(NoExpression) as exc:
        rewrite_matrix(m, bundle.mib.names, bundle.mib.polys)
    assert exc.value.entry == (1, 2)


def test_lambda_entry_of_s4(bundle):
    lam = bundle.param("S4").lambda_hat
    lv = bundle.param("S4").lvars
    assert lam[3][3] == parse_poly("4*l3^2 + 16*l2*l3", lv)


def test_basis_elements_rewrite_to_themselves(bundle, rw):
    for name, f in zip(bundle.mib.names, bundle.mib.polys):
        assert rw.rewrite(f) == Poly.var(rw.pvars, name)


def test_coregular_solutions_are_unique(bundle, rw):
    for row in gradient_gram(bundle.mib.polys):
        for entry in row:
            rw.rewrite(entry)
            assert rw.last_unique


def test_non_coregular_choice_is_valid(bundle):
    rw6 = Rewriter(bundle.mib6.names, bundle.mib6.polys)
    # degree 12 admits p6^2 and its polynomial replacement; the roundtrip must hold either way
    p6 = bundle.mib6.polys[5]
    target = p6 * p6
    fhat = rw6.rewrite(target)
    assert rw6.substitute(fhat) == target
    assert rw6.last_unique is False
    assert fhat == Poly.var(rw6.pvars, "p6") ** 2


def test_weighted_exponents_count():
    # p-monomials of weighted degree 6 for degrees (2,2,3,3,4)
    exps = weighted_exponents((2, 2, 3, 3, 4), 6)
    assert len(exps) == len(set(exps))
    assert all(2 * a + 2 * b + 3 * c + 3 * d + 4 * e == 6 for a, b, c, d, e in exps)
    assert len(exps) == 9


# --- properties ---------------------------------------------------------------

DEGREES = (2, 2, 3, 3, 4)
small = st.integers(-3, 3).map(FieldElem)


@st.composite
def p_polys(draw):
    d = draw(st.integers(4, 8))
    exps = weighted_exponents(DEGREES, d)
    chosen = draw(st.lists(st.sampled_from(exps), min_size=1, max_size=4, unique=True))
    return d, {e: draw(small) for e in chosen}


@given(p_polys())
def test_roundtrip(rw, data):
    _, terms = data
    fhat = Poly(rw.pvars, {e: c for e, c in terms.items() if not c.is_zero()})
    assert rw.rewrite(rw.substitute(fhat)) == fhat

