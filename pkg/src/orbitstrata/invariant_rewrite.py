"""Express an invariant polynomial as a polynomial in a given basis of invariants.

Given basis polynomials ``p_1..p_q`` (homogeneous, weighted degrees ``d_a``)
and a homogeneous target ``F`` of degree ``D``, every candidate monomial
``p^e`` with ``Σ e_a d_a = D`` is expanded in the original variables and the
coefficient-matching system is solved exactly by sparse column elimination.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .numfield import ONE, ZERO
from .polyring import Poly, VarSet


class NoExpression(ValueError):
    """The target is not a polynomial in the basis (up to the degree cap)."""

    def __init__(self, message: str, residual: Poly | None = None, entry=None):
        super().__init__(message)
        self.residual = residual
        self.entry = entry


@dataclass
class RewriteProblem:
    target: Poly
    basis: Sequence[tuple[str, Poly, int]]
    degree_cap: int | None = None


def weighted_exponents(weights: Sequence[int], total: int) -> list[tuple[int, ...]]:
    """All exponent vectors e >= 0 with Σ e_a w_a == total."""
    out = []
    q = len(weights)

    def rec(i, remaining, acc):
        if i == q:
            if remaining == 0:
                out.append(tuple(acc))
            return
        w = weights[i]
        for k in range(remaining // w + 1):
            acc.append(k)
            rec(i + 1, remaining - k * w, acc)
            acc.pop()

    rec(0, total, [])
    return out


def candidate_order(exps: list[tuple[int, ...]]) -> list[tuple[int, ...]]:
    """Higher powers of later basis elements first (fixes the particular solution)."""
    return sorted(exps, key=lambda e: tuple(reversed(e)), reverse=True)


class Rewriter:
    """Reusable rewriting engine for one basis; caches monomial expansions.

    ``names`` and ``polys`` give the basis; the result ring is a VarSet over
    ``names`` with the basis weighted degrees as weights.
    """

    def __init__(self, names: Sequence[str], polys: Sequence[Poly]):
        if len(names) != len(polys):
            raise ValueError("one name per basis polynomial")
        if not polys:
            raise ValueError("empty basis")
        self.xvars = polys[0].vars
        degrees = []
        for n, p in zip(names, polys):
            if p.vars != self.xvars:
                raise ValueError("basis polynomials must share one VarSet")
            if p.is_zero() or not p.is_homogeneous():
                raise ValueError(f"basis element {n} must be nonzero and homogeneous")
            degrees.append(p.wdegree())
        self.names = tuple(names)
        self.polys = list(polys)
        self.degrees = tuple(degrees)
        self.pvars = VarSet(self.names, self.degrees)
        self._cache: dict[tuple, Poly] = {(0,) * len(polys): Poly.const(self.xvars, 1)}
        self.last_unique: bool | None = None

    def expand(self, exp: tuple[int, ...]) -> Poly:
        """The x-polynomial p^exp, built recursively from cached lower powers."""
        got = self._cache.get(exp)
        if got is not None:
            return got
        k = max(i for i, e in enumerate(exp) if e)
        lower = exp[:k] + (exp[k] - 1,) + exp[k + 1:]
        res = self.expand(lower) * self.polys[k]
        self._cache[exp] = res
        return res

    def substitute(self, fhat: Poly) -> Poly:
        """fhat(p(x)) using the cached expansions."""
        acc = Poly.zero(self.xvars)
        for e, c in fhat.terms.items():
            acc = acc + self.expand(e).scale(c)
        return acc

    def rewrite(self, target: Poly, degree_cap: int | None = None) -> Poly:
        if target.vars != self.xvars:
            raise ValueError(f"target over {target.vars}, basis over {self.xvars}")
        result = Poly.zero(self.pvars)
        unique = True
        for deg, comp in target.homogeneous_components().items():
            if degree_cap is not None and deg > degree_cap:
                raise NoExpression(f"component of degree {deg} exceeds cap {degree_cap}",
                                   residual=comp)
            part, u = self._rewrite_homogeneous(comp, deg)
            unique = unique and u
            result = result + part
        self.last_unique = unique
        return result

    def _rewrite_homogeneous(self, target: Poly, deg: int) -> tuple[Poly, bool]:
        exps = candidate_order(weighted_exponents(self.degrees, deg))
        if not exps:
            raise NoExpression(f"no basis monomial has weighted degree {deg}", residual=target)
        # Echelon basis of column vectors: (pivot monomial, vector, combination)
        pivots: list[tuple[tuple, dict, dict]] = []
        key = self.xvars.order_key
        free = 0
        for j, e in enumerate(exps):
            vec = dict(self.expand(e).terms)
            comb = {j: ONE}
            vec, comb = _reduce(vec, comb, pivots)
            if not vec:
                free += 1
                continue
            pm = max(vec, key=key)
            inv = vec[pm].inverse()
            vec = {m: c * inv for m, c in vec.items()}
            comb = {i: c * inv for i, c in comb.items()}
            pivots.append((pm, vec, comb))
        rhs, sol = _reduce(dict(target.terms), {}, pivots, sign=-1)
        if rhs:
            residual = Poly(self.xvars, rhs)
            raise NoExpression("target is not a polynomial in the basis", residual=residual)
        terms = {exps[i]: c for i, c in sol.items() if not c.is_zero()}
        fhat = Poly(self.pvars, terms)
        check = self.substitute(fhat)
        if check != target:
            raise NoExpression("substitution check failed", residual=check - target)
        return fhat, free == 0

    def rewrite_matrix(self, m) -> list[list[Poly]]:
        n = len(m)
        out = [[None] * len(m[0]) for _ in range(n)]
        symmetric = all(len(row) == n for row in m) and all(
            m[i][j] == m[j][i] for i in range(n) for j in range(i))
        for i, row in enumerate(m):
            for j, entry in enumerate(row):
                if symmetric and j < i:
                    out[i][j] = out[j][i]
                    continue
                try:
                    out[i][j] = self.rewrite(entry)
                except NoExpression as exc:
                    raise NoExpression(f"entry ({i + 1},{j + 1}): {exc}",
                                       residual=exc.residual, entry=(i + 1, j + 1)) from None
        return out


def _reduce(vec: dict, comb: dict, pivots, sign: int = 1):
    """Eliminate pivot monomials from ``vec``; track the column combination.

    With ``sign=1`` the combination describes ``vec`` itself; with ``sign=-1``
    it accumulates the coefficients needed to produce the original ``vec``.
    """
    for pm, pvec, pcomb in pivots:
        c = vec.get(pm)
        if c is None:
            continue
        for m, v in pvec.items():
            nv = vec.get(m, ZERO) - c * v
            if nv.is_zero():
                vec.pop(m, None)
            else:
                vec[m] = nv
        for i, v in pcomb.items():
            comb[i] = comb.get(i, ZERO) - c * v * sign
    return vec, comb


def rewrite(problem: RewriteProblem) -> Poly:
    basis = list(problem.basis)
    names = [b[0] for b in basis]
    polys = [b[1] for b in basis]
    rw = Rewriter(names, polys)
    for (n, _, d), dd in zip(basis, rw.degrees):
        if d is not None and d != dd:
            raise ValueError(f"declared degree {d} of {n} differs from actual {dd}")
    return rw.rewrite(problem.target, problem.degree_cap)


def rewrite_matrix(m, names: Sequence[str], polys: Sequence[Poly]) -> list[list[Poly]]:
    return Rewriter(names, polys).rewrite_matrix(m)


def gradient_gram(polys: Sequence[Poly]) -> list[list[Poly]]:
    """Matrix of Euclidean inner products of gradients, Σ_i ∂_i p_a ∂_i p_b."""
    vs = polys[0].vars
    grads = [[p.diff(n) for n in vs.names] for p in polys]
    q = len(polys)
    out = [[None] * q for _ in range(q)]
    for a in range(q):
        for b in range(a, q):
            acc = Poly.zero(vs)
            for ga, gb in zip(grads[a], grads[b]):
                if ga and gb:
                    acc = acc + ga * gb
            out[a][b] = out[b][a] = acc
    return out
