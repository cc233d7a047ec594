"""Rational parametrizations of orbit-space strata.

For a stratum with isotropy subgroup H, V is the fixed space of H and K the
group induced on V by the stabiliser of H.  With a basis λ of K-invariants
on V the restricted basis satisfies ``p|_V = φ∘λ``; the parametrization is
checked through ``P̂(φ(λ)) = J(λ) Λ̂(λ) J(λ)ᵀ`` and its domain is the region
where Λ̂ is positive definite and J has full rank.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .group_rep import (FixedSpace, OrthRep, group_closure, orbit_invariance_check,
                        random_rational_point)
from .invariant_rewrite import NoExpression, Rewriter, gradient_gram
from .numfield import FieldElem
from .pmatrix import MIB, PMatrix, StratumRule, classify_point
from .polyring import Poly, VarSet, format_poly

__all__ = [
    "StratumSpec", "StratumParam", "DeltaRegion", "SampleResult", "SamplingExhausted",
    "FactorizationVerdict", "build_lambda_matrix", "build_phi", "build_param",
    "jacobian", "verify_factorization", "delta_region", "sample_delta",
    "roundtrip_classify", "typical_point_check", "sampling_equivalence",
    "definite_minor_certificate", "lambda_is_coregular",
]


class SamplingExhausted(RuntimeError):
    pass


@dataclass
class StratumSpec:
    label: str
    n: int
    h_gens: list
    v_space: FixedSpace
    v_vars: VarSet
    k_gens: list
    lambda_names: tuple
    lambda_polys: tuple
    expected_dim: int
    typical_point: list
    k_elements: list | None = None
    rule: StratumRule | None = None
    reference: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def nu(self) -> int:
        return self.v_space.dim

    @property
    def l(self) -> int:
        return len(self.lambda_polys)

    @property
    def k_rep(self) -> OrthRep:
        return OrthRep(self.nu, self.k_gens, f"K({self.label})")

    @property
    def lambda_vars(self) -> VarSet:
        return VarSet(self.lambda_names, [max(p.wdegree(), 1) for p in self.lambda_polys])

    def k_group(self, limit: int = 5000) -> list | None:
        """Explicit K elements when K is finite (closure of the generators)."""
        if self.k_elements is not None:
            return self.k_elements
        try:
            return group_closure(self.k_gens, limit=limit, n=self.nu)
        except Exception:
            return None

    def consistency_issues(self, trials: int = 10) -> list[str]:
        issues = []
        x = [FieldElem.coerce(v) for v in self.typical_point]
        for h in self.h_gens:
            if linalg.mat_vec(h, x) != x:
                issues.append("typical point not fixed by H")
                break
        if not self.v_space.contains(x):
            issues.append("typical point not in V")
        if self.nu and self.k_gens:
            rep = self.k_rep
            for name, p in zip(self.lambda_names, self.lambda_polys):
                if not orbit_invariance_check(rep, p, trials=trials):
                    issues.append(f"{name} not invariant under K")
        return issues


@dataclass
class StratumParam:
    spec: StratumSpec
    lvars: VarSet
    lambda_hat: list
    phi: list
    jacobian: list
    delta_ineqs: list
    coregular: bool = True

    @property
    def rank_target(self) -> int:
        return len(self.lvars)

    @property
    def label(self) -> str:
        return self.spec.label

    def phi_float(self, lam) -> np.ndarray:
        lam = [float(v) for v in lam]
        return np.array([p.to_float_function()(lam) for p in self.phi])

    def jacobian_float(self, lam) -> np.ndarray:
        lam = [float(v) for v in lam]
        return np.array([[e.to_float_function()(lam) for e in row] for row in self.jacobian]
                        ).reshape(len(self.phi), self.rank_target)

    def lambda_of(self, x) -> list[FieldElem]:
        """λ(v) for a point x of V (given in R^n coordinates)."""
        v = self.spec.v_space.project(x)
        return [p.eval(v) for p in self.spec.lambda_polys]


# ------------------------------------------------------------------- builders

def _rewriter(spec: StratumSpec) -> Rewriter | None:
    if not spec.l:
        return None
    return Rewriter(spec.lambda_names, list(spec.lambda_polys))


def build_lambda_matrix(spec: StratumSpec, rw: Rewriter | None = None) -> list:
    if not spec.l:
        return []
    rw = rw or _rewriter(spec)
    return rw.rewrite_matrix(gradient_gram(list(spec.lambda_polys)))


def restrict_basis(spec: StratumSpec, basis: MIB) -> list[Poly]:
    return [spec.v_space.restrict(p, spec.v_vars) for p in basis.polys]


def build_phi(spec: StratumSpec, basis: MIB, rw: Rewriter | None = None) -> list[Poly]:
    restricted = restrict_basis(spec, basis)
    if not spec.l:
        lv = VarSet(())
        out = []
        for name, r in zip(basis.names, restricted):
            if not r.is_constant():
                raise NoExpression(f"{name} restricted to V is not constant")
            out.append(Poly.const(lv, r.constant_term()))
        return out
    rw = rw or _rewriter(spec)
    out = []
    for name, r in zip(basis.names, restricted):
        try:
            out.append(rw.rewrite(r))
        except NoExpression as exc:
            raise NoExpression(f"{name}|V: {exc}", residual=exc.residual) from None
    return out


def jacobian(phi: Sequence[Poly], lvars: VarSet) -> list[list[Poly]]:
    return [[f.diff(n) for n in lvars.names] for f in phi]


def lambda_is_coregular(spec: StratumSpec, seed: int = 0) -> bool:
    """λ algebraically independent, tested by exact Jacobian rank at a random point."""
    if not spec.l:
        return True
    rng = random.Random(seed)
    v = random_rational_point(rng, spec.nu, den=7)
    jac = [[p.diff(n).eval(v) for n in spec.v_vars.names] for p in spec.lambda_polys]
    return linalg.rank(jac) == spec.l


def build_param(spec: StratumSpec, basis: MIB) -> StratumParam:
    rw = _rewriter(spec)
    lvars = rw.pvars if rw else VarSet(())
    lam_hat = build_lambda_matrix(spec, rw)
    phi = build_phi(spec, basis, rw)
    jac = jacobian(phi, lvars)
    param = StratumParam(spec, lvars, lam_hat, phi, jac, [], lambda_is_coregular(spec))
    param.delta_ineqs = delta_region(param).inequalities
    return param


# --------------------------------------------------------------- verification

@dataclass
class FactorizationVerdict:
    holds: bool
    active_vanishes: bool | None
    first_bad: tuple | None = None
    residual: Poly | None = None

    def __bool__(self):
        return self.holds and self.active_vanishes is not False


def compose_matrix(hat, phi: Sequence[Poly], basis_names, lvars: VarSet) -> list:
    images = dict(zip(basis_names, phi))
    return [[e.subs(images, lvars) if e else Poly.zero(lvars) for e in row] for row in hat]


def verify_factorization(param: StratumParam, pm: PMatrix,
                         active: Poly | None = None) -> FactorizationVerdict:
    lv = param.lvars
    lhs = compose_matrix(pm.hat, param.phi, pm.basis.names, lv)
    q = len(param.phi)
    if param.rank_target:
        jt = linalg.transpose(param.jacobian)
        rhs = linalg.mat_mul(linalg.mat_mul(param.jacobian, param.lambda_hat), jt)
    else:
        rhs = [[Poly.zero(lv)] * q for _ in range(q)]
    # diagonal first: a wrong phi_a shows up at (a, a) before anywhere else
    order = [(a, a) for a in range(q)] + [(a, b) for a in range(q) for b in range(q) if a != b]
    for a, b in order:
        d = lhs[a][b] - rhs[a][b]
        if d:
            return FactorizationVerdict(False, None, (a + 1, b + 1), d)
    active_ok = None
    if active is not None:
        composed = active.subs(dict(zip(pm.basis.names, param.phi)), lv)
        active_ok = composed.is_zero()
    return FactorizationVerdict(True, active_ok)


def relations_vanish(relations: Sequence[Poly], param: StratumParam, basis_names) -> list[Poly]:
    """Residuals of each relation under p = φ(λ) (all zero when the relations hold)."""
    images = dict(zip(basis_names, param.phi))
    return [r.subs({n: images[n] for n in r.vars.names}, param.lvars) for r in relations]


# ---------------------------------------------------------------------- Δ

@dataclass
class DeltaRegion:
    """{λ : every inequality > 0} intersected with {rank J(λ) = l}."""

    inequalities: list
    param: StratumParam
    rank_tol: float = 1e-9

    def _compiled(self):
        c = getattr(self, "_c", None)
        if c is None:
            c = self._c = [g.to_numpy() for g in self.inequalities]
        return c

    def contains_many(self, lam: np.ndarray) -> np.ndarray:
        lam = np.atleast_2d(np.asarray(lam, dtype=float))
        ok = np.ones(lam.shape[0], dtype=bool)
        for f in self._compiled():
            ok &= f(lam) > 0
        return ok

    def positivity(self, lam) -> bool:
        return bool(self.contains_many(np.asarray([lam], dtype=float))[0])

    def jacobian_rank(self, lam) -> int:
        j = self.param.jacobian_float(lam)
        if j.size == 0:
            return 0
        s = np.linalg.svd(j, compute_uv=False)
        if s[0] == 0:
            return 0
        return int(np.sum(s > self.rank_tol * s[0]))

    def rank_ok(self, lam) -> bool:
        return self.jacobian_rank(lam) == self.param.rank_target

    def contains(self, lam) -> bool:
        return self.positivity(lam) and self.rank_ok(lam)

    def describe(self) -> list[str]:
        return [f"{format_poly(g)} > 0" for g in self.inequalities] + \
            [f"rank J = {self.param.rank_target}"]


def normalise_condition(g: Poly) -> Poly | None:
    """Scale by 1/|leading coefficient|; None for a positive constant."""
    if g.is_zero():
        return g
    if g.is_constant():
        return None if g.constant_term().sign() > 0 else g
    _, lc = g.leading_term()
    s = lc if lc.sign() > 0 else -lc
    return g.scale(s.inverse())


def delta_region(param: StratumParam, rank_tol: float = 1e-9) -> DeltaRegion:
    ineqs = []
    for m in linalg.leading_principal_minors(param.lambda_hat):
        g = normalise_condition(m)
        if g is not None:
            ineqs.append(g)
    return DeltaRegion(ineqs, param, rank_tol)


@dataclass
class SampleResult:
    points: list
    rank_deficient: list
    attempts: int

    @property
    def acceptance(self) -> float:
        return (len(self.points) + len(self.rank_deficient)) / max(self.attempts, 1)


def sample_delta(param: StratumParam, count: int, box=(-3.0, 3.0), seed: int = 0,
                 region: DeltaRegion | None = None, batch: int = 4096,
                 min_rate: float = 1e-4) -> SampleResult:
    """Rejection-sample the Δ inequalities; rank-deficient points are kept apart."""
    l = param.rank_target
    region = region or delta_region(param)
    lo, hi = _box_bounds(box, l)
    if np.any(hi <= lo):
        raise ValueError("empty sampling box")
    rng = np.random.default_rng(seed)
    pts, bad = [], []
    attempts = 0
    if l == 0:
        return SampleResult([()] * count, [], count)
    while len(pts) < count:
        cand = rng.uniform(lo, hi, size=(batch, l))
        attempts += batch
        for lam in cand[region.contains_many(cand)]:
            lam = tuple(float(v) for v in lam)
            (pts if region.rank_ok(lam) else bad).append(lam)
            if len(pts) >= count:
                break
        if attempts >= 100000 and (len(pts) + len(bad)) / attempts < min_rate:
            raise SamplingExhausted(
                f"{param.label}: acceptance {len(pts) + len(bad)}/{attempts} below {min_rate}")
    return SampleResult(pts, bad, attempts)


def _box_bounds(box, l):
    box = np.asarray(box, dtype=float)
    if box.ndim == 1:
        lo = np.full(l, box[0])
        hi = np.full(l, box[1])
    else:
        lo, hi = box[:, 0], box[:, 1]
    return lo, hi


def sampling_equivalence(ineqs_a: Sequence[Poly], ineqs_b: Sequence[Poly], l: int,
                         count: int = 10000, box=(-3.0, 3.0), seed: int = 0) -> list:
    """Points of the box where {all a > 0} and {all b > 0} disagree."""
    rng = np.random.default_rng(seed)
    lo, hi = _box_bounds(box, l)
    pts = rng.uniform(lo, hi, size=(count, l))

    def region(ineqs):
        ok = np.ones(count, dtype=bool)
        for g in ineqs:
            ok &= g.to_numpy()(pts) > 0
        return ok

    return [tuple(p) for p in pts[region(ineqs_a) != region(ineqs_b)]]


def definite_minor_certificate(param: StratumParam, samples: Sequence) -> tuple | None:
    """Rows of an l×l minor of J that is a nonzero polynomial with constant sign on the samples."""
    l = param.rank_target
    if l == 0 or not samples:
        return None
    pts = np.asarray(samples, dtype=float)
    for rows in itertools.combinations(range(len(param.phi)), l):
        m = linalg.det([param.jacobian[r] for r in rows])
        if m.is_zero():
            continue
        vals = m.to_numpy()(pts)
        if np.all(vals > 0) or np.all(vals < 0):
            return rows
    return None


# ----------------------------------------------------------------- roundtrip

@dataclass
class RoundtripVerdict:
    ok: bool
    checked: int
    failure: dict | None = None

    def __bool__(self):
        return self.ok


def roundtrip_classify(param: StratumParam, pm: PMatrix, count: int = 100, seed: int = 0,
                       rules: Sequence[StratumRule] = (), tol: float = 1e-9,
                       samples: Sequence | None = None) -> RoundtripVerdict:
    if samples is None:
        samples = sample_delta(param, count, seed=seed).points
    want = param.spec.expected_dim
    for k, lam in enumerate(samples):
        p = param.phi_float(lam) if param.rank_target else \
            np.array([float(f.constant_term()) for f in param.phi])
        v = classify_point(pm, p, tol=tol, rules=rules)
        label_ok = not rules or v.stratum_label == param.label
        if not (v.psd and v.rank == want and label_ok):
            return RoundtripVerdict(False, k + 1, {"lambda": lam, "p": p.tolist(),
                                                   "rank": v.rank, "psd": v.psd,
                                                   "label": v.stratum_label})
    return RoundtripVerdict(True, len(samples))


@dataclass
class TypicalPointVerdict:
    ok: bool
    lam: list
    phi_matches: bool
    in_closure: bool


def typical_point_check(param: StratumParam, basis: MIB) -> TypicalPointVerdict:
    """φ(λ(v_t)) = p(x_t) exactly and every Δ condition is >= 0 at λ(v_t)."""
    x = param.spec.typical_point
    lam = param.lambda_of(x)
    p_direct = basis.evaluate(x)
    p_param = [f.eval(lam) for f in param.phi]
    phi_ok = p_direct == p_param
    closure = all(g.eval(lam).sign() >= 0 for g in param.delta_ineqs)
    return TypicalPointVerdict(phi_ok and closure, lam, phi_ok, closure)
