"""P-matrices: Gram matrices of invariant gradients written in the invariants.

Also hosts point classification by rank and semidefiniteness, exact
divisibility of det(P̂) by a boundary factor, and relation checks for
non-coregular bases.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .group_rep import OrthRep, orbit_invariance_check, random_rational_point
from .invariant_rewrite import Rewriter, gradient_gram
from .numfield import FieldElem
from .polyring import NotDivisible, Poly, VarSet, abs_term_scale, format_poly, poly_divide

__all__ = [
    "MIB", "PMatrix", "StratumRule", "StratumVerdict", "RelationVerdict",
    "NotDivisible", "build_pmatrix", "check_divisibility", "classify_point",
    "verify_relation", "table_report", "table_records",
]

RANK_FLOOR = 1e-12


@dataclass
class MIB:
    """An integrity basis: named homogeneous invariant polynomials over one VarSet."""

    names: tuple[str, ...]
    polys: tuple[Poly, ...]

    def __post_init__(self):
        self.names = tuple(self.names)
        self.polys = tuple(self.polys)
        if len(self.names) != len(self.polys):
            raise ValueError("one name per basis polynomial")

    @property
    def xvars(self) -> VarSet:
        return self.polys[0].vars

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(p.wdegree() for p in self.polys)

    @property
    def pvars(self) -> VarSet:
        return VarSet(self.names, self.degrees)

    def __len__(self):
        return len(self.polys)

    def evaluate(self, x) -> list[FieldElem]:
        return [p.eval(x) for p in self.polys]

    def evaluate_float(self, x) -> np.ndarray:
        fns = getattr(self, "_fns", None)
        if fns is None:
            fns = self._fns = [p.to_float_function() for p in self.polys]
        x = [float(v) for v in x]
        return np.array([f(x) for f in fns])

    def images(self) -> dict[str, Poly]:
        return dict(zip(self.names, self.polys))

    def subset(self, count: int) -> "MIB":
        return MIB(self.names[:count], self.polys[:count])


@dataclass
class PMatrix:
    basis: MIB
    hat: list  # q x q Polys over basis.pvars

    @property
    def degrees(self):
        return self.basis.degrees

    @property
    def q(self) -> int:
        return len(self.hat)

    @property
    def pvars(self) -> VarSet:
        return self.basis.pvars

    def at(self, p) -> list[list[FieldElem]]:
        return [[e.eval(p) for e in row] for row in self.hat]

    def at_float(self, p) -> np.ndarray:
        fns = getattr(self, "_fns", None)
        if fns is None:
            fns = self._fns = [[e.to_float_function() for e in row] for row in self.hat]
        p = [float(v) for v in p]
        return np.array([[f(p) for f in row] for row in fns])

    def det(self) -> Poly:
        d = getattr(self, "_det", None)
        if d is None:
            d = self._det = linalg.det(self.hat)
        return d

    def structure_issues(self) -> list[str]:
        """Homogeneity and Euler-identity violations (empty when all hold)."""
        issues = []
        deg = self.degrees
        pv = self.pvars
        for a in range(self.q):
            for b in range(self.q):
                e = self.hat[a][b]
                if e != self.hat[b][a]:
                    issues.append(f"not symmetric at ({a + 1},{b + 1})")
                if e and (not e.is_homogeneous() or e.wdegree() != deg[a] + deg[b] - 2):
                    issues.append(f"entry ({a + 1},{b + 1}) not homogeneous of degree "
                                  f"{deg[a] + deg[b] - 2}")
        x = self.basis.xvars
        if self.basis.polys[0] == sum((Poly.var(x, n) ** 2 for n in x.names), Poly.zero(x)):
            for a in range(self.q):
                want = Poly.var(pv, pv.names[a]).scale(2 * deg[a])
                if self.hat[0][a] != want:
                    issues.append(f"first-row Euler identity fails at entry {a + 1}")
        return issues


def build_pmatrix(rep: OrthRep | None, basis: MIB, invariance_trials: int = 10,
                  rewriter: Rewriter | None = None) -> PMatrix:
    """Gradient Gram matrix of ``basis`` rewritten in the basis variables.

    When ``rep`` is given each basis element is first checked for invariance.
    """
    if rep is not None:
        for name, p in zip(basis.names, basis.polys):
            v = orbit_invariance_check(rep, p, trials=invariance_trials)
            if not v:
                raise ValueError(f"basis element {name} is not invariant: {v.counterexample}")
    rw = rewriter or Rewriter(basis.names, basis.polys)
    gram = gradient_gram(list(basis.polys))
    return PMatrix(basis, rw.rewrite_matrix(gram))


def check_divisibility(det_p: Poly, factor: Poly) -> Poly:
    """Exact quotient det_p / factor; raises NotDivisible with the remainder."""
    q, r = poly_divide(det_p, factor)
    if r:
        raise NotDivisible(r)
    return q


# ------------------------------------------------------------ classification

@dataclass
class StratumRule:
    """Membership test for one stratum: rank plus polynomial (in)equalities in p."""

    label: str
    rank: int
    equalities: list = field(default_factory=list)
    inequalities: list = field(default_factory=list)

    def describe(self) -> tuple[list[str], list[str]]:
        return ([f"{format_poly(e)} = 0" for e in self.equalities],
                [f"{format_poly(e)} > 0" for e in self.inequalities])


@dataclass
class StratumVerdict:
    point: tuple
    psd: bool
    rank: int
    on_Z: bool
    stratum_label: str | None
    eigenvalues: tuple = ()
    satisfied: tuple = ()

    @property
    def in_orbit_space(self) -> bool:
        return self.psd and self.on_Z

    def describe(self) -> str:
        if not self.psd:
            return "outside orbit space (P-matrix not positive semidefinite)"
        if not self.on_Z:
            return "outside orbit space (relations among invariants violated)"
        return f"{self.stratum_label or 'unlabelled'} (rank {self.rank})"


def _vanishes(f: Poly, p: Sequence[float], tol: float) -> bool:
    val = f.to_float_function()(p)
    scale = abs_term_scale(f, p)
    return abs(val) <= tol * max(scale, RANK_FLOOR) or abs(val) <= RANK_FLOOR


def _positive(f: Poly, p: Sequence[float], tol: float) -> bool:
    val = f.to_float_function()(p)
    scale = abs_term_scale(f, p)
    return val > tol * max(scale, RANK_FLOOR)


def spectral_rank(m: np.ndarray, tol: float) -> tuple[bool, int, np.ndarray]:
    """(psd, rank, eigenvalues) with the relative threshold tol * max|eig|."""
    ev = np.linalg.eigvalsh((m + m.T) / 2) if m.size else np.zeros(0)
    scale = float(np.max(np.abs(ev))) if ev.size else 0.0
    thr = max(tol * scale, RANK_FLOOR)
    psd = bool(ev.size == 0 or ev.min() >= -thr)
    return psd, int(np.sum(ev > thr)), ev


def classify_point(pm: PMatrix, point, relations: Sequence[Poly] = (),
                   tol: float = 1e-9, rules: Sequence[StratumRule] = ()) -> StratumVerdict:
    if tol <= 0:
        raise ValueError("tol must be positive")
    p = [float(v) for v in point]
    if len(p) != pm.q:
        raise ValueError(f"expected {pm.q} coordinates, got {len(p)}")
    psd, rk, ev = spectral_rank(pm.at_float(p), tol)
    on_z = all(_vanishes(r, p, tol) for r in relations)
    label = None
    satisfied: tuple = ()
    if psd and on_z:
        for rule in rules:
            if rule.rank != rk:
                continue
            if all(_vanishes(e, p, tol) for e in rule.equalities) and \
                    all(_positive(g, p, tol) for g in rule.inequalities):
                label = rule.label
                satisfied = tuple(format_poly(e) for e in rule.equalities)
                break
    return StratumVerdict(tuple(p), psd, rk, on_z, label, tuple(ev.tolist()), satisfied)


# ---------------------------------------------------------------- relations

@dataclass
class RelationVerdict:
    holds: bool
    symbolic: bool
    trials: int
    counterexample: dict | None = None

    def __bool__(self):
        return self.holds


def verify_relation(relation: Poly, basis: MIB, trials: int = 10, seed: int = 0,
                    symbolic: bool = True) -> RelationVerdict:
    """Check relation(p(x)) == 0 at random rational x, then symbolically."""
    rng = random.Random(seed)
    n = len(basis.xvars)
    for t in range(trials):
        x = random_rational_point(rng, n)
        val = relation.eval(basis.evaluate(x))
        if not val.is_zero():
            return RelationVerdict(False, False, t + 1, {"x": x, "value": val})
    if not symbolic:
        return RelationVerdict(True, False, trials)
    images = {n: p for n, p in zip(basis.names, basis.polys) if n in relation.vars}
    composed = relation.subs(images, basis.xvars)
    if composed:
        return RelationVerdict(False, True, trials, {"residual": composed})
    return RelationVerdict(True, True, trials)


# ------------------------------------------------------------------ reports

def table_records(rules: Sequence[StratumRule]) -> list[dict]:
    out = []
    for r in rules:
        eqs, ineqs = r.describe()
        out.append({"label": r.label, "rank": r.rank, "equalities": eqs,
                    "inequalities": ineqs})
    return out


def table_report(rules: Sequence[StratumRule]) -> str:
    recs = table_records(rules)
    width = max((len(r["label"]) for r in recs), default=5)
    lines = [f"{'label':<{width}}  rank  relations"]
    for r in recs:
        rel = "; ".join(r["equalities"] + r["inequalities"]) or "(none)"
        lines.append(f"{r['label']:<{width}}  {r['rank']:>4}  {rel}")
    return "\n".join(lines)
