"""Ground states of invariant potentials, found stratum by stratum.

A potential is a polynomial in the basis invariants p1..pq with symbolic
parameters a1, a2, ...  On each stratum it is pulled back through the
parametrization phi and minimized over the region Delta by multistart
Nelder-Mead.  ``phase_scan`` repeats this over a parameter grid and names the
winning stratum at every grid point.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import minimize

from .pmatrix import PMatrix, classify_point, spectral_rank
from .polyring import Poly, VarSet, parse_poly
from .strata_param import SamplingExhausted, StratumParam, _box_bounds, sample_delta

_PARAM_RE = re.compile(r"\ba(\d+)\b")

DEFAULT_SEEDS = 32
DEFAULT_BOX = (-5.0, 5.0)
DEFAULT_RADIUS = 10.0


class EmptyRegion(RuntimeError):
    """No admissible starting point inside Delta and the radius cutoff."""


@dataclass
class Potential:
    """``expr`` lives over the basis variables followed by the parameters.

    ``radius`` is a physical cutoff p1 <= radius^2 that keeps unbounded
    potentials from running off to infinity.
    """

    expr: Poly
    pvars: VarSet
    params: tuple[str, ...] = ()
    radius: float = DEFAULT_RADIUS
    _pulled: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_text(cls, text: str, pvars: VarSet, radius: float = DEFAULT_RADIUS) -> "Potential":
        params = tuple(sorted({m.group(0) for m in _PARAM_RE.finditer(text)},
                              key=lambda s: int(s[1:])))
        clash = set(params) & set(pvars.names)
        if clash:
            raise ValueError(f"parameter names clash with basis variables: {sorted(clash)}")
        allv = VarSet(pvars.names + params, pvars.weights + (1,) * len(params))
        return cls(parse_poly(text, allv), pvars, params, radius)

    def scaled(self, c) -> "Potential":
        return Potential(self.expr.scale(c), self.pvars, self.params, self.radius)

    def values(self, assignment: Mapping[str, float] | None) -> list[float]:
        assignment = dict(assignment or {})
        missing = [a for a in self.params if a not in assignment]
        if missing:
            raise KeyError(f"no value for parameter(s) {missing}")
        extra = set(assignment) - set(self.params)
        if extra:
            raise KeyError(f"unknown parameter(s) {sorted(extra)}")
        return [float(assignment[a]) for a in self.params]

    def at_p(self, p, assignment=None) -> float:
        return self.expr.to_float_function()(list(map(float, p)) + self.values(assignment))

    def pulled_back(self, param: StratumParam):
        """pot(phi(lambda), a) compiled as f(lambda + a)."""
        key = param.label
        if key not in self._pulled:
            lv = param.lvars
            both = VarSet(lv.names + self.params, lv.weights + (1,) * len(self.params))
            images = {n: f.relabel(both) for n, f in zip(self.pvars.names, param.phi)}
            for a in self.params:
                images[a] = Poly.var(both, a)
            self._pulled[key] = self.expr.subs(images, both).to_float_function()
        return self._pulled[key]


@dataclass
class StratumMinimum:
    label: str
    value: float
    lam: tuple
    boundary: bool = False
    bordering: str | None = None
    evaluations: int = 0


@dataclass
class PhaseResult:
    params: dict
    minima: dict            # label -> StratumMinimum
    errors: dict            # label -> message, for strata without admissible points
    winner: str | None
    tie: tuple = ()
    margin: float = math.inf

    @property
    def value(self) -> float:
        return self.minima[self.winner].value if self.winner else math.nan


def _lambda_matrix_function(param: StratumParam):
    l = param.rank_target
    fns = [[param.lambda_hat[i][j].to_float_function() for j in range(i + 1)] for i in range(l)]

    def m(lam):
        out = np.empty((l, l))
        for i, row in enumerate(fns):
            for j, fn in enumerate(row):
                out[i, j] = out[j, i] = fn(lam)
        return out
    return m


def _near_boundary(param: StratumParam, lam, tol: float) -> bool:
    if param.rank_target == 0:
        return False
    lam = list(lam)
    m = np.array([[e.to_float_function()(lam) for e in row] for row in param.lambda_hat])
    if spectral_rank(m, tol)[1] < param.rank_target:
        return True
    jac = param.jacobian_float(lam)
    s = np.linalg.svd(jac, compute_uv=False)
    return bool(s.size and s[-1] <= tol * max(s[0], 1e-300))


def minimize_on_stratum(pot: Potential, param: StratumParam, assignment=None,
                        seeds: int = DEFAULT_SEEDS, box=DEFAULT_BOX, seed: int = 0,
                        pm: PMatrix | None = None, rules=(), boundary_tol: float = 1e-6,
                        xatol: float = 1e-10, maxfev: int = 10000,
                        refine: int = 4, restarts: int = 8) -> StratumMinimum:
    """Least value of pot∘phi over Delta ∩ box ∩ {p1 <= R^2}.

    Constraints enter as a quadratic exterior penalty tightened in three
    rounds: every start, then the best few, then the best one, restarted up
    to ``restarts`` times while it keeps improving.  A minimizer
    that ends on or just outside the edge of Delta is returned with
    ``boundary=True``; when ``pm`` is supplied the bordering stratum is
    suggested by classifying phi(lambda*).
    """
    a = pot.values(assignment)
    f = pot.pulled_back(param)
    l = param.rank_target
    r2 = pot.radius ** 2
    if l == 0:
        return StratumMinimum(param.label, float(f(a)), ())

    p1 = param.phi[0].to_float_function()
    lam_matrix = _lambda_matrix_function(param)
    ineqs = [g.to_float_function() for g in param.delta_ineqs]
    # Sylvester minors are cheap for small Lambda; large ones are slower than a Cholesky
    by_minors = sum(len(g.terms) for g in param.delta_ineqs) <= 40
    try:
        pool = sample_delta(param, 4 * seeds, box=box, seed=seed).points
    except SamplingExhausted as exc:
        raise EmptyRegion(str(exc)) from None
    starts = [lam for lam in pool if p1(list(lam)) <= r2][:seeds]
    if not starts:
        raise EmptyRegion(f"{param.label}: no sampled point of Delta with p1 <= {r2:g}")

    lo, hi = _box_bounds(box, l)

    def violation(lam):
        # squared distance-like measure: radius, box, and the most negative
        # eigenvalue of the Lambda matrix (zero inside Delta)
        v = max(0.0, p1(lam) - r2) ** 2
        for x, a_, b_ in zip(lam, lo, hi):
            if x < a_:
                v += (a_ - x) ** 2
            elif x > b_:
                v += (x - b_) ** 2
        if by_minors:
            if all(g(lam) > 0 for g in ineqs):
                return v
            m = lam_matrix(lam)
        else:
            m = lam_matrix(lam)
            try:
                np.linalg.cholesky(m)
                return v
            except np.linalg.LinAlgError:
                pass
        return v + min(float(np.linalg.eigvalsh(m)[0]), 0.0) ** 2 + 1e-300

    def run(x0, mu, tol, ftol, cap=maxfev):
        def objective(v):
            lam = v.tolist()
            try:
                val = f(lam + a) + mu * violation(lam)
            except OverflowError:
                return math.inf
            return val if math.isfinite(val) else math.inf
        return minimize(objective, np.asarray(x0, dtype=float), method="Nelder-Mead",
                        options={"xatol": tol, "fatol": ftol, "maxfev": cap,
                                 "adaptive": l > 2})

    # coarse pass from every start, then tighten the penalty on the best few
    fev = 0
    coarse = []
    for s in starts:
        res = run(s, 1e3, 1e-4, 1e-8, min(maxfev, 400 * (l + 1)))
        fev += int(res.nfev)
        coarse.append(res)
    coarse.sort(key=lambda r: r.fun)
    best = None
    for res in coarse[:refine]:
        res = run(res.x, 1e6, 1e-8, 1e-12)
        fev += int(res.nfev)
        if best is None or res.fun < best.fun:
            best = res
    # restarting a collapsed simplex lets it follow narrow valleys and cusps
    for _ in range(restarts + 1):
        res = run(best.x, 1e9, xatol, 1e-14)
        fev += int(res.nfev)
        gain = best.fun - res.fun
        best = res if res.fun <= best.fun else best
        if gain <= 1e-12 * max(1.0, abs(best.fun)):
            break
    lam = tuple(float(v) for v in best.x)
    outside = violation(list(lam)) > 0
    boundary = outside or _near_boundary(param, lam, boundary_tol)
    bordering = None
    if boundary and pm is not None:
        p = param.phi_float(lam)
        # the limit point may sit a rounding error outside the orbit space
        p[np.abs(p) <= boundary_tol * max(1.0, float(np.abs(p).max()))] = 0.0
        v = classify_point(pm, p, tol=boundary_tol, rules=rules)
        bordering = v.stratum_label
    return StratumMinimum(param.label, float(f(list(lam) + a)), lam, boundary, bordering, fev)


def pick_winner(minima: Mapping[str, StratumMinimum], dims: Mapping[str, int],
                tol: float) -> tuple[str | None, tuple, float]:
    """Least interior value; near-equal values go to the lowest-dimensional stratum."""
    pool = [m for m in minima.values() if not m.boundary]
    if not pool:
        return None, (), math.inf
    best = min(m.value for m in pool)
    window = 10 * tol * max(1.0, abs(best))
    tied = [m.label for m in pool if m.value <= best + window]
    tied.sort(key=lambda lbl: (dims[lbl], lbl))
    winner = tied[0]
    others = [m.value for m in pool if m.label not in tied]
    margin = (min(others) - minima[winner].value) if others else math.inf
    return winner, tuple(tied) if len(tied) > 1 else (), margin


def phase_scan(pot: Potential, bundle, grid: Sequence[Mapping[str, float]],
               seeds: int = DEFAULT_SEEDS, seed: int = 0, tol: float = 1e-7,
               box=DEFAULT_BOX, labels: Sequence[str] | None = None) -> list[PhaseResult]:
    if not grid:
        raise ValueError("parameter grid is empty")
    labels = list(labels or bundle.strata)
    params = {lbl: bundle.param(lbl) for lbl in labels}
    dims = {lbl: params[lbl].rank_target for lbl in labels}
    pm = bundle.pmatrix()
    out = []
    for point in grid:
        minima, errors = {}, {}
        for lbl in labels:
            try:
                minima[lbl] = minimize_on_stratum(pot, params[lbl], point, seeds=seeds, box=box,
                                                  seed=seed, pm=pm, rules=bundle.rules)
            except EmptyRegion as exc:
                errors[lbl] = str(exc)
        winner, tie, margin = pick_winner(minima, dims, tol)
        out.append(PhaseResult(dict(point), minima, errors, winner, tie, margin))
    return out


def parse_grid(spec: str) -> list[dict]:
    """``"a1=-1:1:5,a2=0.5"`` -> cartesian product of start:stop:count ranges and constants."""
    axes = []
    for part in filter(None, (s.strip() for s in spec.split(","))):
        if "=" not in part:
            raise ValueError(f"grid axis {part!r} must look like name=start:stop:count")
        name, rng = (s.strip() for s in part.split("=", 1))
        if not _PARAM_RE.fullmatch(name):
            raise ValueError(f"grid names must be parameters a1, a2, ...; got {name!r}")
        bits = rng.split(":")
        if len(bits) == 1:
            vals = [float(bits[0])]
        elif len(bits) == 3:
            n = int(bits[2])
            if n < 1:
                raise ValueError(f"grid axis {name}: count must be positive")
            vals = np.linspace(float(bits[0]), float(bits[1]), n).tolist()
        else:
            raise ValueError(f"grid axis {part!r} must look like name=start:stop:count")
        axes.append((name, vals))
    if not axes:
        return [{}]
    names = [n for n, _ in axes]
    return [dict(zip(names, combo)) for combo in itertools.product(*(v for _, v in axes))]
