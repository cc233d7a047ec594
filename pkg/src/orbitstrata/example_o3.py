"""Built-in data set: O(3) and SO(3) acting on R^8 = Q (traceless symmetric) + P (vector).

``load_bundle()`` reads the shipped data files; ``verify_bundle()`` recomputes
every stored object and identity and returns a :class:`Report`.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from . import linalg
from .group_rep import (O3_TEST_GENERATORS, OrthRep, group_closure, lifted_rep,
                        orbit_invariance_check, random_rational_point, reynolds_avg)
from .invariant_rewrite import NoExpression, Rewriter, gradient_gram, weighted_exponents
from .numfield import R2, R3, FieldElem
from .pmatrix import (MIB, PMatrix, StratumRule, build_pmatrix, check_divisibility,
                      classify_point, spectral_rank, verify_relation)
from .polyring import NotDivisible, Poly, VarSet, format_poly, parse_poly
from .specfile import (SpecError, format_poly_entries, load_poly_file, load_stratum,
                       load_yaml, parse_matrix)
from .strata_param import (StratumParam, StratumSpec, build_param, delta_region,
                           definite_minor_certificate, relations_vanish,
                           roundtrip_classify, sample_delta, sampling_equivalence,
                           typical_point_check, verify_factorization)

DATA_DIR = Path(__file__).parent / "data" / "o3_r8"
STRATA_ORDER = ("S0", "S1", "S2A", "S2B", "S3", "S4", "S5")


class BundleCorrupted(ValueError):
    pass


# ---------------------------------------------------------------- tensors

def tensor_invariants(xvars: VarSet | None = None) -> dict[str, Poly]:
    """p1..p6 built directly from the Q, P tensor expressions."""
    xvars = xvars or VarSet.numbered("x", 8)
    x = [Poly.var(xvars, n) for n in xvars.names]
    s2, s3 = R2.inverse(), R3.inverse()
    q = [[x[0].scale(-2 * s3), x[2], x[3]],
         [x[2], x[0].scale(s3) - x[1], x[4]],
         [x[3], x[4], x[0].scale(s3) + x[1]]]
    q = [[e.scale(s2) for e in row] for row in q]
    p = x[5:8]
    q2 = linalg.mat_mul(q, q)
    q3 = linalg.mat_mul(q2, q)
    qp = linalg.mat_vec(q, p)
    q2p = linalg.mat_vec(q2, p)

    def dot(u, v):
        return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]

    def cross(a, b):
        return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]

    def trace(m):
        return m[0][0] + m[1][1] + m[2][2]

    return {
        "p1": trace(q2) + dot(p, p),
        "p2": dot(p, p),
        "p3": trace(q3).scale(6 * R2),
        "p4": dot(p, qp).scale(3 * R2),
        "p5": dot(p, q2p).scale(6),
        "p6": dot(cross(p, qp), q2p).scale(2 * R2),
    }


# ----------------------------------------------------------------- bundle

@dataclass
class Adjacency:
    source: str
    target: str
    conjugator: list | None = None


@dataclass
class ExampleBundle:
    path: Path
    name: str
    xvars: VarSet
    rep: OrthRep
    rep_so3: OrthRep
    mib: MIB
    mib6: MIB
    active: Poly
    stored_hat: list
    stored_so3_column: list
    so3_relation: Poly
    strata: dict
    adjacency: list
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def pvars(self) -> VarSet:
        return self.mib.pvars

    @property
    def rules(self) -> list[StratumRule]:
        return [s.rule for s in self.strata.values() if s.rule is not None]

    def stratum(self, label: str) -> StratumSpec:
        try:
            return self.strata[label]
        except KeyError:
            raise KeyError(f"unknown stratum {label!r}; known: {', '.join(self.strata)}") from None

    def rewriter(self) -> Rewriter:
        if "rw" not in self._cache:
            self._cache["rw"] = Rewriter(self.mib.names, self.mib.polys)
        return self._cache["rw"]

    def pmatrix(self) -> PMatrix:
        """The recomputed P-matrix (cached)."""
        if "pm" not in self._cache:
            self._cache["pm"] = build_pmatrix(None, self.mib, rewriter=self.rewriter())
        return self._cache["pm"]

    def stored_pmatrix(self) -> PMatrix:
        return PMatrix(self.mib, self.stored_hat)

    def pmatrix_so3(self) -> PMatrix:
        if "pm6" not in self._cache:
            self._cache["pm6"] = build_pmatrix(None, self.mib6)
        return self._cache["pm6"]

    def param(self, label: str) -> StratumParam:
        key = ("param", label)
        if key not in self._cache:
            self._cache[key] = build_param(self.stratum(label), self.mib)
        return self._cache[key]

    def params(self) -> list[StratumParam]:
        return [self.param(lbl) for lbl in self.strata]


def _entries(path: Path, names: Iterable[str], vars: VarSet) -> list[Poly]:
    got = load_poly_file(path, vars)
    out = []
    for n in names:
        if n not in got:
            raise SpecError(f"{path.name}: missing entry {n}")
        out.append(got[n])
    return out


def _matrix_from_entries(entries: dict, q: int, prefix="P") -> list:
    m = [[None] * q for _ in range(q)]
    for a in range(q):
        for b in range(a, q):
            key = f"{prefix}{a + 1}{b + 1}"
            if key not in entries:
                raise SpecError(f"missing P-matrix entry {key}")
            m[a][b] = m[b][a] = entries[key]
    return m


def load_bundle(path=None, sanity: bool = True) -> ExampleBundle:
    """Parse a bundle directory (default: the shipped O(3) data).

    Raises SpecError for malformed files and BundleCorrupted when a cheap
    sanity check (homogeneity, invariance, format roundtrip) fails.
    """
    root = Path(path) if path is not None else DATA_DIR
    if root.is_file():
        root = root.parent
    doc = load_yaml(root / "bundle.yaml")
    try:
        xvars = VarSet(doc["x_vars"])
        bnames = list(doc["basis"]["names"])
        polys = _entries(root / doc["basis"]["file"], bnames, xvars)
        mib = MIB(bnames, polys)
        pvars = mib.pvars
        act = doc["active"]
        active = _entries(root / act["file"], [act["name"]], pvars)[0]
        stored = load_poly_file(root / doc["pmatrix"], pvars)
        stored_hat = _matrix_from_entries(stored, len(mib))

        so3 = doc["so3"]
        extra_names = list(so3["basis"]["names"])
        extra = _entries(root / so3["basis"]["file"], extra_names, xvars)
        mib6 = MIB(bnames + extra_names, polys + extra)
        pvars6 = mib6.pvars
        col = load_poly_file(root / so3["pmatrix"], pvars6)
        q6 = len(mib6)
        column = []
        for a in range(q6):
            key = f"P{a + 1}{q6}"
            if key not in col:
                raise SpecError(f"missing entry {key}")
            column.append(col[key])
        rel = so3["relation"]
        relation = _entries(root / rel["file"], [rel["name"]], pvars6)[0]

        strata = {}
        for fname in doc["strata"]:
            spec = load_stratum(root / "strata" / fname, xvars, pvars, basis=mib,
                                named={act["name"]: active})
            if spec.label in strata:
                raise SpecError(f"duplicate stratum label {spec.label}")
            strata[spec.label] = spec

        adjacency = []
        for a in doc.get("adjacency") or []:
            conj = parse_matrix(a["conjugator"]) if a.get("conjugator") else None
            for lbl in (a["from"], a["to"]):
                if lbl not in strata:
                    raise SpecError(f"adjacency refers to unknown stratum {lbl}")
            adjacency.append(Adjacency(a["from"], a["to"], conj))
    except (KeyError, TypeError) as exc:
        raise SpecError(f"{root / 'bundle.yaml'}: missing or malformed field {exc}") from None

    rep = lifted_rep(O3_TEST_GENERATORS, "O(3)")
    rep_so3 = lifted_rep([g for g in O3_TEST_GENERATORS if linalg.det(g) == 1], "SO(3)")
    bundle = ExampleBundle(root, doc.get("name", root.name), xvars, rep, rep_so3, mib, mib6,
                           active, stored_hat, column, relation, strata, adjacency)
    if sanity:
        problems = sanity_problems(bundle)
        if problems:
            raise BundleCorrupted("; ".join(problems))
    return bundle


def sanity_problems(b: ExampleBundle, trials: int = 10) -> list[str]:
    out = []
    for name, p in zip(b.mib6.names, b.mib6.polys):
        if not p.is_homogeneous():
            out.append(f"{name} is not homogeneous")
        if parse_poly(format_poly(p), p.vars) != p:
            out.append(f"{name} does not survive a format roundtrip")
    for name, p in zip(b.mib.names, b.mib.polys):
        if not orbit_invariance_check(b.rep, p, trials=trials):
            out.append(f"{name} is not O(3)-invariant")
    for name, p in zip(b.mib6.names[len(b.mib):], b.mib6.polys[len(b.mib):]):
        if not orbit_invariance_check(b.rep_so3, p, trials=trials):
            out.append(f"{name} is not SO(3)-invariant")
    for spec in b.strata.values():
        for issue in spec.consistency_issues(trials=3):
            out.append(f"{spec.label}: {issue}")
    return out


# ----------------------------------------------------------------- report

@dataclass
class CheckItem:
    group: str
    anchor: str
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0


@dataclass
class Report:
    items: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(i.passed for i in self.items)

    @property
    def failures(self) -> list[CheckItem]:
        return [i for i in self.items if not i.passed]

    def add(self, group, anchor, name, passed, detail="", seconds=0.0):
        self.items.append(CheckItem(group, anchor, name, bool(passed), detail, seconds))

    def to_text(self) -> str:
        lines = []
        for i in self.items:
            mark = "PASS" if i.passed else "FAIL"
            d = f"  {i.detail}" if i.detail else ""
            lines.append(f"{mark}  [{i.anchor}] {i.name}{d}")
        lines.append(f"{len(self.items) - len(self.failures)} passed, "
                     f"{len(self.failures)} failed")
        return "\n".join(lines)

    def to_records(self) -> list[dict]:
        return [{"group": i.group, "anchor": i.anchor, "check": i.name,
                 "passed": i.passed, "detail": i.detail} for i in self.items]


CHECK_GROUPS = ("pmatrix", "consistency", "divisibility", "so3", "so3_pmatrix", "strata",
                "relations", "sub_strata", "lattice", "reynolds")


def verify_bundle(b: ExampleBundle, only: Iterable[str] | None = None, seed: int = 0,
                  consistency_trials: int = 20, equivalence_samples: int = 10000,
                  rank_samples: int = 1000, roundtrip_samples: int = 200) -> Report:
    groups = set(only) if only else set(CHECK_GROUPS)
    unknown = groups - set(CHECK_GROUPS)
    if unknown:
        raise ValueError(f"unknown check group(s) {sorted(unknown)}; "
                         f"choose from {', '.join(CHECK_GROUPS)}")
    rep = Report()
    steps: list[tuple[str, Callable]] = [
        ("pmatrix", lambda: check_pmatrix(b, rep)),
        ("consistency", lambda: check_consistency(b, rep, consistency_trials, seed)),
        ("divisibility", lambda: check_active_divisibility(b, rep)),
        ("so3", lambda: check_so3_relation(b, rep)),
        ("so3_pmatrix", lambda: check_so3_pmatrix(b, rep)),
        ("strata", lambda: check_strata(b, rep, seed, equivalence_samples,
                                        rank_samples, roundtrip_samples)),
        ("relations", lambda: check_relations(b, rep, seed, rank_samples)),
        ("sub_strata", lambda: check_sub_strata(b, rep, seed)),
        ("lattice", lambda: check_lattice(b, rep)),
        ("reynolds", lambda: check_reynolds(b, rep)),
    ]
    for group, fn in steps:
        if group in groups:
            try:
                fn()
            except Exception as exc:  # a crashing check is a failed check
                rep.add(group, group, "check raised", False, f"{type(exc).__name__}: {exc}")
    return rep


def _timed(rep: Report, group, anchor, name, fn):
    t = time.perf_counter()
    passed, detail = fn()
    rep.add(group, anchor, name, passed, detail, time.perf_counter() - t)
    return passed


def check_pmatrix(b: ExampleBundle, rep: Report):
    pm = b.pmatrix()
    q = pm.q
    for a in range(q):
        for c in range(a, q):
            got, want = pm.hat[a][c], b.stored_hat[a][c]
            detail = "" if got == want else f"computed {format_poly(got)}, stored {format_poly(want)}"
            rep.add("pmatrix", "P-matrix table", f"P{a + 1}{c + 1}", got == want, detail)
    issues = pm.structure_issues()
    rep.add("pmatrix", "P-matrix table", "homogeneity and first-row Euler identity",
            not issues, "; ".join(issues))


def consistency_failures(b: ExampleBundle, trials: int, seed: int = 0) -> list:
    """Random rational x with P̂(p(x)) != P(x); empty when the identity holds."""
    pm = b.stored_pmatrix()
    gram = gradient_gram(list(b.mib.polys))
    rng = random.Random(seed)
    bad = []
    for _ in range(trials):
        x = random_rational_point(rng, len(b.xvars), den=rng.choice((1, 2, 3, 5, 7)))
        p = b.mib.evaluate(x)
        hat = pm.at(p)
        direct = [[e.eval(x) for e in row] for row in gram]
        if hat != direct:
            bad.append(x)
    return bad


def check_consistency(b, rep, trials, seed):
    _timed(rep, "consistency", "P-matrix definition",
           f"P(p(x)) equals gradient Gram matrix at {trials} rational points",
           lambda: (lambda bad: (not bad, f"first failure at {bad[0]}" if bad else ""))(
               consistency_failures(b, trials, seed)))


def check_active_divisibility(b, rep):
    def run():
        try:
            q = check_divisibility(b.pmatrix().det(), b.active)
        except NotDivisible as exc:
            return False, f"remainder {format_poly(exc.remainder)}"
        return True, f"quotient {format_poly(q)}"
    _timed(rep, "divisibility", "active factor", "det(P) divisible by A", run)


def check_so3_relation(b, rep):
    def run():
        v = verify_relation(b.so3_relation, b.mib6, trials=5)
        return v.holds, "" if v.holds else str(v.counterexample)
    _timed(rep, "so3", "SO(3) relation", "243*p6^2 + A vanishes on p(x)", run)


def check_so3_pmatrix(b, rep):
    pm6 = b.pmatrix_so3()
    q = pm6.q
    for a in range(q):
        got, want = pm6.hat[a][q - 1], b.stored_so3_column[a]
        rep.add("so3_pmatrix", "SO(3) P-matrix column", f"P{a + 1}{q}", got == want,
                "" if got == want else f"computed {format_poly(got)}, stored {format_poly(want)}")
    for a in range(q - 1):
        for c in range(a, q - 1):
            if pm6.hat[a][c].relabel(b.pvars) != b.stored_hat[a][c]:
                rep.add("so3_pmatrix", "SO(3) P-matrix column", f"P{a + 1}{c + 1} block",
                        False, "leading block differs from the O(3) P-matrix")
                return


def _matrix_diff(got, want) -> str | None:
    for i, (rg, rw) in enumerate(zip(got, want)):
        for j, (eg, ew) in enumerate(zip(rg, rw)):
            if eg != ew:
                return f"entry ({i + 1},{j + 1}): computed {format_poly(eg)}, " \
                       f"reference {format_poly(ew)}"
    if len(got) != len(want):
        return "shape differs"
    return None


def check_strata(b, rep, seed, eq_samples, rank_samples, rt_samples):
    pm = b.pmatrix()
    for label, spec in b.strata.items():
        anchor = f"parametrization {label}"
        param = b.param(label)
        ref = spec.reference
        g = "strata"
        if "lambda_hat" in ref:
            d = _matrix_diff(param.lambda_hat, ref["lambda_hat"])
            rep.add(g, anchor, f"{label} Lambda matrix", d is None, d or "")
        if "phi" in ref:
            d = _matrix_diff([param.phi], [ref["phi"]])
            rep.add(g, anchor, f"{label} phi", d is None, d or "")
        if "jacobian" in ref:
            d = _matrix_diff(param.jacobian, ref["jacobian"])
            rep.add(g, anchor, f"{label} Jacobian", d is None, d or "")
        rep.add(g, anchor, f"{label} lambda basis algebraically independent", param.coregular)
        active = b.active if spec.expected_dim < len(b.mib) else None
        v = verify_factorization(param, pm, active)
        detail = "" if v.holds else f"entry {v.first_bad}: residual {format_poly(v.residual)}"
        rep.add(g, anchor, f"{label} P(phi) = J Lambda J^T", v.holds, detail)
        if active is not None:
            rep.add(g, anchor, f"{label} A(phi) = 0", bool(v.active_vanishes))
        tv = typical_point_check(param, b.mib)
        rep.add(g, anchor, f"{label} typical point: phi(lambda(x_t)) = p(x_t)", tv.phi_matches)
        rep.add(g, anchor, f"{label} typical point in closure of Delta", tv.in_closure)
        if param.rank_target == 0:
            continue
        if "delta" in ref:
            dis = sampling_equivalence(param.delta_ineqs, ref["delta"], param.rank_target,
                                       count=eq_samples, seed=seed)
            rep.add(g, anchor, f"{label} Delta equivalent to reference on {eq_samples} samples",
                    not dis, f"{len(dis)} disagreements" if dis else "")
        s = sample_delta(param, rank_samples, seed=seed)
        rep.add(g, anchor, f"{label} rank J = {param.rank_target} on {rank_samples} Delta samples",
                not s.rank_deficient,
                f"{len(s.rank_deficient)} rank-deficient" if s.rank_deficient else "")
        cert = definite_minor_certificate(param, s.points[:200])
        rep.add(g, anchor, f"{label} sign-definite Jacobian minor", True,
                f"rows {tuple(r + 1 for r in cert)}" if cert else "none found (sampling only)")
        rt = roundtrip_classify(param, pm, rules=b.rules, samples=s.points[:rt_samples])
        rep.add(g, anchor, f"{label} roundtrip classification ({rt.checked} points)", rt.ok,
                "" if rt.ok else str(rt.failure))
        pt = classify_point(pm, b.mib.evaluate_float(spec.typical_point), rules=b.rules)
        rep.add(g, anchor, f"{label} typical point classified", pt.stratum_label == label,
                f"got {pt.stratum_label}")
    if "S1" in b.strata:
        p1 = b.param("S1")
        region = delta_region(p1)
        rep.add("strata", "parametrization S1", "S1 rank J drops at l1 = 0",
                region.jacobian_rank((0.0,)) < 1 and region.jacobian_rank((0.5,)) == 1)
    if "S0" in b.strata:
        v = classify_point(pm, [0.0] * pm.q, rules=b.rules)
        rep.add("strata", "parametrization S0", "origin has rank 0 and label S0",
                v.rank == 0 and v.stratum_label == "S0")


def check_relations(b, rep, seed, samples):
    for label, spec in b.strata.items():
        rule = spec.rule
        if rule is None or spec.expected_dim in (0, len(b.mib)):
            continue
        param = b.param(label)
        res = relations_vanish(rule.equalities, param, b.mib.names)
        bad = [format_poly(e) for e, r in zip(rule.equalities, res) if r]
        rep.add("relations", "relations table", f"{label} equalities vanish under phi", not bad,
                "; ".join(bad))
        if rule.inequalities and param.rank_target:
            pts = sample_delta(param, samples, seed=seed).points
            phis = np.array([param.phi_float(lam) for lam in pts])
            ok = True
            for g in rule.inequalities:
                ok &= bool(np.all(g.to_numpy()(phis) > 0))
            rep.add("relations", "relations table",
                    f"{label} inequalities hold on {len(pts)} Delta samples", ok)


def sub_stratum_points(label: str, count: int, rng: np.random.Generator) -> np.ndarray:
    """Points of the (K, V) strata of S4: Sigma2, Sigma3 and the principal one."""
    l1 = rng.uniform(-3, 3, count)
    l2 = rng.uniform(0.05, 3, count)
    l3 = rng.uniform(0.05, 3, count)
    if label == "Sigma2":
        return np.column_stack([l1, l2, np.zeros(count), np.zeros(count)])
    if label == "Sigma3":
        sign = rng.choice([-1.0, 1.0], count)
        return np.column_stack([l1, l2, l3, sign * 2 * np.sqrt(l2) * l3])
    frac = rng.uniform(-0.95, 0.95, count)
    return np.column_stack([l1, l2, l3, frac * 2 * np.sqrt(l2) * l3])


def check_sub_strata(b, rep, seed, count: int = 200):
    if "S4" not in b.strata:
        return
    param = b.param("S4")
    lv = param.lvars
    want = parse_poly("4*l2*l3^2 - l4^2", lv) * parse_poly("l3 + 4*l2", lv) * 16
    det = linalg.det(param.lambda_hat)
    rep.add("sub_strata", "V/K stratification", "det Lambda = 16 (4 l2 l3^2 - l4^2)(l3 + 4 l2)",
            det == want, "" if det == want else format_poly(det))
    pm = b.pmatrix()
    rng = np.random.default_rng(seed)
    lam_fns = [[e.to_float_function() for e in row] for row in param.lambda_hat]
    for sub in b.strata["S4"].extra.get("sub_strata", []):
        name = sub["label"]
        pts = sub_stratum_points(name, count, rng)
        ranks, pranks = set(), set()
        for lam in pts:
            m = np.array([[f(lam) for f in row] for row in lam_fns])
            ranks.add(spectral_rank(m, 1e-9)[1])
            pranks.add(classify_point(pm, param.phi_float(lam)).rank)
        rep.add("sub_strata", "V/K stratification", f"{name}: Lambda rank {sub['rank']}",
                ranks == {sub["rank"]}, f"ranks seen {sorted(ranks)}")
        if sub["rank"] < param.rank_target:
            rep.add("sub_strata", "V/K stratification",
                    f"{name}: boundary maps to lower P-matrix rank",
                    max(pranks) < spec_dim(b, "S4"), f"P ranks {sorted(pranks)}")


def spec_dim(b, label):
    return b.strata[label].expected_dim


def _lift_closure(gens):
    return group_closure([rep_from(g) for g in gens], n=8) if gens else \
        [linalg.identity(8)]


def rep_from(g):
    from .group_rep import rep_from_O3
    return rep_from_O3(g)


def _element_order(m) -> int:
    k, acc = 1, m
    while not linalg.is_identity(acc):
        acc = linalg.mat_mul(acc, m)
        k += 1
    return k


def _conj_key(elements) -> tuple:
    """Conjugacy invariant of a finite subgroup: sorted (element order, trace) pairs."""
    pairs = sorted((_element_order(m),
                    round(float(sum((m[i][i] for i in range(len(m))), FieldElem(0))), 9))
                   for m in elements)
    return len(elements), tuple(pairs)


def check_lattice(b, rep):
    keys = {}
    for label, spec in b.strata.items():
        o3 = spec.extra.get("isotropy_o3") or []
        so3 = spec.extra.get("isotropy_so3") or []
        full = group_closure(o3, n=3) if o3 else [linalg.identity(3)]
        rot = [g for g in full if linalg.det(g) == 1]
        sub = group_closure(so3, n=3) if so3 else [linalg.identity(3)]
        same = {linalg.freeze(g) for g in rot} == {linalg.freeze(g) for g in sub}
        rep.add("lattice", "SO(3) isotropy", f"{label}: SO(3) isotropy = O(3) isotropy within SO(3)",
                same, f"orders {len(sub)} vs {len(rot)}")
        keys[label] = _conj_key(_lift_closure(so3))
    classes = {}
    for label, k in keys.items():
        classes.setdefault(k, []).append(label)
    merged = [v for v in classes.values() if len(v) > 1]
    rep.add("lattice", "SO(3) strata", "SO(3) stratum count is 6", len(classes) == 6,
            f"{len(classes)} isotropy classes; merged: {merged}")
    if "S4" in b.strata:
        pm6 = b.pmatrix_so3()
        v = classify_point(pm6, b.mib6.evaluate_float(b.strata["S4"].typical_point))
        rep.add("lattice", "SO(3) strata", "S4 typical point has full SO(3) P-matrix rank 5",
                v.rank == 5 and v.psd, f"rank {v.rank}")
    for adj in b.adjacency:
        src = b.strata[adj.source].extra.get("isotropy_o3") or []
        dst = b.strata[adj.target].extra.get("isotropy_o3") or []
        big = {linalg.freeze(g) for g in (group_closure(src, n=3) if src else [linalg.identity(3)])}
        small = group_closure(dst, n=3) if dst else [linalg.identity(3)]
        c = adj.conjugator or linalg.identity(3)
        ct = linalg.transpose(c)
        inside = all(linalg.freeze(linalg.mat_mul(linalg.mat_mul(c, g), ct)) in big
                     for g in small)
        rep.add("lattice", "bordering strata", f"{adj.source} -> {adj.target}: isotropy contained",
                inside and len(small) < len(big))


def reynolds_failures(spec: StratumSpec) -> tuple[int, list]:
    """Reynolds averages of monomials of degree <= |K| that do not rewrite in λ."""
    elems = spec.k_group()
    order = len(elems)
    if not spec.l:
        return order, []
    rw = Rewriter(spec.lambda_names, list(spec.lambda_polys))
    bad = []
    vv = spec.v_vars
    for deg in range(1, order + 1):
        for e in weighted_exponents([1] * len(vv), deg):
            mono = Poly.monomial(vv, e)
            avg = reynolds_avg(elems, mono)
            if avg.is_zero():
                continue
            try:
                rw.rewrite(avg)
            except NoExpression:
                bad.append(format_poly(mono))
    return order, bad


def check_reynolds(b, rep):
    for label, spec in b.strata.items():
        want = spec.extra.get("k_order")
        if want is None:
            continue
        order, bad = reynolds_failures(spec)
        rep.add("reynolds", "finite K cross-check", f"{label}: |K| = {want}", order == want,
                f"closure has {order} elements")
        rep.add("reynolds", "finite K cross-check",
                f"{label}: averaged monomials of degree <= {order} rewrite in lambda",
                not bad, ", ".join(bad))


# ----------------------------------------------------------------- goldens

def golden_texts(b: ExampleBundle) -> dict[str, str]:
    """Canonical printed forms of every derived object (file name -> text)."""
    pm = b.pmatrix()
    q = pm.q
    out = {}
    ent = {f"P{a + 1}{c + 1}": pm.hat[a][c] for a in range(q) for c in range(a, q)}
    out["pmatrix.poly"] = format_poly_entries(ent, "recomputed P-matrix")
    quotient = check_divisibility(pm.det(), b.active)
    out["det.poly"] = format_poly_entries({"det": pm.det(), "quotient": quotient},
                                          "det(P) and det(P) / A")
    pm6 = b.pmatrix_so3()
    out["so3_pmatrix.poly"] = format_poly_entries(
        {f"P{a + 1}{q + 1}": pm6.hat[a][q] for a in range(q + 1)}, "SO(3) extra column")
    for label in b.strata:
        p = b.param(label)
        ent = {}
        for a, f in enumerate(p.phi):
            ent[f"phi{a + 1}"] = f
        for i, row in enumerate(p.lambda_hat):
            for j, e in enumerate(row):
                if j >= i:
                    ent[f"L{i + 1}{j + 1}"] = e
        for k, g in enumerate(p.delta_ineqs):
            ent[f"delta{k + 1}"] = g
        out[f"stratum_{label}.poly"] = format_poly_entries(ent, f"stratum {label}")
    return out


def write_goldens(b: ExampleBundle, directory=None) -> list[Path]:
    d = Path(directory) if directory else b.path / "golden"
    d.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in golden_texts(b).items():
        path = d / name
        path.write_text(text)
        written.append(path)
    return written
