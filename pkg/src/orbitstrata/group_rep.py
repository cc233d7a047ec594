"""Orthogonal representations, fixed-point subspaces and Reynolds averaging.

The O(3) action on R^8 used throughout treats ``x1..x5`` as the coordinates of
a traceless symmetric 3x3 matrix ``Q`` (orthonormal under the Frobenius
product) and ``x6..x8`` as a polar vector ``P``:

    Q ↦ O Q Oᵀ,   P ↦ O P
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import linalg
from .numfield import ONE, ZERO, FieldElem, R2, R3
from .polyring import Poly, VarSet


class NotOrthogonal(ValueError):
    pass


class NotAGroup(ValueError):
    pass


class GroupTooLarge(RuntimeError):
    pass


# ------------------------------------------------------------ basic matrices

def diag(*entries) -> list[list[FieldElem]]:
    n = len(entries)
    return [[FieldElem.coerce(entries[i]) if i == j else ZERO for j in range(n)]
            for i in range(n)]


def block_diag(*blocks) -> list[list[FieldElem]]:
    n = sum(len(b) for b in blocks)
    out = [[ZERO] * n for _ in range(n)]
    off = 0
    for b in blocks:
        for i, row in enumerate(b):
            for j, v in enumerate(row):
                out[off + i][off + j] = FieldElem.coerce(v)
        off += len(b)
    return out


_COS_SIN = {
    0: (ONE, ZERO),
    30: (R3 / 2, FieldElem(Fraction(1, 2))),
    45: (R2 / 2, R2 / 2),
    60: (FieldElem(Fraction(1, 2)), R3 / 2),
    90: (ZERO, ONE),
    120: (FieldElem(Fraction(-1, 2)), R3 / 2),
    135: (-R2 / 2, R2 / 2),
    150: (-R3 / 2, FieldElem(Fraction(1, 2))),
    180: (-ONE, ZERO),
}


def cos_sin(degrees: int) -> tuple[FieldElem, FieldElem]:
    """Exact cos/sin for multiples of 15° that live in Q(sqrt2, sqrt3) (30° and 45° families)."""
    d = degrees % 360
    sign_s = 1
    if d > 180:
        d = 360 - d
        sign_s = -1
    if d not in _COS_SIN:
        raise ValueError(f"cos/sin of {degrees} degrees not in Q(sqrt2, sqrt3)")
    c, s = _COS_SIN[d]
    return c, s * sign_s


def rot2(degrees: int) -> list[list[FieldElem]]:
    c, s = cos_sin(degrees)
    return [[c, -s], [s, c]]


def rotation3(axis: int, degrees: int) -> list[list[FieldElem]]:
    """Rotation about coordinate axis 1, 2 or 3 (right-handed)."""
    c, s = cos_sin(degrees)
    i, j = [(1, 2), (2, 0), (0, 1)][axis - 1]
    m = linalg.identity(3)
    m[i][i], m[i][j], m[j][i], m[j][j] = c, -s, s, c
    return m


def permutation_matrix(perm: Sequence[int]) -> list[list[FieldElem]]:
    """Matrix sending e_j to e_perm[j]."""
    n = len(perm)
    m = [[ZERO] * n for _ in range(n)]
    for j, i in enumerate(perm):
        m[i][j] = ONE
    return m


# ----------------------------------------------------------- O(3) on R^8

def _q_basis() -> list[list[list[FieldElem]]]:
    """Q(e_i) for i = 1..5: an orthonormal basis of traceless symmetric 3x3 matrices."""
    s2 = R2.inverse()
    s3 = R3.inverse()
    basis = []
    for i in range(5):
        x = [ZERO] * 5
        x[i] = ONE
        x1, x2, x3, x4, x5 = x
        q = [[-2 * x1 * s3, x3, x4],
             [x3, x1 * s3 - x2, x5],
             [x4, x5, x1 * s3 + x2]]
        basis.append([[v * s2 for v in row] for row in q])
    return basis


_QB = None


def q_matrix_basis():
    global _QB
    if _QB is None:
        _QB = _q_basis()
    return _QB


def rep_from_O3(o) -> list[list[FieldElem]]:
    """The 8x8 matrix of ``o`` in O(3) acting on (x1..x5 | x6..x8) as Q ↦ OQOᵀ, P ↦ OP."""
    o = linalg.as_field_matrix(o)
    if len(o) != 3 or any(len(r) != 3 for r in o):
        raise ValueError("expected a 3x3 matrix")
    if not linalg.is_orthogonal(o):
        raise NotOrthogonal("input matrix is not orthogonal")
    ot = linalg.transpose(o)
    qb = q_matrix_basis()
    out = [[ZERO] * 8 for _ in range(8)]
    for j, ej in enumerate(qb):
        img = linalg.mat_mul(linalg.mat_mul(o, ej), ot)
        for i, ei in enumerate(qb):
            # x_i = Tr(E_i M) with E_i symmetric
            out[i][j] = sum((ei[a][b] * img[a][b] for a in range(3) for b in range(3)), ZERO)
    for i in range(3):
        for j in range(3):
            out[5 + i][5 + j] = o[i][j]
    return out


# A word generator set in O(3) whose entries stay inside Q(sqrt2, sqrt3).
O3_TEST_GENERATORS = (
    diag(-1, 1, 1),
    diag(-1, -1, -1),
    permutation_matrix((1, 2, 0)),
    permutation_matrix((1, 0, 2)),
    rotation3(1, 45),
    rotation3(2, 30),
    rotation3(3, 45),
)


# ---------------------------------------------------------------- OrthRep

@dataclass
class OrthRep:
    """A finitely generated orthogonal matrix group acting on R^n."""

    n: int
    generators: list
    label: str = ""
    check: bool = True

    def __post_init__(self):
        self.generators = [linalg.as_field_matrix(g) for g in self.generators]
        for g in self.generators:
            if len(g) != self.n or any(len(r) != self.n for r in g):
                raise ValueError(f"generator of wrong size for n={self.n}")
            if self.check and not linalg.is_orthogonal(g):
                raise NotOrthogonal(f"generator of {self.label or 'group'} is not orthogonal")

    def evaluate(self, word: Sequence[int]) -> list[list[FieldElem]]:
        """Product of generators indexed by ``word``; ``~i`` stands for the inverse of generator i."""
        m = linalg.identity(self.n)
        for k in word:
            g = self.generators[~k] if k < 0 else self.generators[k]
            if k < 0:
                g = linalg.transpose(g)
            m = linalg.mat_mul(m, g)
        return m

    def random_word(self, rng: random.Random, length: int = 4) -> list[int]:
        k = len(self.generators)
        if not k:
            return []
        return [rng.randrange(k) for _ in range(length)]

    def act(self, g, x):
        return linalg.mat_vec(g, [FieldElem.coerce(v) for v in x])

    def elements(self, limit: int = 5000) -> list:
        return group_closure(self.generators, limit=limit, n=self.n)


def lifted_rep(o3_generators, label: str = "") -> OrthRep:
    return OrthRep(8, [rep_from_O3(o) for o in o3_generators], label)


# ------------------------------------------------------------ group helpers

def group_closure(generators, limit: int = 5000, n: int | None = None) -> list:
    """All products of the generators (a finite group), identity first."""
    gens = [linalg.freeze(linalg.as_field_matrix(g)) for g in generators]
    if n is None:
        n = len(gens[0]) if gens else 0
    ident = linalg.freeze(linalg.identity(n))
    seen = {ident: None}
    order = [ident]
    frontier = [ident]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                p = linalg.freeze(linalg.mat_mul(a, g))
                if p not in seen:
                    seen[p] = None
                    order.append(p)
                    nxt.append(p)
                    if len(order) > limit:
                        raise GroupTooLarge(f"more than {limit} elements")
        frontier = nxt
    return [[list(r) for r in m] for m in order]


def is_closed(elements) -> bool:
    fz = {linalg.freeze(linalg.as_field_matrix(e)) for e in elements}
    for a in fz:
        for b in fz:
            if linalg.freeze(linalg.mat_mul(a, b)) not in fz:
                return False
    return bool(fz)


# ---------------------------------------------------------------- FixedSpace

def _field_sqrt(x: FieldElem) -> FieldElem | None:
    """sqrt(x) when x is a rational times 1, 2, 3 or 6 times a square; else None."""
    if not x.is_rational() or x.sign() < 0:
        return None
    q = x.a
    for m, unit in ((1, ONE), (2, R2), (3, R3), (6, FieldElem(0, 0, 0, 1))):
        r = q / m
        num, den = r.numerator, r.denominator
        sn, sd = math.isqrt(num), math.isqrt(den)
        if sn * sn == num and sd * sd == den:
            return unit * FieldElem(Fraction(sn, sd))
    return None


@dataclass
class FixedSpace:
    """Orthonormal basis (columns) of the joint 1-eigenspace of a set of matrices."""

    n: int
    basis: list  # list of length-n vectors
    coords: list | None = None  # indices when the basis is a set of coordinate axes

    @property
    def dim(self) -> int:
        return len(self.basis)

    def restrict(self, f: Poly, vvars: VarSet) -> Poly:
        """f(Σ v_k b_k) as a polynomial in the coordinates ``vvars`` of V."""
        if len(vvars) != self.dim:
            raise ValueError("one v-variable per basis vector required")
        vs = [Poly.var(vvars, n) for n in vvars.names]
        images = {}
        for i, name in enumerate(f.vars.names):
            acc = Poly.zero(vvars)
            for k, b in enumerate(self.basis):
                if not b[i].is_zero():
                    acc = acc + vs[k].scale(b[i])
            images[name] = acc
        return f.subs(images, vvars)

    def embed(self, v) -> list[FieldElem]:
        out = [ZERO] * self.n
        for k, b in enumerate(self.basis):
            c = FieldElem.coerce(v[k])
            for i in range(self.n):
                out[i] = out[i] + c * b[i]
        return out

    def project(self, x) -> list[FieldElem]:
        x = [FieldElem.coerce(v) for v in x]
        return [linalg.dot(b, x) for b in self.basis]

    def contains(self, x) -> bool:
        return self.embed(self.project(x)) == [FieldElem.coerce(v) for v in x]


def restrict_to(space: FixedSpace, g) -> list[list[FieldElem]]:
    """Matrix of g on V in the basis of ``space``; g must map V into itself."""
    images = [linalg.mat_vec(g, b) for b in space.basis]
    m = [[linalg.dot(bk, img) for img in images] for bk in space.basis]
    for img, col in zip(images, zip(*m) if m else []):
        if space.embed(col) != img:
            raise ValueError("matrix does not preserve the fixed space")
    return m


def fixed_space(h_gens, n: int | None = None) -> FixedSpace:
    """Joint fixed space of the generators; coordinate axes are used when they span it."""
    gens = [linalg.as_field_matrix(h) for h in h_gens]
    if n is None:
        if not gens:
            raise ValueError("dimension needed when there are no generators")
        n = len(gens[0])
    ident = linalg.identity(n)
    rows = []
    for h in gens:
        rows.extend(linalg.mat_sub(h, ident))
    null = linalg.nullspace(rows, ncols=n)
    axes = [i for i in range(n) if all(h[j][i] == (1 if j == i else 0)
                                        for h in gens for j in range(n))]
    if len(axes) == len(null):
        basis = [[ONE if j == i else ZERO for j in range(n)] for i in axes]
        return FixedSpace(n, basis, axes)
    # Gram-Schmidt, normalising where the norm has an exact square root
    ortho = []
    for v in null:
        w = list(v)
        for u in ortho:
            c = linalg.dot(w, u) / linalg.dot(u, u)
            w = [a - c * b for a, b in zip(w, u)]
        ortho.append(w)
    basis = []
    for w in ortho:
        r = _field_sqrt(linalg.dot(w, w))
        if r is None:
            raise NotOrthogonal("fixed space has no orthonormal basis over Q(sqrt2, sqrt3)")
        basis.append([a / r for a in w])
    return FixedSpace(n, basis, None)


# --------------------------------------------------------------- invariance

def act_on_poly(f: Poly, g) -> Poly:
    """The polynomial x ↦ f(g x)."""
    vs = f.vars
    xs = [Poly.var(vs, n) for n in vs.names]
    images = {}
    for i, name in enumerate(vs.names):
        acc = Poly.zero(vs)
        for j, gij in enumerate(g[i]):
            if not gij.is_zero():
                acc = acc + xs[j].scale(gij)
        images[name] = acc
    return f.subs(images, vs)


def reynolds_avg(elements, f: Poly) -> Poly:
    """Average of f∘g over an explicit finite group; raises NotAGroup if not closed."""
    elems = [linalg.as_field_matrix(g) for g in elements]
    if not is_closed(elems):
        raise NotAGroup("element list is not closed under multiplication")
    acc = Poly.zero(f.vars)
    for g in elems:
        acc = acc + act_on_poly(f, g)
    return acc.scale(FieldElem(Fraction(1, len(elems))))


@dataclass
class InvarianceVerdict:
    invariant: bool
    trials: int
    counterexample: dict | None = field(default=None)

    def __bool__(self):
        return self.invariant


def random_rational_point(rng: random.Random, n: int, lo: int = -3, hi: int = 3,
                          den: int = 4) -> list[Fraction]:
    return [Fraction(rng.randint(lo * den, hi * den), den) for _ in range(n)]


def orbit_invariance_check(rep: OrthRep, f: Poly, trials: int = 20,
                           seed: int = 0, word_length: int = 3) -> InvarianceVerdict:
    """Check f(g x) == f(x) exactly at random rational x for random words g.

    Every generator is also tried on its own first, so a non-invariant ``f``
    is caught even for few trials.
    """
    rng = random.Random(seed)
    words = [[k] for k in range(len(rep.generators))]
    words += [rep.random_word(rng, word_length) for _ in range(trials)]
    for t, word in enumerate(words):
        g = rep.evaluate(word)
        x = random_rational_point(rng, rep.n)
        fx = f.eval(x)
        fgx = f.eval(rep.act(g, x))
        if fx != fgx:
            return InvarianceVerdict(False, t + 1, {"word": word, "x": x,
                                                    "f(x)": fx, "f(gx)": fgx})
    return InvarianceVerdict(True, len(words))
