"""Canonical multivariate polynomials over Q(sqrt2, sqrt3).

A :class:`Poly` is a map from dense exponent tuples to nonzero
:class:`~orbitstrata.numfield.FieldElem` coefficients, tied to a
:class:`VarSet` that fixes variable order and homogeneity weights.  Terms are
ordered by weighted graded reverse-lexicographic order; that order drives
printing and multivariate division.

Text format::

    -2*r3*x1^3 + 6*r3*x1*x2^2 - 1/2*x3

Whitespace is ignored and ``**`` is accepted as a synonym for ``^``.
"""
from __future__ import annotations

import operator
import re
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .numfield import ONE, ZERO, FieldElem, format_field, parse_factor


class VarSetMismatch(ValueError):
    pass


class UnknownVariable(KeyError):
    pass


class MissingAssignment(KeyError):
    pass


class PolyParseError(ValueError):
    pass


class VarSet:
    """Ordered variable names with positive integer weights."""

    __slots__ = ("names", "weights", "_index", "_hash")

    def __init__(self, names: Iterable[str], weights: Iterable[int] | None = None):
        names = tuple(names)
        weights = tuple(weights) if weights is not None else (1,) * len(names)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        if len(weights) != len(names):
            raise ValueError("one weight per variable required")
        if any(w < 1 for w in weights):
            raise ValueError("weights must be >= 1")
        self.names = names
        self.weights = weights
        self._index = {n: i for i, n in enumerate(names)}
        self._hash = hash((names, weights))

    @classmethod
    def numbered(cls, prefix: str, count: int, weights=None) -> "VarSet":
        return cls([f"{prefix}{i}" for i in range(1, count + 1)], weights)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownVariable(name) from None

    def __contains__(self, name):
        return name in self._index

    def __len__(self):
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __eq__(self, other):
        return (isinstance(other, VarSet) and self.names == other.names
                and self.weights == other.weights)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        if all(w == 1 for w in self.weights):
            return f"VarSet({list(self.names)})"
        return f"VarSet({list(self.names)}, {list(self.weights)})"

    def order_key(self, exp: tuple[int, ...]):
        """Sort key for weighted grevlex: larger key means larger monomial."""
        wdeg = sum(map(operator.mul, exp, self.weights))
        return (wdeg, tuple(-e for e in reversed(exp)))

    def wdegree(self, exp: tuple[int, ...]) -> int:
        return sum(map(operator.mul, exp, self.weights))


def _add_exp(e1, e2):
    return tuple(map(operator.add, e1, e2))


class Poly:
    """Immutable polynomial in canonical form (no stored zero coefficients)."""

    __slots__ = ("vars", "terms", "_ffn")

    def __init__(self, vars: VarSet, terms: Mapping[tuple, FieldElem] | None = None):
        self.vars = vars
        self._ffn = None
        self.terms: dict[tuple, FieldElem] = {}
        if terms:
            n = len(vars)
            for e, c in terms.items():
                if len(e) != n:
                    raise ValueError(f"exponent {e} does not match {vars}")
                c = FieldElem.coerce(c)
                if not c.is_zero():
                    self.terms[tuple(e)] = c

    @classmethod
    def _wrap(cls, vars, terms):
        obj = cls.__new__(cls)
        obj.vars = vars
        obj.terms = terms
        obj._ffn = None
        return obj

    # constructors
    @classmethod
    def zero(cls, vars: VarSet) -> "Poly":
        return cls._wrap(vars, {})

    @classmethod
    def const(cls, vars: VarSet, c) -> "Poly":
        c = FieldElem.coerce(c)
        if c.is_zero():
            return cls.zero(vars)
        return cls._wrap(vars, {(0,) * len(vars): c})

    @classmethod
    def var(cls, vars: VarSet, name: str) -> "Poly":
        i = vars.index(name)
        e = [0] * len(vars)
        e[i] = 1
        return cls._wrap(vars, {tuple(e): ONE})

    @classmethod
    def monomial(cls, vars: VarSet, exp, c=1) -> "Poly":
        return cls(vars, {tuple(exp): c})

    # predicates / accessors
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def constant_term(self) -> FieldElem:
        return self.terms.get((0,) * len(self.vars), ZERO)

    def is_constant(self) -> bool:
        zero = (0,) * len(self.vars)
        return all(e == zero for e in self.terms)

    def wdegree(self) -> int:
        """Largest weighted degree among terms (-1 for the zero polynomial)."""
        if not self.terms:
            return -1
        return max(self.vars.wdegree(e) for e in self.terms)

    def degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def is_homogeneous(self, weights: Iterable[int] | None = None) -> bool:
        w = tuple(weights) if weights is not None else self.vars.weights
        degs = {sum(map(operator.mul, e, w)) for e in self.terms}
        return len(degs) <= 1

    def homogeneous_components(self) -> dict[int, "Poly"]:
        out: dict[int, dict] = {}
        for e, c in self.terms.items():
            out.setdefault(self.vars.wdegree(e), {})[e] = c
        return {k: Poly._wrap(self.vars, v) for k, v in sorted(out.items())}

    def sorted_terms(self) -> list[tuple[tuple, FieldElem]]:
        key = self.vars.order_key
        return sorted(self.terms.items(), key=lambda t: key(t[0]), reverse=True)

    def leading_term(self) -> tuple[tuple, FieldElem]:
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        key = self.vars.order_key
        e = max(self.terms, key=key)
        return e, self.terms[e]

    def variables_used(self) -> list[str]:
        used = [False] * len(self.vars)
        for e in self.terms:
            for i, k in enumerate(e):
                if k:
                    used[i] = True
        return [n for n, u in zip(self.vars.names, used) if u]

    # arithmetic
    def _check(self, other: "Poly"):
        if self.vars != other.vars:
            raise VarSetMismatch(f"{self.vars} vs {other.vars}")

    def _lift(self, other):
        if isinstance(other, Poly):
            self._check(other)
            return other
        try:
            return Poly.const(self.vars, other)
        except TypeError:
            return None

    def __add__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        if len(other.terms) > len(self.terms):
            big, small = other.terms, self.terms
        else:
            big, small = self.terms, other.terms
        terms = dict(big)
        for e, c in small.items():
            s = terms.get(e)
            if s is None:
                terms[e] = c
            else:
                s = s + c
                if s.is_zero():
                    del terms[e]
                else:
                    terms[e] = s
        return Poly._wrap(self.vars, terms)

    __radd__ = __add__

    def __neg__(self):
        return Poly._wrap(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def scale(self, s) -> "Poly":
        s = FieldElem.coerce(s)
        if s.is_zero():
            return Poly.zero(self.vars)
        return Poly._wrap(self.vars, {e: c * s for e, c in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Poly):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        self._check(other)
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        out: dict[tuple, FieldElem] = {}
        get = out.get
        for e2, c2 in b.items():
            for e1, c1 in a.items():
                e = tuple(map(operator.add, e1, e2))
                prev = get(e)
                out[e] = c1 * c2 if prev is None else prev + c1 * c2
        return Poly._wrap(self.vars, {e: c for e, c in out.items() if not c.is_zero()})

    def __rmul__(self, other):
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        result = Poly.const(self.vars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __truediv__(self, s):
        if isinstance(s, Poly):
            q, r = poly_divide(self, s)
            if r:
                raise NotDivisible(r)
            return q
        return self.scale(FieldElem.coerce(s).inverse())

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.vars == other.vars and self.terms == other.terms
        if isinstance(other, (int, Fraction, FieldElem)):
            return self.terms == Poly.const(self.vars, other).terms
        return NotImplemented

    def __hash__(self):
        return hash((self.vars, frozenset(self.terms.items())))

    # calculus and evaluation
    def diff(self, name: str) -> "Poly":
        return poly_diff(self, name)

    def eval(self, point) -> FieldElem:
        return poly_eval(self, point)

    def subs(self, images: Mapping[str, "Poly"], target: VarSet | None = None) -> "Poly":
        return poly_subst(self, images, target)

    def relabel(self, target: VarSet, mapping: Mapping[str, str] | None = None) -> "Poly":
        """Move to another VarSet by name (optionally renamed); unused variables may be dropped."""
        mapping = mapping or {}
        idx = []
        for i, n in enumerate(self.vars.names):
            tn = mapping.get(n, n)
            idx.append(target.index(tn) if tn in target else None)
        out = {}
        m = len(target)
        for e, c in self.terms.items():
            new = [0] * m
            for i, k in enumerate(e):
                if k:
                    j = idx[i]
                    if j is None:
                        raise UnknownVariable(self.vars.names[i])
                    new[j] += k
            out[tuple(new)] = c
        return Poly._wrap(target, out)

    def to_float_function(self):
        """Compile to a fast callable ``f(values) -> float`` (values in variable order)."""
        if self._ffn is None:
            self._ffn = compile_float(self)
        return self._ffn

    def to_numpy(self):
        """Compile to a vectorised evaluator on arrays of shape (N, nvars)."""
        return compile_numpy(self)

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"Poly({format_poly(self)!r})"


class NotDivisible(ArithmeticError):
    def __init__(self, remainder: Poly):
        super().__init__(f"nonzero remainder: {remainder}")
        self.remainder = remainder


# ------------------------------------------------------------------ calculus

def poly_add(f: Poly, g: Poly) -> Poly:
    return f + g


def poly_mul(f: Poly, g: Poly) -> Poly:
    return f * g


def poly_scale(f: Poly, s) -> Poly:
    return f.scale(s)


def poly_diff(f: Poly, name: str) -> Poly:
    i = f.vars.index(name)
    out = {}
    for e, c in f.terms.items():
        k = e[i]
        if k:
            ne = e[:i] + (k - 1,) + e[i + 1:]
            out[ne] = c * k
    return Poly._wrap(f.vars, out)


def gradient(f: Poly) -> list[Poly]:
    return [poly_diff(f, n) for n in f.vars.names]


def _point_values(vars: VarSet, point) -> list:
    if isinstance(point, Mapping):
        vals = []
        for n in vars.names:
            if n not in point:
                raise MissingAssignment(n)
            vals.append(point[n])
        return vals
    vals = list(point)
    if len(vals) != len(vars):
        raise MissingAssignment(f"expected {len(vars)} values, got {len(vals)}")
    return vals


def poly_eval(f: Poly, point) -> FieldElem:
    """Exact value at ``point`` (mapping name -> value, or a sequence in variable order)."""
    vals = [FieldElem.coerce(v) for v in _point_values(f.vars, point)]
    powers: list[dict[int, FieldElem]] = [{0: ONE, 1: v} for v in vals]

    def pw(i, k):
        cache = powers[i]
        if k not in cache:
            cache[k] = pw(i, k - 1) * vals[i]
        return cache[k]

    total = ZERO
    for e, c in f.terms.items():
        t = c
        for i, k in enumerate(e):
            if k:
                t = t * pw(i, k)
                if t.is_zero():
                    break
        total = total + t
    return total


def poly_subst(f: Poly, images: Mapping[str, Poly], target: VarSet | None = None) -> Poly:
    """Compose: replace every variable of ``f`` by its image polynomial.

    Only variables that occur in ``f`` need an image.  All images must share
    one VarSet (``target``, inferred when omitted).
    """
    used = f.variables_used()
    imgs = []
    for n in f.vars.names:
        if n in images:
            imgs.append(images[n])
        elif n in used:
            raise MissingAssignment(n)
        else:
            imgs.append(None)
    if target is None:
        polys = [p for p in imgs if isinstance(p, Poly)]
        if not polys:
            raise ValueError("cannot infer target VarSet; pass target=")
        target = polys[0].vars
    imgs = [p if isinstance(p, Poly) or p is None else Poly.const(target, p) for p in imgs]
    for p in imgs:
        if p is not None and p.vars != target:
            raise VarSetMismatch(f"image over {p.vars}, expected {target}")
    cache: list[dict[int, Poly]] = [{1: p} for p in imgs]

    def pw(i, k):
        c = cache[i]
        if k not in c:
            h = k // 2
            c[k] = pw(i, h) * pw(i, k - h)
        return c[k]

    acc: dict[tuple, FieldElem] = {}
    one_exp = (0,) * len(target)
    for e, c in f.terms.items():
        term = None
        for i, k in enumerate(e):
            if k:
                term = pw(i, k) if term is None else term * pw(i, k)
                if not term.terms:
                    break
        if term is None:
            items = {one_exp: ONE}.items()
        else:
            items = term.terms.items()
        for te, tc in items:
            prev = acc.get(te)
            acc[te] = tc * c if prev is None else prev + tc * c
    return Poly._wrap(target, {e: c for e, c in acc.items() if not c.is_zero()})


def poly_divide(f: Poly, g: Poly) -> tuple[Poly, Poly]:
    """Division by a single divisor w.r.t. its leading term: f = q*g + r.

    No term of ``r`` is divisible by the leading monomial of ``g``; for one
    divisor ``r == 0`` exactly when ``g`` divides ``f``.
    """
    f._check(g)
    if g.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    lm, lc = g.leading_term()
    lc_inv = lc.inverse()
    key = f.vars.order_key
    rem = dict(f.terms)
    quot: dict[tuple, FieldElem] = {}
    out_rem: dict[tuple, FieldElem] = {}
    gterms = list(g.terms.items())
    while rem:
        e = max(rem, key=key)
        c = rem[e]
        if all(a >= b for a, b in zip(e, lm)):
            m = tuple(a - b for a, b in zip(e, lm))
            k = c * lc_inv
            quot[m] = quot.get(m, ZERO) + k
            for ge, gc in gterms:
                te = _add_exp(ge, m)
                v = rem.get(te, ZERO) - gc * k
                if v.is_zero():
                    rem.pop(te, None)
                else:
                    rem[te] = v
        else:
            out_rem[e] = c
            del rem[e]
    return (Poly._wrap(f.vars, {e: c for e, c in quot.items() if c}),
            Poly._wrap(f.vars, out_rem))


# ----------------------------------------------------------- float compiling

def _float_terms(f: Poly):
    coeffs = np.array([float(c) for c in f.terms.values()], dtype=float)
    exps = np.array(list(f.terms.keys()), dtype=np.int64).reshape(len(f.terms), len(f.vars))
    return coeffs, exps


def compile_float(f: Poly):
    n = len(f.vars)
    if not f.terms:
        return lambda v: 0.0
    pieces = []
    for e, c in f.terms.items():
        factors = [repr(float(c))]
        for i, k in enumerate(e):
            if k == 1:
                factors.append(f"v[{i}]")
            elif k:
                factors.append(f"v[{i}]**{k}")
        pieces.append("*".join(factors))
    src = "lambda v: " + " + ".join(pieces)
    fn = eval(src, {"__builtins__": {}})  # generated from numeric literals only
    fn.nvars = n
    return fn


def compile_numpy(f: Poly):
    coeffs, exps = _float_terms(f)

    def evaluate(points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :]
        if not len(coeffs):
            return np.zeros(pts.shape[0])
        out = np.zeros(pts.shape[0])
        for c, e in zip(coeffs, exps):
            t = np.full(pts.shape[0], c)
            for i in np.nonzero(e)[0]:
                t = t * pts[:, i] ** e[i]
            out += t
        return out

    return evaluate


def abs_term_scale(f: Poly, values) -> float:
    """Sum of absolute term magnitudes at a float point: the natural scale for |f|."""
    tot = 0.0
    for e, c in f.terms.items():
        t = abs(float(c))
        for i, k in enumerate(e):
            if k:
                t *= abs(values[i]) ** k
        tot += t
    return tot


# ----------------------------------------------------------------- text form

def _format_monomial(vars: VarSet, e) -> str:
    parts = []
    for n, k in zip(vars.names, e):
        if k == 1:
            parts.append(n)
        elif k:
            parts.append(f"{n}^{k}")
    return "*".join(parts)


def format_poly(f: Poly) -> str:
    if not f.terms:
        return "0"
    chunks: list[tuple[bool, str]] = []
    for e, c in f.sorted_terms():
        mono = _format_monomial(f.vars, e)
        for comp, tok in zip(c.components(), ("", "r2", "r3", "r6")):
            if comp == 0:
                continue
            neg = comp < 0
            mag = -comp if neg else comp
            factors = []
            if mag != 1 or (not tok and not mono):
                factors.append(str(mag.numerator) if mag.denominator == 1
                               else f"{mag.numerator}/{mag.denominator}")
            if tok:
                factors.append(tok)
            if mono:
                factors.append(mono)
            chunks.append((neg, "*".join(factors)))
    out = ("-" if chunks[0][0] else "") + chunks[0][1]
    for neg, body in chunks[1:]:
        out += (" - " if neg else " + ") + body
    return out


_TERM_SPLIT = re.compile(r"([+-])")
_POW_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)(?:\^(\d+))?$")


def parse_poly(text: str, vars: VarSet) -> Poly:
    """Parse the polynomial text format over ``vars``."""
    s = re.sub(r"\s+", "", text).replace("**", "^")
    if not s:
        raise PolyParseError("empty polynomial text")
    pieces = _TERM_SPLIT.split(s)
    sign = 1
    acc: dict[tuple, FieldElem] = {}
    expect_term = True
    n = len(vars)
    for piece in pieces:
        if piece in ("+", "-"):
            if piece == "-":
                sign = -sign
            expect_term = True
            continue
        if piece == "":
            continue
        if not expect_term:
            raise PolyParseError(f"missing operator before {piece!r}")
        coef = FieldElem(sign)
        exp = [0] * n
        for fac in piece.split("*"):
            if not fac:
                raise PolyParseError(f"malformed term {piece!r} in {text!r}")
            val = parse_factor(fac)
            if val is not None:
                coef = coef * val
                continue
            m = _POW_RE.match(fac)
            if not m:
                raise PolyParseError(f"bad factor {fac!r} in {text!r}")
            name = m.group(1)
            if name not in vars:
                raise PolyParseError(f"unknown variable {name!r} in {text!r}")
            exp[vars.index(name)] += int(m.group(2) or 1)
        e = tuple(exp)
        acc[e] = acc.get(e, ZERO) + coef
        sign = 1
        expect_term = False
    if expect_term:
        raise PolyParseError(f"dangling operator in {text!r}")
    return Poly(vars, acc)


def poly_from_string(text: str, vars: VarSet) -> Poly:
    return parse_poly(text, vars)


# ------------------------------------------------------------------- helpers

def variables(vars: VarSet) -> list[Poly]:
    return [Poly.var(vars, n) for n in vars.names]


def format_matrix(m) -> str:
    rows = [[format_poly(e) if isinstance(e, Poly) else format_field(FieldElem.coerce(e))
             for e in row] for row in m]
    return "\n".join("[" + ", ".join(r) + "]" for r in rows)
