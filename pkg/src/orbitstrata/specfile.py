"""Readers and writers for the on-disk data formats.

Polynomial files hold named entries, one ``name = polynomial`` per entry; an
entry may continue over following lines, and ``#`` starts a comment::

    # degree-2 invariants
    p1 = x1^2 + x2^2
    p2 = x2^2

Stratum files are YAML documents::

    label: S4
    dimension: 4
    typical_point: [1, 1, 0, 0, 0, 0, 1, 1]
    isotropy:
      o3: [[[-1, 0, 0], [0, 1, 0], [0, 0, 1]]]   # lifted through the O(3) action
    fixed_space: [x1, x2, x5, x7, x8]             # expected V coordinates
    k_generators: [...]                           # matrices on V coordinates
    lambda:
      - [l1, "x1"]
      - [l2, "x2^2 + x5^2"]
    rule: {rank: 4, equalities: [...], inequalities: [...]}
    reference: {phi: [...], lambda_hat: [[...]], jacobian: [[...]], delta: [...]}

Matrix entries are integers or coefficient strings such as ``"1/2*r3"``.
Isotropy generators may alternatively be given as full ``n x n`` matrices
under ``isotropy: {matrix: [...]}``.
"""
from __future__ import annotations

import re
from pathlib import Path
from typing import Mapping

import yaml

from .group_rep import O3_TEST_GENERATORS, fixed_space, rep_from_O3, restrict_to
from .numfield import FieldElem
from .pmatrix import StratumRule
from .polyring import Poly, PolyParseError, VarSet, format_poly, parse_poly
from .strata_param import StratumSpec


class SpecError(ValueError):
    """Malformed data file."""


_ENTRY_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=(.*)$")


def read_poly_entries(text: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        m = _ENTRY_RE.match(line)
        if m:
            current = m.group(1)
            if current in entries:
                raise SpecError(f"line {lineno}: duplicate entry {current!r}")
            entries[current] = m.group(2)
        elif current is None:
            raise SpecError(f"line {lineno}: text before the first entry")
        else:
            entries[current] += " " + line.strip()
    return entries


def parse_poly_entries(text: str, vars: VarSet) -> dict[str, Poly]:
    out = {}
    for name, body in read_poly_entries(text).items():
        try:
            out[name] = parse_poly(body, vars)
        except PolyParseError as exc:
            raise SpecError(f"entry {name}: {exc}") from None
    return out


def load_poly_file(path, vars: VarSet) -> dict[str, Poly]:
    return parse_poly_entries(Path(path).read_text(), vars)


def format_poly_entries(entries: Mapping[str, Poly], header: str = "") -> str:
    lines = [f"# {h}" for h in header.splitlines()] if header else []
    lines += [f"{name} = {format_poly(p)}" for name, p in entries.items()]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- matrices

def parse_scalar(v) -> FieldElem:
    if isinstance(v, bool):
        raise SpecError(f"boolean {v!r} is not a matrix entry")
    if isinstance(v, int):
        return FieldElem(v)
    if isinstance(v, str):
        try:
            return FieldElem.coerce(v)
        except (PolyParseError, ZeroDivisionError) as exc:
            raise SpecError(f"bad coefficient {v!r}: {exc}") from None
    raise SpecError(f"entry {v!r} must be an integer or an exact coefficient string")


def parse_matrix(rows) -> list[list[FieldElem]]:
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise SpecError(f"matrix must be a list of rows, got {rows!r}")
    width = {len(r) for r in rows}
    if len(width) > 1:
        raise SpecError("ragged matrix")
    return [[parse_scalar(v) for v in r] for r in rows]


def format_scalar(v: FieldElem):
    if v.is_rational() and v.a.denominator == 1:
        return int(v.a)
    return str(v)


def format_matrix_data(m) -> list:
    return [[format_scalar(v) for v in row] for row in m]


# ----------------------------------------------------------------- strata

def _isotropy(doc: Mapping, key: str, n: int) -> list:
    iso = doc.get("isotropy") or {}
    if not isinstance(iso, Mapping):
        raise SpecError("isotropy must be a mapping")
    if key in iso:
        gens = [parse_matrix(g) for g in iso[key] or []]
        if n == 8 and key in ("o3", "so3"):
            return [rep_from_O3(g) for g in gens]
        return gens
    if key == "o3" and "matrix" in iso:
        return [parse_matrix(g) for g in iso["matrix"] or []]
    return []


def raw_isotropy(doc: Mapping, key: str) -> list:
    iso = doc.get("isotropy") or {}
    return [parse_matrix(g) for g in iso.get(key) or []]


def _named_poly(text, vars: VarSet, named: Mapping[str, Poly]) -> Poly:
    text = str(text).strip()
    if text in named:
        return named[text]
    return parse_poly(text, vars)


def parse_stratum(doc: Mapping, xvars: VarSet, pvars: VarSet,
                  source: str = "<stratum>", basis=None,
                  named: Mapping[str, Poly] | None = None) -> StratumSpec:
    """Build a StratumSpec; ``named`` maps bare tokens in rules (e.g. ``A``) to polynomials."""
    try:
        return _parse_stratum(doc, xvars, pvars, basis, named or {})
    except SpecError as exc:
        raise SpecError(f"{source}: {exc}") from None
    except (KeyError, TypeError, PolyParseError) as exc:
        raise SpecError(f"{source}: {type(exc).__name__}: {exc}") from None


def _parse_stratum(doc, xvars, pvars, basis, named) -> StratumSpec:
    if not isinstance(doc, Mapping):
        raise SpecError("stratum document must be a mapping")
    for key in ("label", "dimension", "typical_point"):
        if key not in doc:
            raise SpecError(f"missing key {key!r}")
    n = len(xvars)
    h_gens = _isotropy(doc, "o3", n)
    for h in h_gens:
        if len(h) != n:
            raise SpecError(f"isotropy generator is not {n}x{n}")
    space = fixed_space(h_gens, n)

    declared = doc.get("fixed_space")
    if space.coords is not None:
        names = [xvars.names[i] for i in space.coords]
        if declared is not None and list(declared) != names:
            raise SpecError(f"declared fixed space {declared} but H fixes {names}")
        vvars = VarSet(names)
    else:
        vnames = doc.get("v_names") or [f"v{i + 1}" for i in range(space.dim)]
        if len(vnames) != space.dim:
            raise SpecError("v_names must match the fixed-space dimension")
        vvars = VarSet(vnames)

    k_gens = [parse_matrix(g) for g in doc.get("k_generators") or []]
    k_o3 = doc.get("k_o3")
    if k_o3 is not None:
        mats = O3_TEST_GENERATORS if k_o3 == "test_generators" else \
            [parse_matrix(g) for g in k_o3]
        k_gens += [restrict_to(space, rep_from_O3(g)) for g in mats]
    for g in k_gens:
        if len(g) != space.dim:
            raise SpecError(f"K generator must be {space.dim}x{space.dim}")
    k_elements = doc.get("k_elements")
    if k_elements is not None:
        k_elements = [parse_matrix(g) for g in k_elements]

    lam = doc.get("lambda") or []
    lnames, lpolys = [], []
    if doc.get("lambda_from_basis"):
        if basis is None or space.coords != list(range(n)):
            raise SpecError("lambda_from_basis needs a basis and V equal to the whole space")
        lnames = [f"l{i + 1}" for i in range(len(basis.polys))]
        lpolys = [p.relabel(vvars) for p in basis.polys]
    for item in lam:
        if not (isinstance(item, list) and len(item) == 2):
            raise SpecError(f"lambda entries are [name, polynomial] pairs, got {item!r}")
        lnames.append(str(item[0]))
        lpolys.append(parse_poly(str(item[1]), vvars))
    lvars = VarSet(lnames, [max(p.wdegree(), 1) for p in lpolys]) if lnames else VarSet(())

    tp = [parse_scalar(v) for v in doc["typical_point"]]
    if len(tp) != n:
        raise SpecError(f"typical point needs {n} coordinates")

    rule = None
    if "rule" in doc:
        r = doc["rule"]
        rule = StratumRule(
            str(doc["label"]), int(r.get("rank", doc["dimension"])),
            [_named_poly(e, pvars, named) for e in r.get("equalities") or []],
            [_named_poly(e, pvars, named) for e in r.get("inequalities") or []])

    ref = {}
    rdoc = doc.get("reference") or {}
    if "phi" in rdoc:
        ref["phi"] = [parse_poly(str(e), lvars) for e in rdoc["phi"]]
    for key in ("lambda_hat", "jacobian"):
        if key in rdoc:
            ref[key] = [[parse_poly(str(e), lvars) for e in row] for row in rdoc[key]]
    if "delta" in rdoc:
        ref["delta"] = [parse_poly(str(e), lvars) for e in rdoc["delta"] or []]
    if "table_equalities" in rdoc:
        ref["table_equalities"] = [parse_poly(str(e), pvars) for e in rdoc["table_equalities"]]

    extra = {k: doc[k] for k in ("description", "sub_strata", "isotropy_name", "k_order") if k in doc}
    extra["isotropy_o3"] = raw_isotropy(doc, "o3")
    extra["isotropy_so3"] = raw_isotropy(doc, "so3")

    return StratumSpec(
        label=str(doc["label"]), n=n, h_gens=h_gens, v_space=space, v_vars=vvars,
        k_gens=k_gens, lambda_names=tuple(lnames), lambda_polys=tuple(lpolys),
        expected_dim=int(doc["dimension"]), typical_point=tp, k_elements=k_elements,
        rule=rule, reference=ref, extra=extra)


def load_stratum(path, xvars: VarSet, pvars: VarSet, basis=None,
                 named: Mapping[str, Poly] | None = None) -> StratumSpec:
    try:
        doc = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise SpecError(f"{path}: {exc}") from None
    return parse_stratum(doc, xvars, pvars, str(path), basis, named)


def load_yaml(path) -> dict:
    try:
        doc = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise SpecError(f"{path}: {exc}") from None
    if not isinstance(doc, dict):
        raise SpecError(f"{path}: expected a mapping")
    return doc


