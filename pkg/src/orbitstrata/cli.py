"""Command-line front end: ``orbitstrata <command> [options]``.

Exit status is 0 when everything passes, 1 when a check fails and 2 for
usage or input errors.  ``--format records`` prints one JSON object per line
with floats at 17 significant digits; text mode prints 6.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .example_o3 import CHECK_GROUPS, BundleCorrupted, load_bundle, verify_bundle
from .pmatrix import classify_point, table_report
from .phase_min import EmptyRegion, Potential, parse_grid, phase_scan
from .polyring import PolyParseError, format_poly
from .specfile import SpecError
from .strata_param import SamplingExhausted, sample_delta

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ output

def _num(x, digits: int) -> str:
    return format(float(x), f".{digits}g")


def record_json(obj) -> str:
    """JSON text with floats at 17 significant digits; non-finite floats become null."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj, 17) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {record_json(v)}"
                               for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(record_json(v) for v in obj) + "]"
    return json.dumps(str(obj))


def _emit_records(records, out) -> None:
    for r in records:
        out.write(record_json(r) + "\n")


def _vec(v, digits=6) -> str:
    return "(" + ", ".join(_num(x, digits) for x in v) + ")"


# ---------------------------------------------------------------- commands

def cmd_verify(args, out) -> int:
    try:
        bundle = load_bundle(args.bundle)
    except BundleCorrupted as exc:
        out.write(f"FAIL  [bundle sanity] {exc}\n")
        return EXIT_FAIL
    only = _split(args.only)
    samples = args.samples or 10000
    report = verify_bundle(bundle, only=only, seed=args.seed,
                           equivalence_samples=samples,
                           rank_samples=max(1, samples // 10),
                           roundtrip_samples=max(1, samples // 50))
    if args.format == "records":
        _emit_records(report.to_records(), out)
    else:
        out.write(report.to_text() + "\n")
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_pmatrix(args, out) -> int:
    bundle = load_bundle(args.bundle)
    pm = bundle.pmatrix_so3() if args.so3 else bundle.pmatrix()
    entries = [(f"P{a + 1}{b + 1}", pm.hat[a][b]) for a in range(pm.q) for b in range(a, pm.q)]
    if args.det:
        entries.append(("det", pm.det()))
    if args.format == "records":
        _emit_records(({"entry": k, "poly": format_poly(v)} for k, v in entries), out)
    else:
        for k, v in entries:
            out.write(f"{k} = {format_poly(v)}\n")
    return EXIT_OK


def cmd_strata(args, out) -> int:
    bundle = load_bundle(args.bundle)
    labels = _split(args.only) or list(bundle.strata)
    records = []
    for lbl in labels:
        try:
            p = bundle.param(lbl)
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from None
        records.append({
            "label": lbl,
            "dimension": p.rank_target,
            "lambda": [f"{n} = {format_poly(f)}" for n, f in
                       zip(p.spec.lambda_names, p.spec.lambda_polys)],
            "phi": [format_poly(f) for f in p.phi],
            "lambda_matrix": [[format_poly(e) for e in row] for row in p.lambda_hat],
            "delta": [f"{format_poly(g)} > 0" for g in p.delta_ineqs],
        })
    if args.format == "records":
        _emit_records(records, out)
        return EXIT_OK
    for r in records:
        out.write(f"{r['label']}  dimension {r['dimension']}\n")
        for line in r["lambda"]:
            out.write(f"  {line}\n")
        for n, f in zip(bundle.mib.names, r["phi"]):
            out.write(f"  {n}(phi) = {f}\n")
        for i, row in enumerate(r["lambda_matrix"]):
            out.write(f"  Lambda row {i + 1}: [{', '.join(row)}]\n")
        out.write(f"  Delta: {'; '.join(r['delta']) or '(whole space)'}\n")
    if not args.only:
        out.write("\n" + table_report(bundle.rules) + "\n")
    return EXIT_OK


def cmd_classify(args, out) -> int:
    bundle = load_bundle(args.bundle)
    point = args.point
    if len(point) == len(bundle.mib):
        pm, relations, rules = bundle.pmatrix(), (), bundle.rules
    elif len(point) == len(bundle.mib6):
        pm, relations, rules = bundle.pmatrix_so3(), (bundle.so3_relation,), ()
    else:
        raise UsageError(f"classify expects {len(bundle.mib)} coordinates "
                         f"(or {len(bundle.mib6)} for the SO(3) basis), got {len(point)}")
    v = classify_point(pm, point, relations=relations, tol=args.tol, rules=rules)
    rec = {"point": list(v.point), "psd": v.psd, "rank": v.rank, "on_Z": v.on_Z,
           "stratum": v.stratum_label, "satisfied": list(v.satisfied),
           "eigenvalues": list(v.eigenvalues), "verdict": v.describe()}
    if args.format == "records":
        _emit_records([rec], out)
    else:
        out.write(f"point        {_vec(v.point)}\n")
        out.write(f"verdict      {v.describe()}\n")
        out.write(f"rank         {v.rank}\n")
        out.write(f"eigenvalues  {_vec(v.eigenvalues)}\n")
        if v.satisfied:
            out.write("relations    " + "; ".join(f"{s} = 0" for s in v.satisfied) + "\n")
    return EXIT_OK


def cmd_minimize(args, out) -> int:
    bundle = load_bundle(args.bundle)
    text = args.potential
    if text.startswith("@"):
        text = Path(text[1:]).read_text()
    pot = Potential.from_text(" ".join(text.split()), bundle.pvars, radius=args.radius)
    grid = parse_grid(args.grid or "")
    missing = [a for a in pot.params if a not in grid[0]]
    if missing:
        raise UsageError(f"--grid must assign {', '.join(missing)}")
    results = phase_scan(pot, bundle, grid, seeds=args.seeds, seed=args.seed,
                         tol=args.tol)
    labels = list(bundle.strata)
    if args.format == "records":
        _emit_records(({"params": r.params, "winner": r.winner, "tie": list(r.tie),
                        "margin": r.margin,
                        "values": {k: m.value for k, m in r.minima.items()},
                        "boundary": [k for k, m in r.minima.items() if m.boundary],
                        "empty": sorted(r.errors)} for r in results), out)
        return EXIT_OK
    head = [f"{a:>10}" for a in pot.params] + [f"{'winner':>8}"] + [f"{lbl:>12}" for lbl in labels]
    out.write(" ".join(head) + "\n")
    for r in results:
        cells = [f"{_num(r.params[a], 6):>10}" for a in pot.params]
        win = (r.winner or "-") + ("*" if r.tie else "")
        cells.append(f"{win:>8}")
        for lbl in labels:
            m = r.minima.get(lbl)
            cell = "empty" if m is None else _num(m.value, 6) + ("b" if m.boundary else "")
            cells.append(f"{cell:>12}")
        out.write(" ".join(cells) + "\n")
    out.write("* tie, resolved toward the lower-dimensional stratum; "
              "b minimum reached only on the stratum boundary\n")
    return EXIT_OK


def cmd_sample(args, out) -> int:
    bundle = load_bundle(args.bundle)
    try:
        p = bundle.param(args.label)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    res = sample_delta(p, args.samples or 10, seed=args.seed)
    rows = [{"lambda": list(lam), "p": p.phi_float(lam).tolist()} for lam in res.points]
    if args.format == "records":
        _emit_records(rows, out)
    else:
        out.write(f"{args.label}: {len(rows)} points, acceptance {_num(res.acceptance, 6)}\n")
        for r in rows:
            out.write(f"lambda {_vec(r['lambda'])}  p {_vec(r['p'])}\n")
    return EXIT_OK


def _split(values) -> list[str]:
    out = []
    for v in values or []:
        out += [s for s in v.split(",") if s]
    return out


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--bundle", type=Path, default=None,
                        help="bundle directory (default: built-in O(3) data)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=None,
                        help="relative rank tolerance (default 1e-9; 1e-7 tie window for minimize)")
    common.add_argument("--format", choices=("text", "records"), default="text")
    common.add_argument("--samples", type=int, default=None)

    ap = argparse.ArgumentParser(prog="orbitstrata",
                                 description="Orbit-space strata from P-matrices.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("verify", parents=[common], help="recompute and check the bundle")
    s.add_argument("--only", action="append",
                   help=f"check groups to run: {', '.join(CHECK_GROUPS)}")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("pmatrix", parents=[common], help="print the recomputed P-matrix")
    s.add_argument("--so3", action="store_true", help="use the six-element SO(3) basis")
    s.add_argument("--det", action="store_true", help="also print the determinant")
    s.set_defaults(func=cmd_pmatrix)

    s = sub.add_parser("strata", parents=[common], help="stratum parametrizations")
    s.add_argument("--only", action="append", help="stratum labels")
    s.set_defaults(func=cmd_strata)

    s = sub.add_parser("classify", parents=[common], help="locate a point p in the orbit space")
    s.add_argument("point", type=float, nargs="+")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("minimize", parents=[common], help="ground-state stratum of a potential")
    s.add_argument("potential", help="polynomial in p1.. and a1..; @FILE reads a file")
    s.add_argument("--grid", help='parameter grid, e.g. "a1=-1:1:11,a2=0.5"')
    s.add_argument("--seeds", type=int, default=32, help="multistart count")
    s.add_argument("--radius", type=float, default=10.0, help="cutoff p1 <= radius^2")
    s.set_defaults(func=cmd_minimize)

    s = sub.add_parser("sample", parents=[common], help="sample points of a stratum region")
    s.add_argument("label")
    s.set_defaults(func=cmd_sample)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.tol is None:
        args.tol = 1e-7 if args.command == "minimize" else 1e-9
    if args.tol <= 0:
        sys.stderr.write("orbitstrata: --tol must be positive\n")
        return EXIT_USAGE
    try:
        return args.func(args, out)
    except (UsageError, SpecError, PolyParseError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        sys.stderr.write(f"orbitstrata: {msg}\n")
        return EXIT_USAGE
    except (EmptyRegion, SamplingExhausted) as exc:
        sys.stderr.write(f"orbitstrata: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
