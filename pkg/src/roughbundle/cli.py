"""Command line front-end.

    roughbundle algebra star "[]" "[]" --basis zeta
    roughbundle lift path.json --alpha 0.3 --out rp.json
    roughbundle approx rp.json --tautological --beta 0.15 --mesh-levels 2-6
    roughbundle rde rp.json field.json --xi 1.0
    roughbundle metric rp1.json z1.json rp2.json z2.json

Exit status: 0 on success, 1 when a reported threshold fails, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import goldens
from .algebra import (
    antipode, convolution, coproduct, grafting, natural_growth, parse_series, primitive_projector,
    reduced_coproduct, series, symmetry_factor, top,
)
from .forest import ForestParseError, enumerate_forests, parse_forest
from .roughpath import AlphaError


class UsageError(Exception):
    pass


def _out(text: str, args):
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _alphabet(args):
    return tuple(args.alphabet.split(",")) if args.alphabet else ("",)


# ---------------------------------------------------------------- algebra

def _golden_star() -> tuple:
    bad = []
    for a, b, want in goldens.ZETA_PRODUCTS:
        got = convolution(parse_forest(a), parse_forest(b), basis="zeta").format("z")
        if got != parse_series(want).format("z"):
            bad.append(f"z({a}) * z({b}): got {got}, want {want}")
    for a, b, want in goldens.DELTA_PRODUCTS:
        got = convolution(parse_forest(a), parse_forest(b))
        if got != parse_series(want):
            bad.append(f"{a} * {b}: got {got}, want {want}")
    return len(goldens.ZETA_PRODUCTS) + len(goldens.DELTA_PRODUCTS), bad


def _golden_primitives(N: int) -> tuple:
    from .primitives import build_primitive_basis

    basis = build_primitive_basis(("",), N)
    bad = []
    table = [g for g in goldens.PRIMITIVES if parse_forest(g[0]).degree <= N]
    got = [(str(src), p) for src, p in zip(basis.sources, basis.primitives)]
    if len(got) != len(table):
        bad.append(f"basis has {len(got)} vectors, table has {len(table)}")
    for (src, want), (gsrc, gval) in zip(table, got):
        if src != gsrc or gval != parse_series(want):
            bad.append(f"pi1({src}): got pi1({gsrc}) = {gval}, want {want}")
    dims = tuple(basis.primitive_dimensions())
    if dims != goldens.PRIMITIVE_DIMENSIONS[:N]:
        bad.append(f"dimensions {dims}")
    return len(table), bad


def _golden_top(N: int) -> tuple:
    from .primitives import build_primitive_basis

    basis = build_primitive_basis(("",), N)
    bad, notes, count = [], [], 0
    for word, want, printed in goldens.TOP_BASIS:
        if sum(basis.primitive_degree(i) for i in word) > N:
            continue
        count += 1
        got = top(*(basis.primitives[i] for i in word))
        if got != parse_series(want):
            bad.append(f"top{word}: got {got}, want {want}")
        if printed is not None:
            notes.append(f"top{word}: printed table reads {printed}; degree-consistent form {want}")
    return count, bad, notes


def cmd_algebra(args) -> int:
    op = args.op
    lits = args.forests
    basis = args.basis
    fmt = (lambda s: s.format("z")) if basis == "zeta" else str
    if op == "star":
        if args.golden:
            n, bad = _golden_star()
            for b in bad:
                print("MISMATCH", b)
            _out(f"OK: {n} products match" if not bad else f"FAIL: {len(bad)} of {n} differ", args)
            return 0 if not bad else 1
        if len(lits) < 2:
            raise UsageError("star needs at least two operands")
        acc = series(lits[0])
        for lit in lits[1:]:
            acc = convolution(acc, series(lit), cutoff=args.cutoff, basis=basis)
        _out(fmt(acc), args)
    elif op in ("coproduct", "reduced"):
        fn = coproduct if op == "coproduct" else reduced_coproduct
        _out("\n".join(str(fn(parse_forest(l))) for l in lits), args)
    elif op == "antipode":
        _out("\n".join(str(antipode(parse_forest(l))) for l in lits), args)
    elif op == "graft":
        _need(lits, 2, op)
        _out(str(grafting(series(lits[0]), series(lits[1]))), args)
    elif op == "growth":
        _need(lits, 2, op)
        acc = series(lits[0])
        for lit in lits[1:]:
            acc = natural_growth(acc, series(lit))
        _out(str(acc), args)
    elif op == "pi1":
        _out("\n".join(str(primitive_projector(series(l))) for l in lits), args)
    elif op == "symmetry":
        _out("\n".join(str(symmetry_factor(parse_forest(l))) for l in lits), args)
    elif op == "enumerate":
        lines = ["degree,forest,symmetry_factor"]
        for h in enumerate_forests(args.N, _alphabet(args)):
            lines.append(f"{h.degree},{h},{symmetry_factor(h)}")
        _out("\n".join(lines), args)
    elif op == "primitives":
        from .primitives import build_primitive_basis

        if args.golden:
            n, bad = _golden_primitives(args.N)
            for b in bad:
                print("MISMATCH", b)
            _out(f"OK: {n} basis vectors match" if not bad else f"FAIL: {len(bad)} mismatches", args)
            return 0 if not bad else 1
        B = build_primitive_basis(_alphabet(args), args.N)
        _out("\n".join(f"pi1({s}) = {p}" for s, p in zip(B.sources, B.primitives)), args)
    elif op == "ptop":
        from .primitives import build_primitive_basis

        if args.golden:
            n, bad, notes = _golden_top(args.N)
            for b in bad:
                print("MISMATCH", b)
            for note in notes:
                print("NOTE", note)
            _out(f"OK: {n} natural-growth elements match" if not bad else f"FAIL: {len(bad)} mismatches", args)
            return 0 if not bad else 1
        B = build_primitive_basis(_alphabet(args), args.N)
        lines = []
        for e in B.ptop:
            word = ",".join(f"p{i + 1}" for i in e.word)
            lines.append(f"top({word}) = {e.value}    dual: {B.dual(e.word)}")
        _out("\n".join(lines), args)
    else:
        raise UsageError(f"unknown algebra operation {op!r}")
    return 0


def _need(lits, k, op):
    if len(lits) != k:
        raise UsageError(f"{op} needs exactly {k} operands")


# ------------------------------------------------------------------- lift

def cmd_lift(args) -> int:
    from .io import gridpath_from_json, roughpath_to_json
    from .roughpath import chen_defect, lift_piecewise_linear, multiplicativity_defect

    if args.alpha is None:
        raise UsageError("--alpha is required")
    path = gridpath_from_json(args.path)
    X = lift_piecewise_linear(path, args.alpha)
    text = roughpath_to_json(X)
    _out(text, args)
    report = {"N": X.N, "chen_defect": chen_defect(X, seed=args.seed or 0),
              "multiplicativity_defect": multiplicativity_defect(X)}
    print(json.dumps(report), file=sys.stderr)
    return 0


# ----------------------------------------------------------------- approx

def _levels(spec: str) -> list:
    out = []
    for part in spec.split(","):
        if "-" in part:
            a, b = part.split("-")
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    return out


def cmd_approx(args) -> int:
    from .approximation import convergence_study
    from .controlled import tautological
    from .io import controlled_from_json, roughpath_from_json, write_csv

    X = roughpath_from_json(args.roughpath)
    if args.alpha is not None:
        X = X.with_alpha(args.alpha)
    beta = args.beta if args.beta is not None else X.alpha / 2
    if not 0 < beta < X.alpha:
        raise UsageError("beta must satisfy 0 < beta < alpha")
    levels = _levels(args.mesh_levels)
    if len(levels) < 2:
        raise UsageError("insufficient scales for fit")
    if args.controlled:
        Z = controlled_from_json(args.controlled, X)
    else:
        Z = tautological(X)
    rep = convergence_study(Z, beta, levels, jobs=args.jobs or 1)
    rows = [(lv, th, er) for lv, th, er in rep.rows()]
    text = write_csv(rows, ["level", "theta", "error_beta"])
    slope = "exact" if rep.fit.exact else f"{rep.fit.slope:.6f}"
    text += f"# slope={slope} threshold={rep.threshold:.6f} monotone={rep.monotone} passed={rep.passed}\n"
    _out(text.rstrip("\n"), args)
    return 0 if rep.passed else 1


# -------------------------------------------------------------------- rde

def cmd_rde(args) -> int:
    from .io import field_from_json, roughpath_from_json, write_csv
    from .rde import RDEDivergence, ito_lyons_stability, solve_rde
    from .roughpath import GridPath, lift_piecewise_linear

    X = roughpath_from_json(args.roughpath)
    F = field_from_json(args.field)
    xi = [float(v) for v in args.xi.split(",")]
    if len(xi) != F.n:
        raise UsageError(f"--xi needs {F.n} values")
    try:
        sol = solve_rde(X, F, xi)
    except RDEDivergence as exc:
        print(f"error: divergence guard: {exc}", file=sys.stderr)
        return 1
    header = ["t"] + [f"Y{k}" for k in range(F.n)]
    rows = [[t] + list(y) for t, y in zip(X.times, sol.Y)]
    if args.lifted:
        for k, Z in enumerate(sol.lifted):
            for j, h in enumerate(Z.forests[1:], start=1):
                header.append(f"Y{k}:{h}")
                for r, v in zip(rows, Z.values[:, j]):
                    r.append(v)
    text = write_csv(rows, header)
    if args.stability:
        if not X.geometric:
            raise UsageError("--stability perturbs the underlying path and needs a lifted piecewise-linear driver")
        rng = np.random.default_rng(args.seed or 0)
        direction = rng.normal(size=(len(X.times), X.dim))
        direction[0] = 0
        path_vals = np.stack([X.column(parse_forest(f"[{a}]")) for a in X.alphabet], axis=1)
        lines = ["scale,ratio"]
        for s in [1e-1, 1e-2, 1e-3, 1e-4]:
            X2 = lift_piecewise_linear(GridPath(X.times, path_vals + s * direction), X.alpha, X.alphabet)
            rep = ito_lyons_stability(xi, X, [v + s for v in xi], X2, F)
            lines.append(f"{s:g},{rep['ratio']!r}")
        print("\n".join(lines), file=sys.stderr)
    _out(text.rstrip("\n"), args)
    return 0


# ----------------------------------------------------------------- metric

def cmd_metric(args) -> int:
    from .bundle import BundlePoint, flat_distance, truncated_ns_distance, TubeSpec
    from .io import control_from_json, controlled_from_json, roughpath_from_json

    X1 = roughpath_from_json(args.rp1)
    X2 = roughpath_from_json(args.rp2)
    x = BundlePoint(controlled_from_json(args.z1, X1))
    y = BundlePoint(controlled_from_json(args.z2, X2))
    report = {"flat_distance": flat_distance(x, y)}
    if args.tube:
        specs = []
        for path in args.tube:
            with open(path) as fh:
                d = json.load(fh)
            specs.append(TubeSpec(control_from_json(d["control"]), roughpath_from_json(d["center"]),
                                  float(d["radius"]), float(d["epsilon"])))
        report["tube_distance"] = truncated_ns_distance(specs, x, y)
    _out(json.dumps(report), args)
    return 0


# ----------------------------------------------------------------- parser

def _global_flags(p, suppress: bool):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--alpha", type=float, default=d, help="Hölder exponent (1/alpha must not be an integer)")
    p.add_argument("--beta", type=float, default=d, help="weaker exponent for convergence studies")
    p.add_argument("--epsilon", type=float, default=d, help="regularity gap of control data")
    p.add_argument("--jobs", type=int, default=d, help="worker threads")
    p.add_argument("--seed", type=int, default=d, help="seed for sampled diagnostics")
    p.add_argument("--out", default=d, help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="roughbundle", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("algebra", help="forest algebra computations")
    _global_flags(pa, suppress=True)
    pa.add_argument("op", choices=["star", "coproduct", "reduced", "antipode", "graft", "growth", "pi1",
                                   "symmetry", "enumerate", "primitives", "ptop"])
    pa.add_argument("forests", nargs="*")
    pa.add_argument("--basis", choices=["delta", "zeta"], default="delta")
    pa.add_argument("--cutoff", type=int, default=None)
    pa.add_argument("--N", type=int, default=4)
    pa.add_argument("--alphabet", default=None, help="comma-separated labels")
    pa.add_argument("--golden", action="store_true", help="compare against the embedded tables")
    pa.set_defaults(func=cmd_algebra)

    pl = sub.add_parser("lift", help="lift a piecewise-linear path")
    _global_flags(pl, suppress=True)
    pl.add_argument("path")
    pl.set_defaults(func=cmd_lift)

    pp = sub.add_parser("approx", help="piecewise-linear approximation study")
    _global_flags(pp, suppress=True)
    pp.add_argument("roughpath")
    pp.add_argument("controlled", nargs="?", default=None)
    pp.add_argument("--tautological", action="store_true", help="use the driver coordinate as the controlled path")
    pp.add_argument("--mesh-levels", default="2-6")
    pp.set_defaults(func=cmd_approx)

    pr = sub.add_parser("rde", help="solve a rough differential equation")
    _global_flags(pr, suppress=True)
    pr.add_argument("roughpath")
    pr.add_argument("field")
    pr.add_argument("--xi", required=True, help="comma-separated initial value")
    pr.add_argument("--lifted", action="store_true", help="append lifted solution components")
    pr.add_argument("--stability", action="store_true", help="report the stability ratio sweep on stderr")
    pr.set_defaults(func=cmd_rde)

    pm = sub.add_parser("metric", help="bundle distances between two points")
    _global_flags(pm, suppress=True)
    pm.add_argument("rp1")
    pm.add_argument("z1")
    pm.add_argument("rp2")
    pm.add_argument("z2")
    pm.add_argument("--tube", action="append", help="tube spec JSON (repeatable)")
    pm.set_defaults(func=cmd_metric)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, AlphaError, ForestParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
