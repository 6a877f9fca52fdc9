"""Command-line front end.

    mtmf <verb> [args] [--tol T] [--max-terms N] [--grid N] [--emit-csv PATH] [--quiet]

Exit status: 0 success, 1 input error, 2 a numerical gate failed.
``MTMF_BUDGET`` overrides every combinatorial budget.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    BudgetExceededError,
    ExprError,
    MtmfError,
    QuadratureError,
    RankDeficiencyError,
    RecoveryError,
    SingularSystemError,
)

EXIT_OK, EXIT_INPUT, EXIT_GATE = 0, 1, 2
DERIV_GATE = {1: 1e-6, 2: 1e-6, 3: 1e-3, 4: 1e-3}
ORTHO_GATE = 1e-8


class InputError(Exception):
    pass


class GateFailure(Exception):
    def __init__(self, gate: str, measured: float, limit: float):
        super().__init__(f"gate '{gate}' failed: measured {measured:.3e} > {limit:.3e}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, help="absolute tolerance for truncation and gates")
    p.add_argument("--max-terms", type=int, help="cap on series terms")
    p.add_argument("--grid", type=int, help="number of grid points")
    p.add_argument("--emit-csv", metavar="PATH", help="write a CSV table")
    p.add_argument("--quiet", action="store_true", help="print only result lines")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mtmf", description="Multivariate Taylor measure function toolkit")
    sub = parser.add_subparsers(dest="verb", parser_class=_Parser, metavar="verb")

    p = sub.add_parser("eval", help="evaluate an MTMF file at a point")
    p.add_argument("file")
    p.add_argument("--at", type=float, nargs="+", required=True)

    for verb, nfiles in (("inner", 2), ("distance", 2), ("norm", 1)):
        p = sub.add_parser(verb, help=f"{verb} of MTMF files")
        p.add_argument("files", nargs=nfiles)
        p.add_argument("--quad", required=True, help="QuadratureSpec JSON file")

    p = sub.add_parser("gram-schmidt", help="orthonormalise MTMF files")
    p.add_argument("files", nargs="+")
    p.add_argument("--quad", required=True)

    p = sub.add_parser("poly", help="Rodrigues polynomial of a family")
    p.add_argument("family")
    p.add_argument("n", type=int)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=0.0)

    p = sub.add_parser("ortho", help="orthogonality matrix of a family")
    p.add_argument("family")
    p.add_argument("n_max", type=int)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=0.0)

    p = sub.add_parser("zeta", help="zeta(x) or the multivariate zeta(x1, ..., xp)")
    p.add_argument("x", type=float, nargs="+")

    p = sub.add_parser("hyp", help='generalised hypergeometric series, "a1,a2;b1;x"')
    p.add_argument("spec")

    p = sub.add_parser("deriv", help="k-th partial derivative of an MTMF file")
    p.add_argument("file")
    p.add_argument("--axis", type=int, required=True, help="1-based coordinate index")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--at", type=float, nargs="+", required=True)

    p = sub.add_parser("ode-solve", help="linear ODE boundary problem from JSON")
    p.add_argument("file")

    p = sub.add_parser("lie-solve", help="y' = h(x, y), y(0) = 0 by Lie series")
    p.add_argument("--h", required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--check-interval", type=float, nargs=2, metavar=("A", "B"))

    p = sub.add_parser("approx", help="simple-function approximation h_{j,k}")
    p.add_argument("file")
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--domain", type=float, nargs="+", required=True, help="lo hi per axis")

    for sp in sub.choices.values():
        _common(sp)
    return parser


# --------------------------------------------------------------------------
# output


class Output:
    def __init__(self, quiet: bool, stream=None):
        self.quiet = quiet
        self.stream = stream or sys.stdout

    def result(self, text: str) -> None:
        print(text, file=self.stream)

    def info(self, text: str) -> None:
        if not self.quiet:
            print(text, file=self.stream)


def _num(v) -> str:
    """Full-precision, locale-free, deterministic text for CSV."""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(path: str, header: Sequence[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([c if isinstance(c, str) else _num(c) for c in row])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def _fmt(v: float) -> str:
    return f"{v + 0.0:.9g}"


# --------------------------------------------------------------------------
# inputs


def _load_json(path: str):
    p = Path(path)
    if not p.is_file():
        raise InputError(f"file not found: {path}")
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _load_mtmf(path: str, args):
    from .taylor import mtmf_from_dict

    try:
        f = mtmf_from_dict(_load_json(path))
    except (ExprError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from None
    return f.with_policy(_policy(f.policy, args))


def _policy(base, args):
    changes = {}
    if args.tol is not None:
        changes["abs_tol"] = args.tol
    if args.max_terms is not None:
        changes["max_terms"] = args.max_terms
    return replace(base, **changes) if changes else base


def _load_quad(path: str, args):
    from .quadrature import QuadratureSpec

    try:
        q = QuadratureSpec.from_dict(_load_json(path))
    except (ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from None
    if args.tol is not None:
        q = replace(q, abs_tol=args.tol)
    return q


# --------------------------------------------------------------------------
# verbs


def cmd_eval(args, out: Output) -> int:
    f = _load_mtmf(args.file, args)
    value, rep = f.evaluate(args.at)
    err = 4 * np.finfo(float).eps * abs(value) if rep.finite_B and not rep.truncated else f.policy.abs_tol
    out.result(f"f({', '.join(_fmt(v) for v in args.at)}) = {_fmt(value)}  (error <= {err:.1e})")
    out.info(rep.describe())
    if args.emit_csv:
        write_csv(args.emit_csv, [f"x{i + 1}" for i in range(len(args.at))] + ["value", "error"],
                  [list(args.at) + [value, err]])
    if not rep.converged:
        raise GateFailure("series convergence", float(rep.points - rep.points_converged), 0.0)
    return EXIT_OK


def cmd_geometry(args, out: Output) -> int:
    from .geometry import inner_product_detail, norm
    from .taylor import linear_combine

    quad = _load_quad(args.quad, args)
    fs = [_load_mtmf(p, args) for p in args.files]
    if args.verb == "inner":
        r = inner_product_detail(fs[0], fs[1], quad)
        value, err, conv = r.value, r.error, r.converged
        out.result(f"rho = {_fmt(value)}  (error <= {err:.1e})")
    else:
        target = fs[0] if args.verb == "norm" else linear_combine(1.0, fs[0], -1.0, fs[1])
        r = inner_product_detail(target, target, quad)
        value = norm(target, quad)
        err = r.error / (2 * value) if value > 0 else math.sqrt(r.error)
        conv = r.converged
        name = "norm" if args.verb == "norm" else "distance"
        out.result(f"{name} = {_fmt(value)}  (error <= {err:.1e})")
    out.info(f"terms: {r.terms[:10]}{' ...' if len(r.terms) > 10 else ''}; quadrature "
             f"{'converged' if r.converged else 'NOT converged'}")
    if args.emit_csv:
        write_csv(args.emit_csv, ["quantity", "value", "error"], [[args.verb, value, err]])
    if not conv:
        raise GateFailure("quadrature/truncation convergence", err, quad.abs_tol)
    return EXIT_OK


def cmd_gram_schmidt(args, out: Output) -> int:
    from .geometry import gram_matrix, gram_schmidt

    quad = _load_quad(args.quad, args)
    fs = [_load_mtmf(p, args) for p in args.files]
    try:
        es = gram_schmidt(fs, quad)
    except RankDeficiencyError as exc:
        out.result(f"rank deficiency: {exc}")
        return EXIT_GATE
    G = gram_matrix(es, quad)
    dev = float(np.max(np.abs(G - np.eye(len(es)))))
    for i, row in enumerate(G):
        out.result("  ".join(_fmt(v) for v in row) + f"  (error <= {dev:.1e})")
    out.info(f"max |G - I| = {dev:.3e} after orthonormalising {len(es)} functions")
    if args.emit_csv:
        write_csv(args.emit_csv, ["i", "j", "value", "error"],
                  [[i, j, G[i, j], dev] for i in range(len(es)) for j in range(len(es))])
    tol = 1e-8 if args.tol is None else args.tol
    if dev > tol:
        raise GateFailure("orthonormality of the Gram matrix", dev, tol)
    return EXIT_OK


def _family(args):
    from .special import PolynomialFamily

    try:
        return PolynomialFamily.named(args.family, args.alpha, args.beta)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_poly(args, out: Output) -> int:
    from .special import rodrigues_coefficients, rodrigues_text

    fam = _family(args)
    if args.n < 0:
        raise InputError("n must be a natural number")
    out.result(rodrigues_text(fam, args.n))
    out.info(f"{fam.label} P_{args.n} via Rodrigues' formula (exact rational coefficients, error 0)")
    if args.emit_csv:
        coeffs = rodrigues_coefficients(fam, args.n)
        write_csv(args.emit_csv, ["power", "coefficient", "error"],
                  [[k, float(c), 0.0] for k, c in enumerate(coeffs)])
    return EXIT_OK


def cmd_ortho(args, out: Output) -> int:
    from .special import orthogonality_matrix

    fam = _family(args)
    if args.n_max < 0:
        raise InputError("n_max must be a natural number")
    rep = orthogonality_matrix(fam, args.n_max)
    K, E = rep.matrix, rep.errors
    n = K.shape[0]
    off = max((abs(K[i, j]) for i in range(n) for j in range(n) if i != j), default=0.0)
    for i in range(n):
        out.result("  ".join(f"{K[i, j]: .6e}" for j in range(n)) + f"  (error <= {E[i].max():.1e})")
    out.info(f"{fam.label}: max off-diagonal {off:.3e} (gate {ORTHO_GATE:g})")
    if args.emit_csv:
        write_csv(args.emit_csv, ["m", "n", "value", "error"],
                  [[i, j, K[i, j], E[i, j]] for i in range(n) for j in range(n)])
    gate = ORTHO_GATE if args.tol is None else args.tol
    if off > gate:
        raise GateFailure("off-diagonal orthogonality", off, gate)
    return EXIT_OK


def cmd_zeta(args, out: Output) -> int:
    from .special import zeta, zeta_mv
    from .taylor import TruncationPolicy

    policy = TruncationPolicy(abs_tol=1e-15 if args.tol is None else args.tol)
    try:
        r = zeta(args.x[0], policy) if len(args.x) == 1 else zeta_mv(args.x, policy)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    label = ", ".join(f"{v:g}" for v in args.x)
    out.result(f"zeta({label}) = {_fmt(r.value)}  (error <= {r.error:.1e})")
    out.info(f"partial sum to N = {r.N} with {r.corrections} Euler-Maclaurin corrections")
    if args.emit_csv:
        write_csv(args.emit_csv, ["x", "value", "error"], [[label, r.value, r.error]])
    if args.tol is not None and r.error > args.tol:
        raise GateFailure("zeta error bound", r.error, args.tol)
    return EXIT_OK


def _parse_hyp(text: str):
    parts = text.split(";")
    if len(parts) != 3:
        raise InputError(f'hypergeometric spec must look like "a1,a2;b1;x", got {text!r}')

    def nums(s):
        s = s.strip()
        if not s:
            return []
        try:
            return [float(v) for v in s.split(",")]
        except ValueError:
            raise InputError(f"bad parameter list {s!r}") from None

    a, b, x = nums(parts[0]), nums(parts[1]), nums(parts[2])
    if len(x) != 1:
        raise InputError("exactly one argument x is required")
    return a, b, x[0]


def cmd_hyp(args, out: Output) -> int:
    from .special import HYP_POLICY, HypergeometricPoleError, hypergeometric

    a, b, x = _parse_hyp(args.spec)
    policy = _policy(HYP_POLICY, args)
    try:
        r = hypergeometric(a, b, x, policy)
    except HypergeometricPoleError as exc:
        raise InputError(str(exc)) from None
    out.result(f"{len(a)}F{len(b)}({a};{b};{x:g}) = {_fmt(r.value)}  (error <= {r.error:.1e})")
    out.info(r.describe())
    if args.emit_csv:
        write_csv(args.emit_csv, ["value", "error", "terms"], [[r.value, r.error, r.terms]])
    if r.divergent:
        raise GateFailure("series convergence (divergent)", math.inf, policy.abs_tol)
    if not r.converged:
        raise GateFailure("series convergence", r.error, policy.abs_tol)
    return EXIT_OK


def cmd_deriv(args, out: Output) -> int:
    from .calculus import dk_general, fd_check

    f = _load_mtmf(args.file, args)
    j = args.axis - 1
    if not 0 <= j < f.arity:
        raise InputError(f"--axis must lie in 1..{f.arity}")
    if not 0 <= args.order <= 4:
        raise InputError("--order must lie in 0..4")
    if len(args.at) != f.arity:
        raise InputError(f"--at needs {f.arity} coordinates")
    try:
        ev = dk_general(f, j, args.order)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    value = ev.value(args.at)
    err = fd_check(ev, args.at)
    out.result(f"d^{args.order}f/dx{args.axis}^{args.order} = {_fmt(value)}  (fd_check error {err:.1e})")
    out.info(f"{len(ev.ns)} terms, {ev.compositions} composition terms"
             + ("; index set truncated at max_terms" if ev.truncated else ""))
    if args.emit_csv:
        write_csv(args.emit_csv, [f"x{i + 1}" for i in range(f.arity)] + ["value", "fd_error"],
                  [list(args.at) + [value, err]])
    gate = DERIV_GATE.get(args.order, 0.0) if args.tol is None else args.tol
    if args.order > 0 and err > gate:
        raise GateFailure("finite-difference agreement", err, gate)
    return EXIT_OK


def cmd_ode(args, out: Output) -> int:
    from .ode import LodeProblem, SpacetimeSolver, general_solution, recover_representation

    data = _load_json(args.file)
    try:
        prob = LodeProblem.from_dict(data)
    except (ExprError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{args.file}: {exc}") from None
    prob.policy = _policy(prob.policy, args)
    grid = args.grid or 201
    a, b = prob.interval
    xs = np.linspace(a, b, grid)
    if prob.time_dependent:
        solver = SpacetimeSolver(prob)
        times = prob.times or (0.0,)
        rows, worst = [], 0.0
        for t in times:
            f = solver.at(t)
            vals, _ = f.evaluate_many(xs.reshape(-1, 1))
            res = solver.residual(t, grid)
            worst = max(worst, res)
            out.result(f"t = {t:g}: f(t, {_fmt(xs[grid // 2])}) = {_fmt(vals[grid // 2])}  "
                       f"(equation residual {res:.1e})")
            rows.extend([x, t, v, res] for x, v in zip(xs, vals))
        out.info(f"{prob.flavor}: {len(solver.ns)} per-n problems solved once and reused for every t")
        if args.emit_csv:
            write_csv(args.emit_csv, ["x", "t", "f", "residual"], rows)
        if worst > 1e-6:
            raise GateFailure("equation residual", worst, 1e-6)
        return EXIT_OK
    sol = general_solution(prob)
    rep = sol.report(grid)
    ys = sol.y(xs)
    out.result(f"y({_fmt(xs[grid // 2])}) = {_fmt(ys[grid // 2])}  (equation residual {rep.equation:.1e})")
    out.info(rep.describe())
    out.info(f"terms n in {sol.ns[:12]}{' ...' if len(sol.ns) > 12 else ''}"
             + ("; truncated at max_terms" if sol.truncated else "")
             + f"; boundary condition number {sol.condition:.2e}")
    out.info("constants c = " + ", ".join(_fmt(c) for c in sol.c))
    try:
        rec = recover_representation(sol, prob.u, grid)
        out.info(f"recovered (a_n, g = h_g): max |a_n g^n - z_n| = {rec.consistency:.2e}"
                 + ("; SIGN MISMATCH" if rec.sign_mismatch else ""))
        rec_err = rec.consistency
    except RecoveryError as exc:
        out.info(f"representation recovery skipped: {exc}")
        rec_err = None
    if args.emit_csv:
        local = np.abs(_pointwise_residual(sol, xs))
        write_csv(args.emit_csv, ["x", "y", "dy", "residual"],
                  [[x, y, d, r] for x, y, d, r in zip(xs, ys, sol.y(xs, 1), local)])
    if not rep.passed:
        bmax = float(np.max(np.abs(rep.boundary), initial=0.0))
        if bmax > 1e-8:
            raise GateFailure("boundary residual", bmax, 1e-8)
        raise GateFailure("equation residual", max(rep.equation, rep.derivative_consistency), 1e-6)
    if rec_err is not None and rec_err > 1e-5:
        raise GateFailure("representation recovery", rec_err, 1e-5)
    return EXIT_OK


def _pointwise_residual(sol, xs):
    from .ode import _fd_first
    from .expr import evaluate_many

    prob = sol.prob
    a, b = prob.interval
    m = prob.m
    h = 1e-4 * (b - a)
    col = xs.reshape(-1, 1)
    lhs = evaluate_many(prob.p[m], col) * _fd_first(lambda q: sol.y(q, m - 1), xs, a, b, h)
    for r in range(m):
        lhs = lhs + evaluate_many(prob.p[r], col) * sol.y(xs, r)
    return lhs - prob.rhs(xs, sol.ns)


def cmd_lie(args, out: Output) -> int:
    from .lie import nlode_solve

    if args.order < 0:
        raise InputError("--order must be a natural number")
    try:
        sol = nlode_solve(args.h, args.order)
    except ExprError as exc:
        raise InputError(str(exc)) from None
    for n, v in enumerate(sol.coefficients):
        out.result(f"a_{n} = {v}  (error {'0 (exact)' if sol.exact else '<= 1e-15'})")
    if sol.budget_exceeded:
        out.info(f"node budget exceeded: only {len(sol.coefficients)} coefficients computed")
    err = None
    if args.check_interval:
        lo, hi = args.check_interval
        try:
            err = sol.check(lo, hi, args.grid or 201)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        out.result(f"sup |y_N - y_ivp| on [{lo:g}, {hi:g}] = {err:.3e}")
    if args.emit_csv:
        write_csv(args.emit_csv, ["n", "a_n", "a_n_float", "error"],
                  [[n, str(v), float(v), 0.0 if sol.exact else 1e-15] for n, v in enumerate(sol.coefficients)])
    if sol.budget_exceeded:
        raise GateFailure("node budget", float(len(sol.coefficients)), float(args.order + 1))
    tol = 1e-6 if args.tol is None else args.tol
    if err is not None and err > tol:
        raise GateFailure("solve_ivp oracle", err, tol)
    return EXIT_OK


def cmd_approx(args, out: Output) -> int:
    from .taylor import approx_simple

    f = _load_mtmf(args.file, args)
    if len(args.domain) != 2 * f.arity:
        raise InputError(f"--domain needs lo hi for each of {f.arity} axes")
    box = [(args.domain[2 * i], args.domain[2 * i + 1]) for i in range(f.arity)]
    try:
        h = approx_simple(f, args.j, args.k, box)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    n = args.grid or 201
    axes = [np.linspace(lo, hi, n if f.arity == 1 else max(3, int(round(n ** (1 / f.arity)))))
            for lo, hi in box]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, f.arity)
    fv, _ = f.evaluate_many(pts)
    hv, _ = h.evaluate_many(pts)
    sup = float(np.max(np.abs(fv - hv)))
    out.result(f"sup |f - h_{{{args.j},{args.k}}}| on grid = {_fmt(sup)}  "
               f"(grid of {len(pts)} points; quantisation 2^-k + 2^-j = {2.0 ** -args.k + 2.0 ** -args.j:g})")
    if args.emit_csv:
        write_csv(args.emit_csv, [f"x{i + 1}" for i in range(f.arity)] + ["f", "h", "error"],
                  [list(p) + [a, c, abs(a - c)] for p, a, c in zip(pts, fv, hv)])
    return EXIT_OK


COMMANDS = {
    "eval": cmd_eval,
    "inner": cmd_geometry,
    "norm": cmd_geometry,
    "distance": cmd_geometry,
    "gram-schmidt": cmd_gram_schmidt,
    "poly": cmd_poly,
    "ortho": cmd_ortho,
    "zeta": cmd_zeta,
    "hyp": cmd_hyp,
    "deriv": cmd_deriv,
    "ode-solve": cmd_ode,
    "lie-solve": cmd_lie,
    "approx": cmd_approx,
}


def run(argv: Sequence[str] | None = None, stream=None) -> int:
    err_stream = sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except InputError as exc:
        print(f"mtmf: error: {exc}", file=err_stream)
        return EXIT_INPUT
    if args.verb is None:
        print("mtmf: error: a verb is required", file=err_stream)
        return EXIT_INPUT
    out = Output(args.quiet, stream)
    try:
        return COMMANDS[args.verb](args, out)
    except InputError as exc:
        print(f"mtmf: error: {exc}", file=err_stream)
        return EXIT_INPUT
    except ExprError as exc:
        print(f"mtmf: error: {exc}", file=err_stream)
        return EXIT_INPUT
    except GateFailure as exc:
        print(f"mtmf: {exc}", file=err_stream)
        return EXIT_GATE
    except (SingularSystemError, BudgetExceededError, QuadratureError, RecoveryError) as exc:
        print(f"mtmf: gate failure: {exc}", file=err_stream)
        return EXIT_GATE
    except (MtmfError, ValueError) as exc:
        print(f"mtmf: error: {exc}", file=err_stream)
        return EXIT_INPUT


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
