"""Command-line front end.

Every subcommand prints one JSON object on stdout with the keys
``command``, ``verdict`` or ``result``, ``defect``, ``certificate`` and
``params``.  Exit status: 0 success / holds, 1 fails with a certificate,
2 bad input or usage.
"""
from __future__ import annotations

import argparse
import ast
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import _backend
from .blh import InnerSymbol, invariant_subspace_verdict, unitary_equiv
from .classifiers import (
    Budget,
    contraction_verdict,
    is_gamma_coisometry,
    is_gamma_isometry,
    is_gamma_unitary,
    sup_on_gamma,
    unitary_generators,
    vn_margin,
)
from .geometry import (
    MEMBERSHIP_TOL,
    GammaPoint,
    embed,
    fiber,
    in_gamma,
    on_boundary,
    points_to_csv,
    project,
    sample,
)
from .hardy import (
    ModelTuple,
    StructuredTuple,
    SymbolTuple,
    build_pure_isometry,
    check_symbol_conditions,
    fundamental_invariant,
    wold_decompose,
)
from .operators import MatrixTuple
from .polynomials import MultiPoly, reduce_symmetric
from .verdict import ConvergenceError, GammaError, Verdict, dumps


class UsageError(Exception):
    pass


def _text(arg: str) -> str:
    """Inline value, or the contents of a file when prefixed with '@'."""
    if arg.startswith("@"):
        try:
            return Path(arg[1:]).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read {arg[1:]}: {exc}") from exc
    return arg


def _json(arg: str):
    try:
        return json.loads(_text(arg))
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON: {exc}") from exc


def parse_point(arg: str) -> GammaPoint:
    """A point as GammaPoint JSON, a JSON list, or a tuple literal like '(3, 1)' or '(1+1j, 2)'."""
    raw = _text(arg).strip()
    if raw.startswith("{"):
        return GammaPoint.from_dict(_json(raw))
    try:
        val = ast.literal_eval(raw)
    except (ValueError, SyntaxError) as exc:
        raise UsageError(f"cannot parse point {raw!r}") from exc
    if isinstance(val, (int, float, complex)):
        val = [val]
    try:
        vals = [complex(*v) if isinstance(v, (list, tuple)) else complex(v) for v in val]
    except TypeError as exc:
        raise UsageError(f"cannot parse point {raw!r}") from exc
    return GammaPoint(np.array(vals))


def parse_poly(arg: str, n: int | None = None) -> MultiPoly:
    try:
        return MultiPoly.from_text(_text(arg), n)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def parse_tuple(arg: str) -> MatrixTuple | ModelTuple:
    obj = _json(arg)
    if isinstance(obj, dict) and "A" in obj:
        return ModelTuple.from_dict(obj)
    if isinstance(obj, dict) and "s" in obj:
        return MatrixTuple.from_point(GammaPoint.from_dict(obj))
    return MatrixTuple.from_dict(obj)


def _budget(args) -> Budget:
    return Budget(args.budget_degree, args.budget_polys, args.grid)


def _params(args) -> dict:
    skip = {"func", "command"}
    out = {k: v for k, v in vars(args).items() if k not in skip}
    out["backend"] = _backend.NAME
    return out


def _verdict_payload(v: Verdict) -> dict:
    return {"verdict": v.holds, "defect": v.defect, "certificate": v.certificate, "diagnostics": v.diagnostics}


def _result_payload(result, defect=None, certificate=None) -> dict:
    return {"result": result, "defect": defect, "certificate": certificate}


# ------------------------------------------------------------ subcommands

def cmd_membership(args):
    s = parse_point(args.point)
    if args.boundary:
        return _verdict_payload(on_boundary(s, args.tol, args.route))
    return _verdict_payload(in_gamma(s, args.tol))


def cmd_project(args):
    return _result_payload(project(parse_point(args.point)).to_dict())


def cmd_embed(args):
    alpha = complex(ast.literal_eval(args.alpha)) if isinstance(args.alpha, str) else args.alpha
    return _result_payload(embed(parse_point(args.point), alpha).to_dict())


def cmd_fiber(args):
    lam = fiber(parse_point(args.point))
    return _result_payload([[float(z.real), float(z.imag)] for z in lam])


def cmd_reduce(args):
    q = reduce_symmetric(parse_poly(args.poly), args.tol)
    return _result_payload({"text": q.to_text(), "pretty": str(q)})


def cmd_sup(args):
    q = parse_poly(args.poly, args.n)
    r = sup_on_gamma(q, args.n or q.n_vars, args.grid, threads=args.threads)
    return _result_payload(r.to_dict())


def cmd_vn_check(args):
    T = parse_tuple(args.tuple)
    if isinstance(T, ModelTuple):
        raise UsageError("vn-check takes a matrix tuple")
    if args.poly:
        m = vn_margin(T, parse_poly(args.poly, T.n), args.grid)
        return {"verdict": m <= args.tol, "defect": max(m, 0.0),
                "certificate": None if m <= args.tol else {"margin": m}, "margin": m}
    return _verdict_payload(contraction_verdict(T, _budget(args), args.seed, args.tol))


def cmd_classify(args):
    T = parse_tuple(args.tuple)
    fn = {"unitary": is_gamma_unitary, "isometry": is_gamma_isometry, "coisometry": is_gamma_coisometry}[args.kind]
    if isinstance(T, ModelTuple) and args.kind == "unitary":
        return _verdict_payload(Verdict.from_defect(1.0, args.tol, {"check": "model tuples are never unitary"}))
    return _verdict_payload(fn(T, args.tol, budget=_budget(args), seed=args.seed))


def cmd_generators(args):
    T = parse_tuple(args.tuple)
    U = unitary_generators(T, args.tol, args.seed)
    return _result_payload(U.to_dict())


def cmd_model_check(args):
    A = SymbolTuple.from_dict(_json(args.symbols))
    return _verdict_payload(check_symbol_conditions(A, args.tol, _budget(args), args.seed))


def cmd_model_build(args):
    A = SymbolTuple.from_dict(_json(args.symbols))
    v = check_symbol_conditions(A, args.tol, _budget(args), args.seed)
    if not v.holds:
        return _verdict_payload(v)
    m = build_pure_isometry(A, check=False)
    return {**_verdict_payload(v), "result": {**m.to_dict(), "symbols": [S.to_dict() for S in m.symbols]}}


def cmd_invariant(args):
    m = ModelTuple(SymbolTuple.from_dict(_json(args.symbols)))
    inv = fundamental_invariant(m, args.N)
    return _result_payload(SymbolTuple(np.stack(inv)).to_dict())


def cmd_wold(args):
    if args.tuple:
        t = parse_tuple(args.tuple)
    else:
        u = parse_tuple(args.unitary) if args.unitary else None
        p = ModelTuple(SymbolTuple.from_dict(_json(args.symbols))) if args.symbols else None
        t = StructuredTuple(u, p)
    u, p = wold_decompose(t, args.tol, args.N)
    return _result_payload({"unitary": None if u is None else u.to_dict(),
                            "pure": None if p is None else p.to_dict()})


def cmd_blh_verify(args):
    m = ModelTuple(SymbolTuple.from_dict(_json(args.symbols)))
    Theta = InnerSymbol.from_dict(_json(args.theta))
    return _verdict_payload(invariant_subspace_verdict(m, Theta, args.tol, _budget(args), args.seed))


def cmd_equiv(args):
    A = SymbolTuple.from_dict(_json(args.a))
    B = SymbolTuple.from_dict(_json(args.b))
    return _verdict_payload(unitary_equiv(A, B, args.word_len, args.tol, args.seed))


def cmd_sample(args):
    if args.n < 1 or args.count < 0:
        raise UsageError("need n >= 1 and count >= 0")
    csv = points_to_csv(sample(args.n, args.count, args.boundary, args.seed))
    if args.out:
        Path(args.out).write_text(csv)
        return _result_payload({"rows": args.count, "path": args.out})
    sys.stdout.write(csv)
    return None


# ---------------------------------------------------------------- parser

def _positive(x: str) -> float:
    v = float(x)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_positive, default=None, help="tolerance (library default if omitted)")
    common.add_argument("--grid", type=int, default=None, help="torus grid points per angle")
    common.add_argument("--budget-degree", type=int, default=4)
    common.add_argument("--budget-polys", type=int, default=64)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=None, help="worker threads (env GAMMAKIT_THREADS)")
    common.add_argument("--out", default=None, help="also write the output to this path")

    p = argparse.ArgumentParser(prog="gammakit", description="Computations on the symmetrized polydisc.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_, default_tol):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func, default_tol=default_tol)
        return sp

    sp = add("membership", cmd_membership, "test s in Gamma_n (or on its distinguished boundary)", MEMBERSHIP_TOL)
    sp.add_argument("--point", required=True)
    sp.add_argument("--boundary", action="store_true")
    sp.add_argument("--route", default="all", choices=["all", "fiber", "recursive", "closure"])
    add("project", cmd_project, "map Gamma_n -> Gamma_(n-1)", MEMBERSHIP_TOL).add_argument("--point", required=True)
    sp = add("embed", cmd_embed, "map Gamma_n -> Gamma_(n+1)", MEMBERSHIP_TOL)
    sp.add_argument("--point", required=True)
    sp.add_argument("--alpha", default="1")
    add("fiber", cmd_fiber, "roots of the characteristic polynomial", MEMBERSHIP_TOL).add_argument(
        "--point", required=True)
    add("reduce", cmd_reduce, "write a symmetric polynomial in s_1..s_n", 1e-10).add_argument(
        "--poly", required=True)
    sp = add("sup", cmd_sup, "sup of |q| over Gamma_n", 1e-8)
    sp.add_argument("--poly", required=True)
    sp.add_argument("--n", type=int, default=None)
    sp = add("vn-check", cmd_vn_check, "von Neumann inequality test", 1e-8)
    sp.add_argument("--tuple", required=True)
    sp.add_argument("--poly", default=None)
    sp = add("classify", cmd_classify, "Gamma_n-unitary / isometry / co-isometry test", 1e-9)
    sp.add_argument("--tuple", required=True)
    sp.add_argument("--kind", default="unitary", choices=["unitary", "isometry", "coisometry"])
    add("generators", cmd_generators, "commuting unitaries behind a Gamma_n-unitary", 1e-8).add_argument(
        "--tuple", required=True)
    add("model-check", cmd_model_check, "admissibility of an A-tuple", 1e-9).add_argument(
        "--symbols", required=True)
    add("model-build", cmd_model_build, "build the model tuple of an A-tuple", 1e-9).add_argument(
        "--symbols", required=True)
    sp = add("invariant", cmd_invariant, "fundamental invariant of a model", 1e-12)
    sp.add_argument("--symbols", required=True)
    sp.add_argument("--N", type=int, default=3)
    sp = add("wold", cmd_wold, "split into unitary and pure parts", 1e-8)
    sp.add_argument("--tuple", default=None)
    sp.add_argument("--unitary", default=None)
    sp.add_argument("--symbols", default=None)
    sp.add_argument("--N", type=int, default=None)
    sp = add("blh-verify", cmd_blh_verify, "is Theta H^2 invariant for the model?", 1e-8)
    sp.add_argument("--symbols", required=True)
    sp.add_argument("--theta", required=True)
    sp = add("equiv", cmd_equiv, "unitary equivalence of A-tuples", 1e-8)
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)
    sp.add_argument("--word-len", type=int, default=None)
    sp = add("sample", cmd_sample, "CSV sample of Gamma_n or its distinguished boundary", 1e-9)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--count", type=int, required=True)
    sp.add_argument("--boundary", action="store_true")
    return p


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if args.tol is None:
        args.tol = args.default_tol
    del args.default_tol
    if args.threads is not None:
        if args.threads < 1:
            print(dumps({"command": args.command, "error": "--threads must be >= 1"}))
            return 2
        os.environ["GAMMAKIT_THREADS"] = str(args.threads)
    if args.grid is not None and args.grid < 4:
        print(dumps({"command": args.command, "error": "grid must be at least 4"}))
        return 2
    try:
        payload = args.func(args)
    except (UsageError, GammaError, ValueError, KeyError, TypeError) as exc:
        print(dumps({"command": args.command, "error": str(exc), "params": _params(args)}))
        return 2
    except ConvergenceError as exc:
        print(dumps({"command": args.command, "error": str(exc), "params": _params(args)}))
        return 1
    if payload is None:
        return 0
    payload = {"command": args.command, **payload, "params": _params(args)}
    text = dumps(payload)
    print(text)
    if args.out and args.command != "sample":
        Path(args.out).write_text(text + "\n")
    if "verdict" in payload:
        return 0 if payload["verdict"] else 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
