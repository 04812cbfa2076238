"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a verification fails, 2 for
malformed input.  Reports are deterministic JSON.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .errors import FermiKleinError, GradingNotInner, NotEven, InputError
from .fermi_tensor import build_product_n, product_state_n, symmetry_residuals
from .graded_core import validate
from .klein import default_test_states, klein_iterated, verify_klein
from .report import Check, Report
from .states import gns, has_central_support, image_dimension, is_even
from .structure import BATTERY_TOLERANCE, EMBEDDINGS, run_counterexample

ENV_TOLERANCE = "FERMI_KLEIN_TOLERANCE"
VALIDATE_LIMIT = 256

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _env_tolerance() -> float | None:
    raw = os.environ.get(ENV_TOLERANCE)
    if raw is None or raw == "":
        return None
    try:
        tol = float(raw)
    except ValueError:
        raise InputError(f"{ENV_TOLERANCE} must be a number, got {raw!r}") from None
    if tol < 0:
        raise InputError(f"{ENV_TOLERANCE} must be nonnegative")
    return tol


def _algebra(args, path):
    return io.load_algebra(path, args.tolerance)


def _product(args, path):
    return io.load_product_file(path, args.tolerance)


def _state(args, path):
    return io.load_state(path, args.tolerance)


def _emit(args, payload) -> None:
    text = io.dumps(payload)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _report_exit(args, report: Report) -> int:
    _emit(args, report.as_list())
    for c in report.failures():
        print(f"FAILED {c.name}: residual {c.residual:.3e}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_FAIL


# ---------------------------------------------------------------- commands
def cmd_check(args) -> int:
    alg = _algebra(args, args.algebra)
    return _report_exit(args, validate(alg))


def _cmd_product(args, kind: str) -> int:
    factor, n, _ = _product(args, args.product)
    if args.n is not None:
        n = args.n
    product = build_product_n(factor, n, kind)
    alg = product.realized
    payload = {
        "kind": kind,
        "n": n,
        "ambient_dim": alg.ambient_dim,
        "dim": alg.dim,
        "realized": io.algebra_to_dict(alg),
        "embedding": [[io.matrix_to_json(x) for x in stack] for stack in product.embedding],
    }
    ok = True
    if alg.dim <= VALIDATE_LIMIT:
        report = validate(alg)
        payload["validation"] = report.as_list()
        ok = report.ok
    else:
        payload["validation"] = None
    _emit(args, payload)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_fermi(args) -> int:
    return _cmd_product(args, "fermi")


def cmd_ordinary(args) -> int:
    return _cmd_product(args, "ordinary")


def cmd_klein(args) -> int:
    factor, n, _ = _product(args, args.product)
    if args.n is not None:
        n = args.n
    if n < 2:
        raise InputError("the Klein transformation needs n >= 2")
    try:
        kmap = klein_iterated(factor, n)
    except GradingNotInner as exc:
        print(f"GradingNotInner: {exc}", file=sys.stderr)
        return _report_exit(args, Report([Check("grading_inner", 1.0, False)]))
    states = default_test_states(factor, seed=args.seed)
    return _report_exit(args, verify_klein(kmap, states, seed=args.seed))


def cmd_gns(args) -> int:
    state, _ = _state(args, args.state)
    g = gns(state)
    report = g.residuals()
    payload = {
        "algebra_dim": state.algebra.dim,
        "gns_dim": g.gns_dim,
        "image_dim": image_dimension(g),
        "even": is_even(state),
        "central_support": has_central_support(g),
        "checks": report.as_list(),
    }
    _emit(args, payload)
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_symmetric(args) -> int:
    state, product = _state(args, args.state)
    if product is None:
        if args.n is None:
            raise InputError("a state on a single algebra needs --n to form the product state")
        product = build_product_n(state.algebra, args.n, "fermi")
        try:
            state = product_state_n(state, args.n, "fermi", product)
        except NotEven as exc:
            print(f"NotEven: {exc}", file=sys.stderr)
            _emit(args, {"n": args.n, "symmetric": False, "residuals": []})
            return EXIT_FAIL
    elif args.n is not None and args.n != product.n:
        raise InputError(f"--n {args.n} disagrees with the product file (n = {product.n})")
    tol = state.algebra.tolerance
    rows = [{"permutation": list(p), "residual": r, "pass": bool(r < tol or r == 0.0)}
            for p, r in symmetry_residuals(state, product).items()]
    verdict = all(row["pass"] for row in rows)
    _emit(args, {"n": product.n, "symmetric": verdict, "residuals": rows})
    return EXIT_OK if verdict else EXIT_FAIL


def cmd_counterexample(args) -> int:
    tol = args.tolerance if args.tolerance is not None else BATTERY_TOLERANCE
    return _report_exit(args, run_counterexample(args.noise, args.seed, args.embedding, tol))


# ------------------------------------------------------------------ parser
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tolerance", type=float, default=None,
                        help=f"override the numerical tolerance (default: ${ENV_TOLERANCE}, then the input file)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized probes")
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("--n", type=int, default=None, help="number of legs")

    parser = _Parser(prog="fermi-klein", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("check", parents=[common], help="validate a graded algebra")
    p.add_argument("algebra")
    p.set_defaults(func=cmd_check)
    for name, func in (("fermi", cmd_fermi), ("ordinary", cmd_ordinary)):
        p = sub.add_parser(name, parents=[common], help=f"realise the n-fold {name} product")
        p.add_argument("product")
        p.set_defaults(func=func)
    p = sub.add_parser("klein", parents=[common], help="build and verify the iterated Klein map")
    p.add_argument("product")
    p.set_defaults(func=cmd_klein)
    p = sub.add_parser("gns", parents=[common], help="GNS summary of a state")
    p.add_argument("state")
    p.set_defaults(func=cmd_gns)
    p = sub.add_parser("symmetric", parents=[common], help="permutation invariance of a product state")
    p.add_argument("state")
    p.set_defaults(func=cmd_symmetric)
    p = sub.add_parser("counterexample", parents=[common], help="run the CAR(2) battery")
    p.add_argument("--noise", type=float, default=0.0, help="perturb the annihilators by this amount")
    p.add_argument("--embedding", choices=EMBEDDINGS, default="fermi")
    p.set_defaults(func=cmd_counterexample)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.tolerance is None:
            args.tolerance = _env_tolerance()
        if args.tolerance is not None and not (np.isfinite(args.tolerance) and args.tolerance >= 0):
            raise InputError("--tolerance must be a nonnegative number")
        return args.func(args)
    except (FermiKleinError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
