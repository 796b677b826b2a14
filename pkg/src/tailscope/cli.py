"""Command-line entry point.

Exit codes: 0 success, 1 failed characterization check, 2 invalid request
(bad flags, malformed spec, parameter outside its domain), 3 numerical
failure (quadrature did not converge).
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

from . import oracles
from .distributions import parse_model, sample
from .errors import (
    BoundaryError,
    DegenerateSampleError,
    EmptyInputError,
    ParameterDomainError,
    QuadratureError,
    SpecValidationError,
    UnsupportedError,
)
from .harness import ExperimentSpec, characterization_check, rows_to_csv, run_experiment
from .multivariate import convex_hull_area, read_point_cloud_csv

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

_ESTIMATE_KINDS = {
    "first-kind": "first-kind-convergence",
    "min-ratio": "min-ratio",
    "max-ratio": "max-ratio",
    "stability-index": "stability-index",
    "put-tail-down": "put-tail-down",
}

_CONVERGE_KINDS = dict(_ESTIMATE_KINDS, characterization="characterization", multivariate="multivariate")


def _int_list(text: str) -> list[int]:
    try:
        return [int(float(t)) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _model(text: str):
    try:
        return parse_model(text)
    except ParameterDomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_param(p, required=True):
    p.add_argument("--param", "--k", "--kappa", "--rho", dest="param", type=float, required=required,
                   help="threshold k (first kind), kappa (max ratio) or rho (min ratio)")


def _add_run_opts(p):
    p.add_argument("--reps", type=int, default=10_000, help="Monte Carlo replicates")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--threads", type=int, default=None, help="override TAILSCOPE_THREADS")
    p.add_argument("--out", type=Path, default=None, help="write CSV here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tailscope", description="Outlier diagnostics for heavy-tailed laws.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", help="draw a reproducible sample")
    p.add_argument("--model", type=_model, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replicate", type=int, default=0)
    p.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("estimate", help="one Monte Carlo estimate, as a one-row report")
    p.add_argument("what", choices=sorted(_ESTIMATE_KINDS))
    p.add_argument("--model", type=_model, required=True)
    p.add_argument("--n", type=int, required=True)
    _add_param(p)
    _add_run_opts(p)

    p = sub.add_parser("oracle", help="exact or limiting probability")
    p.add_argument("what", choices=["max-ratio", "min-ratio", "min-ratio-complement", "gaussian-first-kind",
                                    "gaussian-first-kind-finite", "limit-max-ratio", "limit-min-ratio"])
    p.add_argument("--model", type=_model)
    p.add_argument("--n", type=int)
    p.add_argument("--alpha", type=float)
    _add_param(p)

    p = sub.add_parser("converge", help="run an experiment over a grid of n")
    p.add_argument("what", nargs="?", choices=sorted(_CONVERGE_KINDS))
    p.add_argument("--spec", type=Path, help="JSON experiment spec (overrides the other flags)")
    p.add_argument("--model", type=_model)
    p.add_argument("--model2", type=_model, help="y-coordinate law for multivariate runs")
    p.add_argument("--ngrid", "--n-grid", dest="ngrid", type=_int_list)
    p.add_argument("--mode", default="first-kind", choices=["first-kind", "order-kappa"])
    _add_param(p, required=False)
    _add_run_opts(p)

    p = sub.add_parser("characterize", help="check the Pareto characterization on a grid")
    p.add_argument("--model", type=_model, required=True)
    p.add_argument("--param-grid", "--kappa-grid", "--rho-grid", dest="param_grid", type=_float_list, required=True)
    p.add_argument("--n-grid", "--ngrid", dest="n_grid", type=_int_list, required=True)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--event", choices=["max-ratio", "min-ratio"], default=None)
    p.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("hull", help="hull area of a CSV cloud, or hull-area outlier simulation")
    p.add_argument("--csv", type=Path, help="two-column point file")
    p.add_argument("--model", type=_model)
    p.add_argument("--model2", type=_model)
    p.add_argument("--n", type=int)
    p.add_argument("--mode", default="first-kind", choices=["first-kind", "order-kappa"])
    _add_param(p, required=False)
    _add_run_opts(p)
    return parser


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _cmd_sample(args) -> int:
    batch = sample(args.model, args.n, args.seed, args.replicate)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["value"])
    writer.writerows([repr(float(v))] for v in batch.values)
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _run(spec: ExperimentSpec, args) -> int:
    rows = run_experiment(spec, threads=args.threads)
    _emit(rows_to_csv(rows), args.out)
    return EXIT_OK


def _cmd_estimate(args) -> int:
    spec = ExperimentSpec(_ESTIMATE_KINDS[args.what], args.model, (args.n,), args.param, args.reps, args.seed)
    return _run(spec, args)


def _cmd_oracle(args) -> int:
    what = args.what
    if what == "gaussian-first-kind":
        value = oracles.gaussian_first_kind_reference(args.param)
    elif what.startswith("limit-"):
        if args.alpha is None:
            raise SpecValidationError(f"{what} needs --alpha")
        fn = oracles.limit_max_ratio if what == "limit-max-ratio" else oracles.limit_min_ratio
        value = fn(args.alpha, args.param)
    else:
        if args.n is None:
            raise SpecValidationError(f"{what} needs --n")
        if what == "gaussian-first-kind-finite":
            value = oracles.gaussian_first_kind_finite_n(args.n, args.param)
        else:
            if args.model is None:
                raise SpecValidationError(f"{what} needs --model")
            fn = {
                "max-ratio": oracles.exact_max_ratio_prob,
                "min-ratio": oracles.exact_min_ratio_prob,
                "min-ratio-complement": oracles.exact_min_ratio_complement,
            }[what]
            value = fn(args.model, args.n, args.param)
    print(f"{value:.10g}")
    return EXIT_OK


def _cmd_converge(args) -> int:
    if args.spec is not None:
        try:
            text = args.spec.read_text()
        except OSError as exc:
            raise SpecValidationError(f"cannot read spec file: {exc}") from None
        return _run(ExperimentSpec.from_json(text), args)
    missing = [name for name in ("what", "model", "ngrid", "param") if getattr(args, name) is None]
    if missing:
        raise SpecValidationError("converge needs --spec or: " + ", ".join(missing))
    spec = ExperimentSpec(
        _CONVERGE_KINDS[args.what], args.model, tuple(args.ngrid), args.param, args.reps, args.seed,
        model2=args.model2, mode=args.mode,
    )
    return _run(spec, args)


def _cmd_characterize(args) -> int:
    report = characterization_check(
        args.model, args.param_grid, args.n_grid, args.tol, alpha=args.alpha, event=args.event
    )
    _emit(report.to_csv(), args.out)
    verdict = "pass" if report.passed else "fail"
    print(f"{verdict}: max deviation {report.max_deviation:.3e} (tol {report.tol:.3e})", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def _cmd_hull(args) -> int:
    if args.csv is not None:
        result = convex_hull_area(read_point_cloud_csv(args.csv))
        print(f"{result.area!r}" + ("  # degenerate" if result.degenerate else ""))
        return EXIT_OK
    missing = [name for name in ("model", "n", "param") if getattr(args, name) is None]
    if missing:
        raise SpecValidationError("hull needs --csv or: " + ", ".join(missing))
    spec = ExperimentSpec(
        "multivariate", args.model, (args.n,), args.param, args.reps, args.seed,
        model2=args.model2, mode=args.mode,
    )
    return _run(spec, args)


_COMMANDS = {
    "sample": _cmd_sample,
    "estimate": _cmd_estimate,
    "oracle": _cmd_oracle,
    "converge": _cmd_converge,
    "characterize": _cmd_characterize,
    "hull": _cmd_hull,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except (SpecValidationError, ParameterDomainError, BoundaryError, UnsupportedError,
            EmptyInputError, DegenerateSampleError) as exc:
        print(f"tailscope: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, ArithmeticError) as exc:
        print(f"tailscope: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
