"""Command-line front end.

Machine output is JSON on stdout, always. Human-readable notes go to
stderr and only with ``--verbose``.

Exit codes: 0 not refuted / success, 1 parse or schema error, 2 invalid
initial segment, 3 infeasible, 4 selftest failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

from . import cfp, selftest
from .domains import DomainSpec
from .errors import NotFactorClosed, ShapeMismatch, UnsupportedSupport
from .freewords import ball_segment, validate_initial_segment
from .ncpoly import MatPoly, matrix_from_json

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_SEGMENT = 2
EXIT_INFEASIBLE = 3
EXIT_SELFTEST = 4

_CONFIG_FIELDS = {f.name for f in fields(cfp.OptimizerConfig)}


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_PARSE) from exc


def load_problem(path):
    """Parse a problem file into ``(poly, segment, domain, bound, config dict)``."""
    obj = _load_json(path)
    if not isinstance(obj, dict):
        raise CliError("problem file must hold a JSON object", EXIT_PARSE)
    try:
        D = DomainSpec.from_json(obj["domain"])
        lam = obj["lambda"]
        if isinstance(lam, dict):
            seg = ball_segment(D.ntuple, int(lam["ball"]))
        else:
            if not isinstance(lam, list):
                raise ValueError("lambda must be a list of words or {\"ball\": l}")
            seg = validate_initial_segment(D.ntuple, [str(w) for w in lam])
        p = MatPoly.from_json(obj["polynomial"])
        bound = obj.get("bound")
        bound = None if bound is None else float(bound)
        config = dict(obj.get("config", {}))
    except NotFactorClosed as exc:
        raise CliError(f"invalid initial segment: {exc}", EXIT_SEGMENT) from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"schema error: {exc}", EXIT_PARSE) from exc
    unknown = set(config) - _CONFIG_FIELDS
    if unknown:
        raise CliError(f"unknown config keys: {sorted(unknown)}", EXIT_PARSE)
    if p.d != D.ntuple:
        raise CliError(f"polynomial has d={p.d}, domain expects {D.ntuple}", EXIT_PARSE)
    if bound is not None and not bound > 0:
        raise CliError("bound must be positive", EXIT_PARSE)
    if len(seg) == 0:
        raise CliError("invalid initial segment: empty", EXIT_SEGMENT)
    return p, seg, D, bound, config


def resolve_seed(args, config) -> int:
    """``--seed``, else the file's config seed, else ``NCCF_SEED``, else 0."""
    if args.seed is not None:
        return args.seed
    if "seed" in config:
        return int(config["seed"])
    return int(os.environ.get("NCCF_SEED", "0"))


def build_config(args, config) -> cfp.OptimizerConfig:
    try:
        cfg = cfp.OptimizerConfig(**config)
    except TypeError as exc:
        raise CliError(f"bad config: {exc}", EXIT_PARSE) from exc
    cfg = replace(cfg, seed=resolve_seed(args, config))
    if args.restarts is not None:
        cfg = replace(cfg, restarts=args.restarts)
    if args.jobs is not None:
        cfg = replace(cfg, jobs=args.jobs)
    return cfg


def _setup(args):
    p, seg, D, bound, config = load_problem(args.problem)
    return p, seg, D, bound, build_config(args, config)


def cmd_check(args) -> int:
    p, seg, D, bound, cfg = _setup(args)
    if bound is None:
        raise CliError("check needs a bound", EXIT_PARSE)
    try:
        verdict = cfp.feasibility(p, seg, D, bound, cfg, tol=args.tol)
    except UnsupportedSupport as exc:
        raise CliError(f"schema error: {exc}", EXIT_PARSE) from exc
    out = verdict.to_json()
    emit(out)
    if args.verbose:
        print(f"{verdict.verdict}: value {verdict.value:.12g} vs bound {bound:.12g}", file=sys.stderr)
    return EXIT_INFEASIBLE if verdict.infeasible else EXIT_OK


def cmd_norm(args) -> int:
    p, seg, D, _, cfg = _setup(args)
    try:
        cert = cfp.nilpotent_norm(p, seg, D, cfg)
    except UnsupportedSupport as exc:
        raise CliError(f"schema error: {exc}", EXIT_PARSE) from exc
    emit(cert.to_json())
    if args.verbose:
        print(f"value {cert.value:.12g} via {cert.method}", file=sys.stderr)
    return EXIT_OK


def parse_coefficients(obj) -> list[np.ndarray]:
    """Coefficient list from an oracle file.

    Accepts a bare list or ``{"coeffs": [...]}``; entries are numbers,
    ``[re, im]`` pairs or ``{"re": [[...]], "im": [[...]]}`` blocks. A
    problem file with a one-variable polynomial also works.
    """
    if isinstance(obj, dict) and "polynomial" in obj:
        p = MatPoly.from_json(obj["polynomial"])
        if p.d != 1:
            raise ShapeMismatch("the oracle needs a one-variable polynomial")
        return [p.coeff((1,) * k) for k in range(max(p.degree, 0) + 1)]
    if isinstance(obj, dict):
        obj = obj["coeffs"]
    if not isinstance(obj, list) or not obj:
        raise ValueError("expected a nonempty coefficient list")
    out = []
    for c in obj:
        if isinstance(c, dict):
            out.append(matrix_from_json(c))
        elif isinstance(c, list):
            if len(c) != 2:
                raise ValueError("complex scalars are written [re, im]")
            out.append(np.array([[complex(float(c[0]), float(c[1]))]]))
        else:
            out.append(np.array([[complex(float(c))]]))
    if any(c.shape != out[0].shape for c in out):
        raise ShapeMismatch("coefficient blocks differ in shape")
    return out


def cmd_oracle(args) -> int:
    obj = _load_json(args.coeffs)
    try:
        c = parse_coefficients(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"schema error: {exc}", EXIT_PARSE) from exc
    cert = cfp.oracle_certificate(c)
    emit({"value": cert.value, "method": cert.method, "n": len(c) - 1})
    return EXIT_OK


def cmd_selftest(args) -> int:
    seed = args.seed if args.seed is not None else int(os.environ.get("NCCF_SEED", "0"))
    t0 = time.perf_counter()

    def note(entry):
        if args.verbose:
            status = "ok" if entry["passed"] else "FAIL"
            print(f"[{status}] {entry['name']} ({time.perf_counter() - t0:.1f}s)", file=sys.stderr)

    summary = selftest.run(seed, args.level, args.grid, on_result=note)
    emit(summary)
    if not summary["passed"]:
        print(f"selftest failed: {summary['first_failure']}", file=sys.stderr)
        return EXIT_SELFTEST
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (default: file config, then $NCCF_SEED, then 0)")
    common.add_argument("--jobs", type=int, default=None, help="parallel optimizer restarts")
    common.add_argument("--restarts", type=int, default=None, help="number of optimizer restarts")
    common.add_argument("--grid", type=int, default=512, help="angle grid for contour checks")
    common.add_argument("--tol", type=float, default=1e-9, help="relative tolerance for the infeasibility test")
    common.add_argument("--verbose", action="store_true", help="human summary on stderr")

    parser = argparse.ArgumentParser(prog="nccf", description="Feasibility checks for matrix-valued free polynomial interpolation")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("check", parents=[common], help="feasibility verdict for a problem file")
    p.add_argument("problem")
    p.set_defaults(func=cmd_check)
    p = sub.add_parser("norm", parents=[common], help="criterion value with witness")
    p.add_argument("problem")
    p.set_defaults(func=cmd_norm)
    p = sub.add_parser("oracle", parents=[common], help="classical Toeplitz norm for one variable")
    p.add_argument("coeffs")
    p.set_defaults(func=cmd_oracle)
    p = sub.add_parser("selftest", parents=[common], help="run the randomized invariant suites")
    p.add_argument("--level", choices=sorted(selftest.LEVELS), default="quick")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        return args.func(args)
    except CliError as exc:
        emit({"error": str(exc), "exit_code": exc.code})
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
