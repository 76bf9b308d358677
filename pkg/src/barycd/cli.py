"""Command-line front end.

One JSON RunReport per invocation on stdout, logs on stderr.  Exit codes:
0 = pass/success, 1 = inequality fail / refuted, 2 = error or degenerate
domain.  Reruns with identical inputs and seed produce byte-identical
reports; wall-clock timing therefore goes to stderr, not into the report.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import io as bio
from .barycenter import (DEFAULT_TUPLE_CAP, barycenter_from_mmot,
                         barycenter_lp, solve_mmot, superposition_check)
from .curvature import (CurvatureParams, best_k, bcd_certify,
                        certify_instance)
from .errors import BarycdError
from .inequalities import bm_check, bs_check, bs_complete, log_bm_check
from .measures import Mixture
from .reports import CertificationReport
from .sampling import SamplerConfig
from .space import DEFAULT_POINT_CAP, generate_space, validate_space
from .transport import extract_monge, w2_entropic, w2_exact

SCHEMA_VERSION = "1"


def jsonable(obj):
    """Deep-convert to JSON-safe values: inf -> "inf", never NaN."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            raise ValueError("refusing to serialize NaN")
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _emit(argv, config, result):
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": list(argv),
        "config": jsonable(config),
        "result": jsonable(result),
    }
    print(json.dumps(report, indent=2, sort_keys=True))


def _emit_error(argv, kind, message):
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": list(argv),
        "error": {"kind": kind, "message": str(message)},
    }
    print(json.dumps(report, indent=2, sort_keys=True))


def _parse_caps(text):
    caps = {"points": DEFAULT_POINT_CAP, "tuples": DEFAULT_TUPLE_CAP}
    if not text:
        return caps
    for part in text.split(","):
        key, _, value = part.partition("=")
        if key not in caps or not value:
            raise BarycdError(f"bad --caps entry {part!r}")
        caps[key] = int(value)
    return caps


def _parse_n(text):
    if text == "inf":
        return math.inf
    return float(text)


def _parse_weights(text):
    return np.asarray([float(t) for t in text.split(",") if t], dtype=float)


def _report_exit(report: CertificationReport) -> int:
    if report.verdict == "pass":
        return 0
    if report.verdict == "fail":
        return 1
    return 2


def build_parser():
    p = argparse.ArgumentParser(prog="barycd", exit_on_error=False)
    p.add_argument("--caps", default="", help="tuples=N,points=N overrides")
    sub = p.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("validate", exit_on_error=False)
    sp.add_argument("--space", required=True)
    sp.add_argument("--ref-mass", help="sidecar mass file for CSV spaces")

    sp = sub.add_parser("gen", exit_on_error=False)
    sp.add_argument("kind", choices=["grid1d", "grid2d", "circle", "graph"])
    sp.add_argument("--a", type=float, default=0.0)
    sp.add_argument("--b", type=float, default=1.0)
    sp.add_argument("--c", type=float, default=0.0)
    sp.add_argument("--d", type=float, default=1.0)
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--nx", type=int, default=2)
    sp.add_argument("--ny", type=int, default=2)
    sp.add_argument("--L", type=float, default=1.0)
    sp.add_argument("--mass", choices=["trapezoid", "uniform"],
                    default="trapezoid")
    sp.add_argument("--normalize", action="store_true")
    sp.add_argument("--edges", help="JSON file with n, edges, ref_measure")
    sp.add_argument("--out", help="write the space JSON here")

    sp = sub.add_parser("w2", exit_on_error=False)
    sp.add_argument("--space", required=True)
    sp.add_argument("--mu", required=True)
    sp.add_argument("--nu", required=True)
    sp.add_argument("--entropic", type=float, default=None,
                    help="regularization strength; omit for the exact LP")

    sp = sub.add_parser("mmot", exit_on_error=False)
    sp.add_argument("--space", required=True)
    sp.add_argument("--marginals", nargs="+", required=True)
    sp.add_argument("--weights", required=True)

    sp = sub.add_parser("barycenter", exit_on_error=False)
    sp.add_argument("--space", required=True)
    sp.add_argument("--mixture", required=True)
    sp.add_argument("--route", choices=["lp", "mmot"], default="lp")
    sp.add_argument("--mode", choices=["vertex", "min-entropy"],
                    default="vertex")

    sp = sub.add_parser("certify", exit_on_error=False)
    sp.add_argument("--space", required=True)
    sp.add_argument("--K", type=float, required=True)
    sp.add_argument("--N", default="inf")
    sp.add_argument("--mixture", help="certify one mixture instead of sampling")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--mode", choices=["vertex", "min-entropy"],
                    default="min-entropy")

    sp = sub.add_parser("best-k", exit_on_error=False)
    sp.add_argument("--space", required=True)
    sp.add_argument("--N", default="inf")
    sp.add_argument("--lo", type=float, required=True)
    sp.add_argument("--hi", type=float, required=True)
    sp.add_argument("--iters", type=int, default=20)
    sp.add_argument("--trials", type=int, default=25)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tol", type=float, default=1e-8)

    sp = sub.add_parser("ineq", exit_on_error=False)
    sp.add_argument("form", choices=["bm", "logbm", "bs"])
    sp.add_argument("--space", required=True)
    sp.add_argument("--sets", nargs="*", default=[])
    sp.add_argument("--weights", default="")
    sp.add_argument("--N", default="1")
    sp.add_argument("--fns", nargs="*", default=[])
    sp.add_argument("--complete", action="store_true")
    sp.add_argument("--tol", type=float, default=1e-8)
    return p


def _load_space_arg(args, caps):
    if args.space.endswith(".csv"):
        mass = getattr(args, "ref_mass", None)
        if not mass:
            raise BarycdError("CSV spaces need --ref-mass")
        return bio.load_space_csv(args.space, mass, point_cap=caps["points"])
    return bio.load_space(args.space, point_cap=caps["points"])


def _cmd_validate(args, caps):
    space = _load_space_arg(args, caps)
    report = validate_space(space)
    result = {"ok": report.ok,
              "violations": [v.as_dict() for v in report.violations]}
    return (0 if report.ok else 1), result, {}


def _cmd_gen(args, caps):
    if args.kind == "grid1d":
        space = generate_space("grid1d", a=args.a, b=args.b, n=args.n,
                               mass=args.mass, normalize=args.normalize)
    elif args.kind == "grid2d":
        space = generate_space("grid2d", a=args.a, b=args.b, nx=args.nx,
                               c=args.c, d=args.d, ny=args.ny, mass=args.mass,
                               normalize=args.normalize)
    elif args.kind == "circle":
        space = generate_space("circle", L=args.L, n=args.n,
                               normalize=args.normalize)
    else:
        if not args.edges:
            raise BarycdError("graph generation needs --edges")
        doc = bio._load_json(args.edges)
        space = generate_space("graph", n=doc["n"], edges=doc["edges"],
                               ref_mass=np.asarray(doc["ref_measure"]))
    result = {"meta": space.meta, "n": space.n}
    if args.out:
        bio.save_space(space, args.out)
        result["path"] = args.out
    else:
        result["space"] = bio.space_to_doc(space)
    return 0, result, {}


def _cmd_w2(args, caps):
    space = _load_space_arg(args, caps)
    mu = bio.load_measure(args.mu, space)
    nu = bio.load_measure(args.nu, space)
    config = {}
    if args.entropic is None:
        w2, coupling = w2_exact(mu, nu)
        converged = True
    else:
        config["epsilon"] = args.entropic
        cost, coupling, converged = w2_entropic(mu, nu, args.entropic)
        w2 = math.sqrt(max(cost, 0.0))
    result = {"w2": w2, "converged": converged}
    if coupling is None:
        result["coupling"] = None
        result["monge"] = None
    else:
        result["coupling"] = [[i, j, m] for i, j, m in coupling.triplets(1e-12)]
        result["monge"] = extract_monge(coupling).as_dict()
    return 0, result, config


def _cmd_mmot(args, caps):
    space = _load_space_arg(args, caps)
    weights = _parse_weights(args.weights)
    measures = [bio.load_measure(m, space) for m in args.marginals]
    plan = solve_mmot(space, measures, weights, cap=caps["tuples"])
    result = {"cost": plan.cost, "atoms": plan.triplets(),
              "marginal_count": plan.n}
    return 0, result, {"weights": weights}


def _cmd_barycenter(args, caps):
    space = _load_space_arg(args, caps)
    omega = bio.load_mixture(args.mixture, space)
    if args.route == "mmot":
        plan = solve_mmot(space, list(omega.components), omega.lambdas,
                          cap=caps["tuples"])
        solution = barycenter_from_mmot(space, plan, omega.lambdas)
    else:
        solution = barycenter_lp(space, omega, mode=args.mode)
    check = superposition_check(space, omega, solution, cap=caps["tuples"])
    result = {"solution": solution.as_dict(),
              "superposition": check.as_dict()}
    return 0, result, {"route": args.route, "mode": args.mode}


def _cmd_certify(args, caps):
    space = _load_space_arg(args, caps)
    params = CurvatureParams(args.K, _parse_n(args.N))
    config = {"K": args.K, "N": args.N, "tol": args.tol, "mode": args.mode,
              "seed": args.seed, "trials": args.trials}
    if args.mixture:
        omega = bio.load_mixture(args.mixture, space)
        report = certify_instance(space, omega, params, mode=args.mode,
                                  tolerance=args.tol)
        return _report_exit(report), report.as_dict(), config
    sampler = SamplerConfig(trials=args.trials, seed=args.seed)
    ok, report = bcd_certify(space, params, sampler, tolerance=args.tol)
    return (0 if ok else 1), report.as_dict(), config


def _cmd_best_k(args, caps):
    space = _load_space_arg(args, caps)
    sampler = SamplerConfig(trials=args.trials, seed=args.seed)
    value = best_k(space, _parse_n(args.N), sampler, args.lo, args.hi,
                   iters=args.iters, tolerance=args.tol)
    config = {"N": args.N, "lo": args.lo, "hi": args.hi, "iters": args.iters,
              "seed": args.seed, "trials": args.trials, "tol": args.tol}
    return 0, {"best_k": value,
               "bracket_width": (args.hi - args.lo) / 2 ** args.iters}, config


def _cmd_ineq(args, caps):
    space = _load_space_arg(args, caps)
    if args.form in ("bm", "logbm"):
        if not args.sets:
            raise BarycdError("bm/logbm need --sets")
        sets = [bio.load_point_set(s, space) for s in args.sets]
        weights = (_parse_weights(args.weights) if args.weights
                   else np.full(len(sets), 1.0 / len(sets)))
        if args.form == "bm":
            report = bm_check(space, sets, weights, N=float(args.N),
                              tolerance=args.tol, cap=caps["tuples"])
        else:
            report = log_bm_check(space, sets, weights, tolerance=args.tol,
                                  cap=caps["tuples"])
    else:
        if not args.fns:
            raise BarycdError("bs needs --fns")
        fns = [bio.load_function(f, space) for f in args.fns]
        if args.complete:
            fns.append(bs_complete(space, fns, cap=caps["tuples"]))
        report = bs_check(space, fns, tolerance=args.tol, cap=caps["tuples"])
    return _report_exit(report), report.as_dict(), {"form": args.form}


_COMMANDS = {
    "validate": _cmd_validate,
    "gen": _cmd_gen,
    "w2": _cmd_w2,
    "mmot": _cmd_mmot,
    "barycenter": _cmd_barycenter,
    "certify": _cmd_certify,
    "best-k": _cmd_best_k,
    "ineq": _cmd_ineq,
}


def run(argv) -> int:
    argv = list(argv)
    started = time.monotonic()
    try:
        parser = build_parser()
        try:
            args = parser.parse_args(argv)
        except (argparse.ArgumentError, SystemExit) as exc:
            _emit_error(argv, "usage", exc)
            return 2
        caps = _parse_caps(args.caps)
        threads = os.environ.get("BARYCD_THREADS")
        code, result, config = _COMMANDS[args.cmd](args, caps)
        config = dict(config)
        config["caps"] = caps
        if threads is not None:
            config["threads"] = threads
        _emit(argv, config, result)
        return code
    except BarycdError as exc:
        _emit_error(argv, type(exc).__name__, exc)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        _emit_error(argv, "internal", exc)
        return 2
    finally:
        print(f"barycd: {' '.join(argv[:2])} finished in "
              f"{time.monotonic() - started:.3f}s", file=sys.stderr)


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
