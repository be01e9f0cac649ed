"""Command-line interface.

Subcommands: ``reduce``, ``guarantee``, ``heatmap``, ``solve``, ``exp1``,
``exp2``, ``oracle-check``.  Exit codes: 0 success, 1 validation problem
(bad input, failed verification), 2 solver failure.  Errors go to stderr
as one JSON line ``{"error": {"code": ..., "message": ...}}``.  For a
fixed command line the written artifacts are byte-identical across runs
(experiment CSVs excepted: they record wall-clock timings).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .experiments import experiment1, experiment2, gen_uniform
from .guarantee import heatmap, verify_certificate
from .linprog import KernelError, LpProblem
from .milp import MilpProblem, solve_milp, solve_milp_enumeration
from .model import (
    ONE_STAGE_METHODS,
    TWO_STAGE_METHODS,
    load_instance,
    load_reduction_result,
    load_uncertainty_set,
    save_reduction_result,
)
from .onestage import (
    brute_subset_oracle,
    reduce_assignment,
    reduce_continuous,
    reduce_kmeans,
    reduce_midpoint,
    reduce_subset,
)
from .robust import evaluate_one_stage, evaluate_two_stage, solve_one_stage, solve_two_stage
from .twostage import brute_two_stage, reduce_greedy_two_stage, reduce_subset_two_stage

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_SOLVER = 2

_RANDOMIZED_METHODS = ("cont", "kmeans")


class _CliError(Exception):
    def __init__(self, code: str, message: str, exit_code: int):
        super().__init__(message)
        self.code = code
        self.exit_code = exit_code


def _validation(message: str) -> _CliError:
    return _CliError("validation", message, EXIT_VALIDATION)


def _print(payload) -> None:
    print(json.dumps(payload))


def _cmd_reduce(args) -> int:
    U = load_uncertainty_set(args.input)
    method = args.method
    stage = args.stage
    if stage == 1 and method not in ONE_STAGE_METHODS:
        raise _validation(f"stage 1 supports methods {ONE_STAGE_METHODS}, got {method!r}")
    if stage == 2 and method not in TWO_STAGE_METHODS:
        raise _validation(f"stage 2 supports methods {TWO_STAGE_METHODS}, got {method!r}")
    if method in _RANDOMIZED_METHODS and args.seed is None:
        raise _validation(f"--seed is required for the randomized method {method!r}")
    if method == "midpoint":
        if args.k not in (None, 1):
            raise _validation("midpoint always produces K=1; omit --k or pass --k 1")
        result = reduce_midpoint(U)
    else:
        if args.k is None:
            raise _validation("--k is required for this method")
        if method == "cont":
            result = reduce_continuous(
                U, args.k, reps=args.reps or 10, max_iters=args.iters, seed=args.seed
            )
        elif method == "ip-mu":
            result = reduce_assignment(U, args.k, time_limit=args.time_limit)
        elif method == "ip-lambda":
            result = reduce_subset(U, args.k, time_limit=args.time_limit)
        elif method == "kmeans":
            result = reduce_kmeans(U, args.k, reps=args.reps or 1000, seed=args.seed)
        elif method == "ip2":
            result = reduce_subset_two_stage(U, args.k, time_limit=args.time_limit)
        elif method == "greedy2":
            result = reduce_greedy_two_stage(U, args.k)
        else:  # pragma: no cover - choices guard this
            raise _validation(f"unknown method {method!r}")
    save_reduction_result(result, args.out)
    _print(
        {
            "method": result.method,
            "stage": result.stage,
            "K": result.k,
            "t": result.t,
            "guarantee": result.guarantee,
            "exact": result.exact,
            "out": str(args.out),
        }
    )
    return EXIT_OK


def _cmd_guarantee(args) -> int:
    U = load_uncertainty_set(args.input)
    result = load_reduction_result(args.result)
    report = verify_certificate(U, result)
    if report.valid:
        cert = report.certificate
        _print(
            {
                "valid": True,
                "stage": cert.stage,
                "alpha": cert.alpha,
                "beta": cert.beta,
                "guarantee": cert.guarantee,
                "stated_guarantee": result.guarantee,
            }
        )
        return EXIT_OK
    _print({"valid": False, "failures": list(report.failures)})
    return EXIT_VALIDATION


def _cmd_heatmap(args) -> int:
    U = load_uncertainty_set(args.input)
    hm = heatmap(U, args.stage, args.min, args.max, args.step, cap=args.cap)
    hm.to_csv(args.out)
    x, y = hm.argmin_point
    _print(
        {
            "min_guarantee": hm.min_value,
            "argmin": [x, y],
            "cells": int(hm.values.size),
            "out": str(args.out),
        }
    )
    return EXIT_OK


def _cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    if args.problem is not None and args.problem != inst.kind:
        raise _validation(
            f"--problem {args.problem} does not match instance kind {inst.kind!r}"
        )
    if args.stages is not None and args.stages != inst.stages:
        raise _validation(
            f"--stages {args.stages} does not match instance stages {inst.stages}"
        )
    U = load_uncertainty_set(args.input)
    if inst.stages == 1:
        sol = solve_one_stage(inst, U, time_limit=args.time_limit)
        worst = evaluate_one_stage(inst, sol.x, U)
    else:
        sol = solve_two_stage(inst, U, time_limit=args.time_limit)
        worst = evaluate_two_stage(inst, sol.x, U)
    payload = {
        "kind": inst.kind,
        "stages": inst.stages,
        "x": [int(v) for v in np.round(sol.x)],
        "value": sol.value,
        "worst_case_check": worst,
        "exact": sol.exact,
        "per_scenario": None if sol.per_scenario is None else list(sol.per_scenario),
    }
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(payload, fh)
            fh.write("\n")
    _print(payload)
    return EXIT_OK


def _cmd_exp1(args) -> int:
    summary = experiment1(
        args.out_dir,
        args.seed,
        sets_per_family=args.sets,
        n=args.n,
        N=args.N,
        K=args.k,
        points=args.points,
        cont_reps=args.cont_reps,
        cont_iters=args.iters,
        km_reps=args.km_reps,
        jobs=args.jobs,
    )
    _print({f"{fam}:{meth}": rho for (fam, meth), rho in summary.items()})
    return EXIT_OK


def _cmd_exp2(args) -> int:
    if args.full_scale:
        n, N, k_values = 20, 100, list(range(1, 11))
    else:
        n, N, k_values = args.n, args.N, list(range(1, args.k_max + 1))
    rows = experiment2(
        args.out_dir,
        args.seed,
        problem=args.problem,
        stages=args.stage,
        n=n,
        N=N,
        instances=args.instances,
        k_values=k_values,
        methods=args.methods.split(",") if args.methods else None,
        time_limit=args.time_limit,
        cont_iters=args.iters,
        jobs=args.jobs,
    )
    by_method: dict = {}
    for r in rows:
        by_method.setdefault(r["method"], []).append(r["ratio"])
    _print({m: float(np.mean(v)) for m, v in by_method.items()})
    return EXIT_OK


def _cmd_oracle_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    failures = []

    for trial in range(args.trials):
        n = int(rng.integers(2, 5))
        N = int(rng.integers(3, 8))
        K = int(rng.integers(1, min(3, N) + 1))
        U = gen_uniform(n, N, 1, 20, seed=rng)
        t_ip = reduce_subset(U, K).t
        t_star = brute_subset_oracle(U, K)
        if abs(t_ip - t_star) > 1e-6:
            failures.append(f"subset trial {trial}: ip={t_ip:.9g} brute={t_star:.9g}")
    print(f"{'FAIL' if failures else 'ok'} one-stage subset vs enumeration ({args.trials} trials)")

    fail_count = len(failures)
    for trial in range(args.trials):
        n = int(rng.integers(2, 5))
        N = int(rng.integers(3, 8))
        K = int(rng.integers(1, min(4, N) + 1))
        U = gen_uniform(n, N, 0, 15, seed=rng)
        t_ip = reduce_subset_two_stage(U, K).t
        t_star = brute_two_stage(U, K)
        if abs(t_ip - t_star) > 1e-9:
            failures.append(f"two-stage trial {trial}: ip={t_ip:.9g} brute={t_star:.9g}")
    print(
        f"{'FAIL' if len(failures) > fail_count else 'ok'} "
        f"two-stage subset vs enumeration ({args.trials} trials)"
    )

    fail_count = len(failures)
    for trial in range(args.trials):
        nv = int(rng.integers(2, 7))
        c = rng.integers(-5, 6, size=nv).astype(float)
        A = rng.integers(0, 4, size=(2, nv)).astype(float)
        b = A.sum(axis=1) * 0.6
        lp = LpProblem(c=c, sense="max", A=A, senses=("<=", "<="), b=b, ub=np.ones(nv))
        prob = MilpProblem(lp=lp, binary=tuple(range(nv)))
        bb = solve_milp(prob, backend="bb")
        hs = solve_milp(prob, backend="highs")
        en = solve_milp_enumeration(prob)
        vals = [s.objective for s in (bb, hs, en) if s.status == "optimal"]
        stat = {s.status for s in (bb, hs, en)}
        if stat != {"optimal"} or max(vals) - min(vals) > 1e-6:
            failures.append(f"milp trial {trial}: bb/highs/enumeration disagree")
    print(
        f"{'FAIL' if len(failures) > fail_count else 'ok'} "
        f"milp engines vs enumeration ({args.trials} trials)"
    )

    if failures:
        for f in failures:
            print(f, file=sys.stderr)
        raise _CliError("solver", f"{len(failures)} oracle check(s) failed", EXIT_SOLVER)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with the validation code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(
            json.dumps({"error": {"code": "validation", "message": message}}),
            file=sys.stderr,
        )
        raise SystemExit(EXIT_VALIDATION)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="scenred",
        description="Scenario reduction for robust optimization, with certificates.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reduce", help="reduce an uncertainty set to K scenarios")
    p.add_argument("--input", required=True, help="uncertainty-set JSON file")
    p.add_argument("--k", type=int, default=None, help="number of reduced scenarios")
    p.add_argument(
        "--method",
        required=True,
        choices=sorted(set(ONE_STAGE_METHODS + TWO_STAGE_METHODS)),
    )
    p.add_argument("--stage", type=int, choices=(1, 2), default=1)
    p.add_argument("--reps", type=int, default=None, help="random restarts (cont/kmeans)")
    p.add_argument("--iters", type=int, default=20, help="max alternations (cont)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--time-limit", type=float, default=60.0)
    p.add_argument("--out", required=True, help="where to write the result JSON")
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser("guarantee", help="verify a reduction result against its set")
    p.add_argument("--input", required=True, help="uncertainty-set JSON file")
    p.add_argument("--result", required=True, help="reduction-result JSON file")
    p.set_defaults(func=_cmd_guarantee)

    p = sub.add_parser("heatmap", help="guarantee raster for 2-d sets (CSV)")
    p.add_argument("--input", required=True)
    p.add_argument("--stage", type=int, choices=(1, 2), required=True)
    p.add_argument("--min", type=float, required=True)
    p.add_argument("--max", type=float, required=True)
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--cap", type=float, default=3.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_heatmap)

    p = sub.add_parser("solve", help="solve a robust instance against a scenario set")
    p.add_argument("--instance", required=True, help="instance JSON file")
    p.add_argument(
        "--scenarios", "--input", dest="input", required=True,
        help="uncertainty-set JSON file",
    )
    p.add_argument(
        "--problem", choices=("selection", "vertex-cover"), default=None,
        help="expected instance kind; mismatch with the file is an error",
    )
    p.add_argument(
        "--stages", type=int, choices=(1, 2), default=None,
        help="expected stage count; mismatch with the file is an error",
    )
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--out", default=None, help="optional solution JSON file")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("exp1", help="correlation study of reduced worst-case values")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--sets", type=int, default=50)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--N", type=int, default=100)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--cont-reps", type=int, default=10)
    p.add_argument("--iters", type=int, default=20)
    p.add_argument("--km-reps", type=int, default=1000)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_exp1)

    p = sub.add_parser("exp2", help="reduce-solve-evaluate pipeline study")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--problem", choices=("selection", "vertex-cover"), default="selection")
    p.add_argument("--stage", type=int, choices=(1, 2), default=1)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--N", type=int, default=10)
    p.add_argument("--instances", type=int, default=25)
    p.add_argument("--k-max", type=int, default=10)
    p.add_argument("--methods", default=None, help="comma-separated method list")
    p.add_argument("--time-limit", type=float, default=60.0)
    p.add_argument("--iters", type=int, default=3, help="max alternations for cont")
    p.add_argument("--full-scale", action="store_true", help="run the large N=100 grid")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_exp2)

    p = sub.add_parser("oracle-check", help="cross-check solvers against brute force")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--trials", type=int, default=20)
    p.set_defaults(func=_cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CliError as e:
        print(json.dumps({"error": {"code": e.code, "message": str(e)}}), file=sys.stderr)
        return e.exit_code
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as e:
        print(json.dumps({"error": {"code": "validation", "message": str(e)}}), file=sys.stderr)
        return EXIT_VALIDATION
    except (KernelError, RuntimeError) as e:
        print(json.dumps({"error": {"code": "solver", "message": str(e)}}), file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
