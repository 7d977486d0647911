"""Batch command-line front end.

Commands: jac (selected Jacobian element with its certificate data),
verify (run the verification suite), newton (semismooth Newton solve),
dd (directional derivative with a finite-difference cross-check).
JSON output is byte-stable for fixed inputs and seeds.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .dcmax import DEFAULT_TOL_ACT, dd_F, eval_F, load_problem, load_problem_file
from .expr import DomainError
from .instances import random_affine_document
from .jacobian import (
    DEFAULT_TOL_TIE,
    check_witness,
    clarke_jacobian_element,
    selection_differences,
    verify_cone_linearity,
    verify_limit_inclusion,
    witness_direction,
)
from .newton import build_ncp, ncp_residual, solve
from .oracle import (
    DEFAULT_PROBE_RADIUS,
    brute_force_subdifferential,
    finite_diff_dd,
    hull_membership,
    is_affine,
)

__all__ = ["main", "console_main"]

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_INPUT = 2
EXIT_DOMAIN = 3
EXIT_SINGULAR = 4
EXIT_NOT_CONVERGED = 5


class _UsageError(ValueError):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(part) for part in text.split(",")])
    except ValueError as exc:
        raise _UsageError(f"bad vector {text!r}: {exc}") from None


def _parse_random_spec(text: str, default_seed: int) -> dict:
    spec = {"seed": default_seed}
    for part in text.split(","):
        key, _, value = part.partition("=")
        if key not in ("n", "m", "pieces", "seed") or not value:
            raise _UsageError(f"bad --random entry {part!r} (expected n=, m=, pieces=, seed=)")
        spec[key] = int(value)
    for key in ("n", "m", "pieces"):
        if key not in spec:
            raise _UsageError(f"--random is missing '{key}='")
    return spec


def _load_function(args):
    if getattr(args, "random", None):
        spec = _parse_random_spec(args.random, args.seed)
        return load_problem(random_affine_document(**spec))
    if getattr(args, "ncp", None):
        m_path, q_path = args.ncp
        M = np.atleast_2d(np.loadtxt(m_path, delimiter=",", dtype=float))
        q = np.atleast_1d(np.loadtxt(q_path, delimiter=",", dtype=float))
        return build_ncp(M, q)
    if args.problem is None:
        raise _UsageError("no problem given: use -p/--problem, --random, or --ncp")
    return load_problem_file(args.problem)


def _selection_payload(sel) -> dict:
    return {
        "convention": sel.convention,
        "components": [
            {
                "g_active": list(c.g_active),
                "h_active": list(c.h_active),
                "g_chain": [list(level) for level in c.g_chain],
                "h_chain": [list(level) for level in c.h_chain],
                "g_selected": list(c.g_selected),
                "h_selected": list(c.h_selected),
                "chosen_g": c.chosen_g,
                "chosen_h": c.chosen_h,
            }
            for c in sel.components
        ],
    }


def cmd_jac(args) -> int:
    F = _load_function(args)
    x = _parse_vector(args.point)
    elem = clarke_jacobian_element(F, x, args.tol_act, args.tol_tie, args.convention)
    diffs = selection_differences(F, x, elem.provenance)
    witness = witness_direction(diffs, F.n, args.convention)
    payload = {
        "command": "jac",
        "point": x.tolist(),
        "convention": args.convention,
        "xi": elem.xi.tolist(),
        "selection": _selection_payload(elem.provenance),
        "gamma_count": diffs.count,
        "y_bar": witness.y_bar.tolist(),
    }
    if args.json:
        print(_dump(payload))
    else:
        print(f"xi = {elem.xi.tolist()}")
        for i, c in enumerate(elem.provenance.components):
            g_chain = " > ".join(str(list(level)) for level in c.g_chain)
            h_chain = " > ".join(str(list(level)) for level in c.h_chain)
            print(f"component {i}: g chain {g_chain} (chose {c.chosen_g})")
            print(f"component {i}: h chain {h_chain} (chose {c.chosen_h})")
        print(f"difference vectors: {diffs.count}")
        print(f"witness direction: {witness.y_bar.tolist()}")
    return EXIT_OK


def cmd_verify(args) -> int:
    F = _load_function(args)
    x = _parse_vector(args.point)
    elem = clarke_jacobian_element(F, x, args.tol_act, args.tol_tie, args.convention)
    diffs = selection_differences(F, x, elem.provenance)
    witness = witness_direction(diffs, F.n, args.convention)
    checks: dict[str, dict] = {}

    wrep = check_witness(diffs, witness, args.convention)
    checks["witness_validity"] = {
        "status": "pass" if wrep.passed else "fail",
        "count": wrep.count,
        "min_margin": float(np.min(wrep.margins)) if wrep.count else None,
    }

    cone = verify_cone_linearity(
        F, x, elem, witness.y_bar, samples=args.samples, seed=args.seed, tol_act=args.tol_act
    )
    if cone.status == "inconclusive":
        checks["cone_linearity"] = {
            "status": "inconclusive",
            "kept": 0,
            "samples": cone.samples,
            "max_discrepancy": None,
            "tolerance_at_max": None,
        }
    else:
        checks["cone_linearity"] = {
            "status": "pass" if cone.passed else "fail",
            "kept": cone.kept,
            "samples": cone.samples,
            "max_discrepancy": cone.max_discrepancy,
            "tolerance_at_max": cone.tolerance_at_max,
        }

    limit = verify_limit_inclusion(F, x, elem, witness.y_bar, tol_act=args.tol_act)
    checks["limit_inclusion"] = {
        "status": (
            "inconclusive"
            if limit.status == "degenerate"
            else ("pass" if limit.passed else "fail")
        ),
        "final_distance": limit.final_distance,
        "tolerance": limit.tolerance,
        "points": [
            {"t": p.t, "degenerate": p.degenerate, "distance": p.distance} for p in limit.points
        ],
    }

    if is_affine(F, seed=args.seed):
        matrices, report = brute_force_subdifferential(
            F,
            x,
            probe_radius=args.radius,
            seed=args.seed,
            tol_act=args.tol_act,
            return_report=True,
        )
        cert = hull_membership(elem.xi, matrices)
        status = "inconclusive" if cert.member is None else ("pass" if cert.member else "fail")
        checks["hull_membership"] = {
            "status": status,
            "member": cert.member,
            "weights": cert.weights.tolist(),
            "violation": cert.violation,
            "profiles_found": report.profiles_found,
            "samples_kept": report.samples_kept,
        }
    else:
        checks["hull_membership"] = {"status": "skipped", "reason": "non-affine"}

    inconclusive = sorted(k for k, v in checks.items() if v["status"] == "inconclusive")
    passed = not any(v["status"] == "fail" for v in checks.values())
    payload = {
        "command": "verify",
        "point": x.tolist(),
        "convention": args.convention,
        "xi": elem.xi.tolist(),
        "checks": checks,
        "inconclusive": inconclusive,
        "passed": passed,
    }
    if args.json:
        print(_dump(payload))
    else:
        for name, result in checks.items():
            print(f"{name}: {result['status']}")
        print(f"overall: {'pass' if passed else 'FAIL'}")
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def cmd_newton(args) -> int:
    F = _load_function(args)
    x0 = _parse_vector(args.x0) if args.x0 else np.zeros(F.n)
    trace = solve(
        F,
        x0,
        tol=args.tol,
        max_iters=args.max_iters,
        tol_act=args.tol_act,
        tol_tie=args.tol_tie,
        convention=args.convention,
    )
    summary = {
        "status": trace.status,
        "solution": trace.solution.tolist(),
        "residual": trace.residual,
        "iterations": len(trace.steps) - 1,
    }
    if getattr(args, "ncp", None):
        m_path, q_path = args.ncp
        M = np.atleast_2d(np.loadtxt(m_path, delimiter=",", dtype=float))
        q = np.atleast_1d(np.loadtxt(q_path, delimiter=",", dtype=float))
        summary["complementarity_residual"] = ncp_residual(M, q, trace.solution)
    if args.json:
        for line in trace.iter_json_lines():
            print(line)
        print(_dump(summary))
    else:
        for k, s in enumerate(trace.steps):
            print(f"iter {k}: x = {s.x.tolist()}, residual = {s.residual:.3e}")
        print(f"status: {trace.status}")
        if "complementarity_residual" in summary:
            print(f"complementarity residual: {summary['complementarity_residual']:.3e}")
    if trace.status == "converged":
        return EXIT_OK
    if trace.status == "singular":
        return EXIT_SINGULAR
    return EXIT_NOT_CONVERGED


def cmd_dd(args) -> int:
    F = _load_function(args)
    x = _parse_vector(args.point)
    y = _parse_vector(args.direction)
    value = dd_F(F, x, y, args.tol_act)
    fd = finite_diff_dd(F, x, y)
    payload = {
        "command": "dd",
        "point": x.tolist(),
        "direction": y.tolist(),
        "F": eval_F(F, x).tolist(),
        "dd": value.tolist(),
        "finite_diff": fd.value.tolist(),
        "fd_convergence": fd.convergence,
    }
    if args.json:
        print(_dump(payload))
    else:
        print(f"dd = {value.tolist()}")
        print(f"finite difference = {fd.value.tolist()} (gap {fd.convergence:.3e})")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-p", "--problem", help="problem JSON file")
    common.add_argument("--random", help="generate an instance: n=,m=,pieces=[,seed=]")
    common.add_argument("--tol-act", type=float, default=DEFAULT_TOL_ACT, dest="tol_act")
    common.add_argument("--tol-tie", type=float, default=DEFAULT_TOL_TIE, dest="tol_tie")
    common.add_argument("--convention", choices=("min", "max"), default="min")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--json", action="store_true", help="machine-readable output")

    parser = argparse.ArgumentParser(prog="dcjac", description=__doc__)
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_jac = sub.add_parser("jac", parents=[common], help="compute a generalized Jacobian element")
    p_jac.add_argument("-x", "--point", required=True, help="comma-separated coordinates")
    p_jac.set_defaults(func=cmd_jac)

    p_verify = sub.add_parser("verify", parents=[common], help="run the verification suite")
    p_verify.add_argument("-x", "--point", required=True)
    p_verify.add_argument("--radius", type=float, default=DEFAULT_PROBE_RADIUS)
    p_verify.add_argument("--samples", type=int, default=200)
    p_verify.set_defaults(func=cmd_verify)

    p_newton = sub.add_parser("newton", parents=[common], help="semismooth Newton solve")
    p_newton.add_argument("--x0", help="starting point (default: origin)")
    p_newton.add_argument("--tol", type=float, default=1e-10)
    p_newton.add_argument("--max-iters", type=int, default=50, dest="max_iters")
    p_newton.add_argument(
        "--ncp",
        nargs=2,
        metavar=("M.csv", "q.csv"),
        help="build min(x, Mx+q) = 0 from CSV data",
    )
    p_newton.set_defaults(func=cmd_newton)

    p_dd = sub.add_parser("dd", parents=[common], help="directional derivative")
    p_dd.add_argument("-x", "--point", required=True)
    p_dd.add_argument("-y", "--direction", required=True)
    p_dd.set_defaults(func=cmd_dd)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        # ParseError, SchemaError, usage and dimension errors all land here
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def console_main() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    console_main()
