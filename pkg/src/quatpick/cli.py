"""Command-line front end.

Subcommands:

* ``solve``  -- classify a problem file and construct a solution,
* ``schur``  -- run the Toeplitz contractivity test on a coefficient file,
* ``theta``  -- build the parametrizing 2x2 function of a PD problem,
* ``verify`` -- run the cross-route property suites on bundled or given data.

Problem files are JSON objects with ``nodes`` and ``targets`` as lists of
4-element real arrays [w, x, y, z] and an optional ``options`` object.
Reports are JSON on stdout (or ``--out``); byte-identical for identical
input and seed.  Exit codes: 0 success, 1 I/O or schema error, 2 negative
verdict (unsolvable / test failed / precondition), 3 inconsistent sphere
data.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from importlib import resources

import numpy as np

from .errors import DomainError, PreconditionError, QuatPickError
from .hardy import schur_toeplitz_test
from .npsolve import (
    Problem,
    SolutionHandle,
    classify,
    determinate_solve,
    extended_gamma_solve,
    lft_solution,
    pick_matrix_series,
    reduce_problem,
    schwarz_pick_check,
    solution_block_gram,
    theta_build,
    theta_j_check,
)
from .qlinalg import complex_embed, jacobi_eigvalsh
from .quat import Quaternion, qnorm
from .sampling import random_in_ball_many
from .series import QSeries, eval_series_many, tail_bound

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAIL = 2
EXIT_INCONSISTENT = 3

DEFAULT_FIXTURES = [
    "single_node.json",
    "identity_two_node.json",
    "pd_three_node.json",
    "sphere_triple.json",
    "sphere_triple_bad.json",
    "unsolvable.json",
]
CORRUPTED_FIXTURE = "corrupted_expectation.json"


class SchemaError(ValueError):
    pass


# -- input parsing ---------------------------------------------------------------


def _as_quaternion(value, field: str) -> Quaternion:
    if (
        not isinstance(value, list)
        or len(value) != 4
        or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in value)
    ):
        raise SchemaError(f"{field}: expected a 4-element array of real numbers")
    q = Quaternion(*value)
    if not all(np.isfinite(c) for c in value):
        raise SchemaError(f"{field}: entries must be finite")
    return q


def load_problem_file(path: str) -> tuple[Problem, dict, dict]:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("top-level value must be an object")
    for key in ("nodes", "targets"):
        if key not in doc or not isinstance(doc[key], list):
            raise SchemaError(f"missing or non-array field '{key}'")
    nodes = [_as_quaternion(v, f"nodes[{i}]") for i, v in enumerate(doc["nodes"])]
    targets = [_as_quaternion(v, f"targets[{i}]") for i, v in enumerate(doc["targets"])]
    if len(nodes) != len(targets):
        raise SchemaError("nodes and targets must have the same length")
    options = doc.get("options", {})
    if not isinstance(options, dict):
        raise SchemaError("options must be an object")
    for key, kind in (("truncation", int), ("seed", int), ("psd_tol", (int, float))):
        if key in options and not isinstance(options[key], kind):
            raise SchemaError(f"options.{key} has the wrong type")
    try:
        problem = Problem(nodes, targets)
    except DomainError as exc:
        raise SchemaError(str(exc)) from exc
    return problem, options, doc


def load_coefficients_file(path: str) -> QSeries:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict) or "coefficients" not in doc or not isinstance(doc["coefficients"], list):
        raise SchemaError("expected an object with a 'coefficients' array")
    qs = [_as_quaternion(v, f"coefficients[{i}]") for i, v in enumerate(doc["coefficients"])]
    if not qs:
        raise SchemaError("coefficients array must not be empty")
    return QSeries.from_quaternions(qs)


# -- serialization -----------------------------------------------------------------


def quat_json(q: Quaternion) -> list:
    return [float(q.w), float(q.x), float(q.y), float(q.z)]


def matrix_json(data: np.ndarray) -> list:
    return [[[float(c) for c in entry] for entry in row] for row in data]


def write_report(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- solve -------------------------------------------------------------------------


def _reduction_json(red) -> dict:
    return {
        "consistent": red.consistent,
        "groups": red.groups,
        "removed": red.removed,
        "checks": [
            {
                "sphere": [float(c.sphere[0]), float(c.sphere[1])],
                "kept": list(c.kept),
                "removed_index": c.removed_index,
                "expected": quat_json(c.expected),
                "got": quat_json(c.got),
                "ok": c.ok,
            }
            for c in red.checks
        ],
    }


def _solution_json(sol: SolutionHandle, truncation: int, head: int = 8) -> dict:
    series = sol.series(truncation)
    return {
        "kind": sol.kind,
        "parameter": quat_json(sol.parameter) if isinstance(sol.parameter, Quaternion) else (
            {"coefficients": [quat_json(sol.parameter.coeff(k)) for k in range(sol.parameter.order + 1)]}
            if isinstance(sol.parameter, QSeries)
            else None
        ),
        "series_head": [quat_json(series.coeff(k)) for k in range(min(head, series.order + 1))],
        "node_residuals": [float(r) for r in sol.residuals()],
        "series_node_residuals": [float(r) for r in sol.series_residuals()],
    }


def cmd_solve(args) -> int:
    t0 = time.perf_counter()
    problem, options, _ = load_problem_file(args.path)
    truncation = args.truncation if args.truncation is not None else options.get("truncation", 256)
    seed = args.seed if args.seed is not None else options.get("seed", 0)
    psd_tol = args.psd_tol if args.psd_tol is not None else options.get("psd_tol")
    samples = args.samples

    red = reduce_problem(problem)
    report: dict = {
        "input": {
            "path": args.path,
            "nodes": [quat_json(p) for p in problem.nodes],
            "targets": [quat_json(s) for s in problem.targets],
            "options_effective": {"truncation": truncation, "seed": seed, "psd_tol": psd_tol, "samples": samples},
        },
        "reduction": _reduction_json(red),
    }
    if not red.consistent:
        report["solvable"] = False
        report["status"] = "inconsistent-sphere-data"
        _finish_timing(report, t0, args.timing)
        write_report(report, args.out)
        return EXIT_INCONSISTENT

    cl = classify(red.problem, tol=psd_tol)
    report.update(
        {
            "pick_matrix": matrix_json(cl.pick.P.data),
            "stein_residual": float(cl.pick.stein_residual()),
            "solvable": cl.solvable,
            "determinate": cl.determinate,
            "rank": cl.rank,
            "pivots": [float(p) for p in cl.psd.pivots],
            "min_pivot": float(cl.min_pivot),
        }
    )
    if not cl.solvable:
        report["status"] = "unsolvable"
        report["solution"] = None
        _finish_timing(report, t0, args.timing)
        write_report(report, args.out)
        return EXIT_FAIL

    if cl.determinate:
        sol = determinate_solve(red.problem, tol=psd_tol, truncation=truncation)
    else:
        theta = theta_build(cl.pick, tol=psd_tol)
        sol = lft_solution(theta, QSeries.zero(), truncation=truncation)
    # report residuals against the original data: removed sphere nodes are
    # interpolated automatically once their targets passed the consistency check
    sol = SolutionHandle(fn=sol.fn, problem=problem, kind=sol.kind, parameter=sol.parameter, truncation=truncation)
    report["status"] = "solvable"
    report["solution"] = _solution_json(sol, truncation)

    if samples > 0:
        rng = np.random.default_rng(seed)
        pts = random_in_ball_many(rng, samples, 0.85)
        sp = schwarz_pick_check(sol, problem.nodes[0], pts)
        report["schwarz_pick"] = {
            "samples": samples,
            "seed": seed,
            "reference_node": quat_json(problem.nodes[0]),
            "max_violation": float(sp.max_violation),
            "equality_count": len(sp.equality_points),
        }
    else:
        report["schwarz_pick"] = None
    _finish_timing(report, t0, args.timing)
    write_report(report, args.out)
    return EXIT_OK


def _finish_timing(report: dict, t0: float, enabled: bool) -> None:
    # timing is opt-in so that default reports stay byte-identical across runs
    if enabled:
        report["timing_ms"] = round(1000.0 * (time.perf_counter() - t0), 3)


# -- schur --------------------------------------------------------------------------


def cmd_schur(args) -> int:
    series = load_coefficients_file(args.path)
    result = schur_toeplitz_test(series, n_max=args.n_max, tol=args.psd_tol)
    report = {
        "input": {"path": args.path, "coefficient_count": series.order + 1},
        "n_max": args.n_max,
        "passed": result.passed,
        "first_failure": result.first_failure,
    }
    write_report(report, args.out)
    return EXIT_OK if result.passed else EXIT_FAIL


# -- theta --------------------------------------------------------------------------


def cmd_theta(args) -> int:
    problem, options, _ = load_problem_file(args.path)
    truncation = args.truncation if args.truncation is not None else options.get("truncation", 256)
    seed = args.seed if args.seed is not None else options.get("seed", 0)
    psd_tol = args.psd_tol if args.psd_tol is not None else options.get("psd_tol")

    red = reduce_problem(problem)
    if not red.consistent:
        write_report({"status": "inconsistent-sphere-data"}, args.out)
        return EXIT_INCONSISTENT
    cl = classify(red.problem, tol=psd_tol)
    if not (cl.solvable and cl.rank == red.problem.n):
        write_report(
            {
                "status": "pick-matrix-not-positive-definite",
                "solvable": cl.solvable,
                "rank": cl.rank,
                "n": red.problem.n,
            },
            args.out,
        )
        return EXIT_FAIL
    theta = theta_build(cl.pick, tol=psd_tol)
    rng = np.random.default_rng(seed)
    pts = random_in_ball_many(rng, max(args.samples, 8), 0.85)
    sample_points = [Quaternion.from_array(p) for p in pts[:8]]
    gram = theta_j_check(theta, sample_points)
    tvals = theta.eval_many(pts)
    t22 = qnorm(tvals[:, 1, 1, :])
    stream = theta.coeff_stream(min(truncation + 1, 64))
    report = {
        "status": "ok",
        "n": red.problem.n,
        "identity_residual": float(theta.identity_residual()),
        "theta22_min_abs": float(t22.min()),
        "jkernel_min_pivot": float(gram.psd.min_pivot),
        "jkernel_psd": gram.psd.is_psd,
        "coefficient_stream": [matrix_json(stream[k]) for k in range(stream.shape[0])],
        "seed": seed,
    }
    write_report(report, args.out)
    return EXIT_OK


# -- verify --------------------------------------------------------------------------


def _fixture_paths():
    return resources.files("quatpick") / "fixtures"


def _load_fixture(name: str):
    path = _fixture_paths() / name
    with resources.as_file(path) as p:
        return load_problem_file(str(p)) + (name,)


def _check(section: dict, name: str, ok: bool, value) -> bool:
    section[name] = {"ok": bool(ok), "value": value}
    return bool(ok)


def _verify_problem(problem: Problem, doc: dict, samples: int, rng, grid_rows, psd_tol=None) -> tuple[dict, bool]:
    sections: dict = {}
    ok = True
    expect = doc.get("expect", {})

    red = reduce_problem(problem)
    if "consistent" in expect:
        ok &= _check(sections, "expected_consistency", red.consistent == expect["consistent"], red.consistent)
    if not red.consistent:
        # nothing further can be verified on inconsistent data
        return sections, ok

    cl = classify(red.problem, tol=psd_tol)
    for key, got in (("solvable", cl.solvable), ("determinate", cl.determinate), ("rank", cl.rank)):
        if key in expect:
            ok &= _check(sections, f"expected_{key}", got == expect[key], got)

    # Pick matrix: closed form vs truncated series oracle
    pick = cl.pick
    series_P = pick_matrix_series(red.problem, terms=200)
    prod = np.array([[abs(p) * abs(q) for q in red.problem.nodes] for p in red.problem.nodes])
    bound = prod**200 * 2.0 / (1.0 - prod) + 1e-12
    gap = qnorm(pick.P.data - series_P.data)
    ok &= _check(sections, "pick_series_oracle", bool(np.all(gap <= bound)), float(gap.max()))
    stein = pick.stein_residual()
    ok &= _check(
        sections, "stein_identity", stein <= 1e-11 * (1.0 + pick.P.max_abs()), float(stein)
    )

    # LDL classification vs complex-embedding Jacobi eigenvalues
    eigs = jacobi_eigvalsh(complex_embed(pick.P))
    embed_psd = bool(eigs.min() >= -1e-9 * max(1.0, abs(eigs).max()))
    ok &= _check(sections, "ldl_vs_embedding", cl.solvable == embed_psd, [cl.solvable, embed_psd])

    if not cl.solvable:
        return sections, ok

    route_tol = 1e-8
    if cl.determinate:
        sol = determinate_solve(red.problem, tol=psd_tol)
        alt = extended_gamma_solve(red.problem, tol=psd_tol)
        if samples > 0:
            pts = random_in_ball_many(rng, min(samples, 50), 0.7)
            agree = float(qnorm(sol.eval_many(pts) - alt.eval_many(pts)).max())
            ok &= _check(sections, "determinate_two_routes", agree <= route_tol, agree)
    else:
        theta = theta_build(pick, tol=psd_tol)
        sol = lft_solution(theta, QSeries.zero())
    resid = float(sol.max_residual()) if red.problem.n else 0.0
    ok &= _check(sections, "node_residuals", resid <= 1e-8, resid)

    if samples > 0:
        pts = random_in_ball_many(rng, samples, 0.7)
        series = sol.series()
        tails = tail_bound(series, 0.7) + 1e-9
        gap = float(qnorm(sol.eval_many(pts) - eval_series_many(series, pts)).max())
        ok &= _check(sections, "pointwise_vs_series", gap <= tails, gap)

        sp = schwarz_pick_check(sol, red.problem.nodes[0], pts)
        ok &= _check(sections, "schwarz_pick", sp.max_violation <= 1e-10, float(sp.max_violation))
        if grid_rows is not None:
            for row, lhs, rhs in zip(pts, sp.lhs, sp.rhs):
                grid_rows.append([row[0], row[1], row[2], row[3], lhs, rhs, rhs - lhs])

        qpts = [Quaternion.from_array(p) for p in random_in_ball_many(rng, 4, 0.7)]
        gram = solution_block_gram(pick, sol, qpts)
        ok &= _check(
            sections,
            "block_kernel_gram",
            gram.psd.is_psd or gram.psd.min_pivot >= -1e-9,
            float(gram.psd.min_pivot),
        )
    return sections, ok


def cmd_verify(args) -> int:
    rng = np.random.default_rng(args.seed)
    entries = []
    if args.path:
        problem, _, doc = load_problem_file(args.path)
        entries.append((args.path, problem, doc))
    else:
        for name in DEFAULT_FIXTURES:
            problem, _, doc, fname = _load_fixture(name)
            entries.append((fname, problem, doc))

    grid_rows = [] if args.grid else None
    results = []
    all_ok = True
    for name, problem, doc in entries:
        sections, ok = _verify_problem(problem, doc, args.samples, rng, grid_rows, psd_tol=args.psd_tol)
        results.append({"name": name, "passed": ok, "sections": sections})
        all_ok &= ok

    report = {
        "passed": all_ok,
        "samples": args.samples,
        "seed": args.seed,
        "problems": results,
    }
    write_report(report, args.out)
    if args.grid:
        with open(args.grid, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["p_w", "p_x", "p_y", "p_z", "lhs", "rhs", "slack"])
            for row in grid_rows:
                writer.writerow([repr(float(v)) for v in row])
    return EXIT_OK if all_ok else EXIT_FAIL


# -- entry point ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quatpick", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="write the JSON report to this path instead of stdout")
        p.add_argument("--psd-tol", type=float, default=None, help="pivot tolerance (default: scale-aware)")

    p_solve = sub.add_parser("solve", help="classify and solve a problem file")
    p_solve.add_argument("path")
    common(p_solve)
    p_solve.add_argument("--truncation", type=int, default=None, help="series truncation order (default 256)")
    p_solve.add_argument("--seed", type=int, default=None, help="sampling seed (default 0)")
    p_solve.add_argument("--samples", type=int, default=1000, help="verification sample count")
    p_solve.add_argument("--timing", action="store_true", help="include wall-clock timing in the report")
    p_solve.set_defaults(func=cmd_solve)

    p_schur = sub.add_parser("schur", help="Toeplitz contractivity test for a coefficient file")
    p_schur.add_argument("path")
    common(p_schur)
    p_schur.add_argument("--n-max", type=int, default=64, help="largest section size to test")
    p_schur.set_defaults(func=cmd_schur)

    p_theta = sub.add_parser("theta", help="build the parametrizing 2x2 function of a PD problem")
    p_theta.add_argument("path")
    common(p_theta)
    p_theta.add_argument("--truncation", type=int, default=None)
    p_theta.add_argument("--seed", type=int, default=None)
    p_theta.add_argument("--samples", type=int, default=1000)
    p_theta.set_defaults(func=cmd_theta)

    p_verify = sub.add_parser("verify", help="run the cross-route property suites")
    p_verify.add_argument("path", nargs="?", default=None, help="problem file (default: bundled fixtures)")
    common(p_verify)
    p_verify.add_argument("--samples", type=int, default=1000)
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--grid", default=None, metavar="CSV", help="write per-sample Schwarz-Pick values to CSV")
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except QuatPickError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
