"""Command-line entry point: scenario ingestion, orchestration, report files.

Subcommands: simulate, moments, recursion-check, laplace, verify,
fmoment, couple.  Exit codes: 0 on success/pass, 1 on a validation or
configuration error, 2 on a failed verification assertion.  All CSV
numbers use the shortest round-trip decimal form, so identical
invocations produce byte-identical file bodies.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import verify as verify_mod
from .errors import Cbre2Error, ConfigError
from .fmoment import f_moment_verdict
from .moments import (
    annealed_laplace_mc,
    moment_table,
    monomial_basis,
    quenched_laplace,
    recursion_check,
)
from .env import sample_env_path
from .scenario import ScenarioConfig, dump_scenario, load_scenario
from .simulate import resolve_predicate, scenario_states, simulate_paths
from ._util import format_float, fsum_mean_se

SUBCOMMANDS = ("simulate", "moments", "recursion-check", "laplace", "verify", "fmoment", "couple")


def _write(path: str, lines: list[str]) -> None:
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def _out_dir(sc: ScenarioConfig) -> str:
    d = sc.output.directory
    os.makedirs(d, exist_ok=True)
    return d


def _cmd_simulate(sc: ScenarioConfig) -> int:
    out = _out_dir(sc)
    times, states = scenario_states(sc, sc.n_paths, sc.seed, record_times=[sc.horizon])
    m1, se1 = fsum_mean_se(states[0, :, 0, 0])
    m2, se2 = fsum_mean_se(states[0, :, 0, 1])
    _write(
        os.path.join(out, "simulate_summary.csv"),
        [
            "t,statistic,estimate,se,target,z,pass",
            f"{format_float(sc.horizon)},mean_X1,{format_float(m1)},{format_float(se1)},nan,nan,True",
            f"{format_float(sc.horizon)},mean_X2,{format_float(m2)},{format_float(se2)},nan,nan,True",
        ],
    )
    n_dump = min(sc.output.dump_paths, sc.n_paths)
    if n_dump > 0:
        for i, path in enumerate(simulate_paths(sc, n_dump, sc.seed)):
            xi = path.xi_values()
            lines = ["t,X1,X2,xi"]
            lines += [
                f"{format_float(t)},{format_float(x1)},{format_float(x2)},{format_float(x)}"
                for t, x1, x2, x in zip(path.grid, path.states[:, 0], path.states[:, 1], xi)
            ]
            _write(os.path.join(out, f"path_{i:03d}.csv"), lines)
    print(
        f"simulate [{sc.name or 'scenario'}]: {sc.n_paths} paths to t={sc.horizon:g}; "
        f"mean X({sc.horizon:g}) = ({m1:.6g}, {m2:.6g}); dumped {n_dump} paths to {out}"
    )
    return 0


def _cmd_moments(sc: ScenarioConfig, degree: int) -> int:
    out = _out_dir(sc)
    t_grid = np.linspace(0.0, sc.horizon, 11)
    pred = resolve_predicate(sc.branching, sc.truncation)
    table = moment_table(sc.environment, sc.branching, sc.x0, t_grid, degree, pred)
    lines = ["t,p,q,value,finite_flag"]
    for p, q in monomial_basis(degree):
        for k, t in enumerate(t_grid):
            v = table.values[(p, q)][k]
            lines.append(
                f"{format_float(t)},{p},{q},{format_float(v)},{table.finite[(p, q)]}"
            )
    _write(os.path.join(out, "moments.csv"), lines)
    n_inf = sum(1 for pq in table.finite if not table.finite[pq])
    print(
        f"moments [{sc.name or 'scenario'}]: degree {degree} on {len(t_grid)} times; "
        f"{n_inf} monomials flagged infinite; wrote {out}/moments.csv"
    )
    return 0


def _cmd_recursion_check(sc: ScenarioConfig, degree: int) -> int:
    out = _out_dir(sc)
    degree = max(2, degree)
    t_grid = [sc.horizon / 2.0, sc.horizon]
    table = moment_table(sc.environment, sc.branching, sc.x0, t_grid, degree)
    lines = ["t,n,type,lhs,rhs,residual"]
    worst = 0.0
    for n in range(2, degree + 1):
        for type_index in (1, 2):
            for t in t_grid:
                lhs, rhs, res = recursion_check(
                    sc.environment, sc.branching, table, n, type_index, t
                )
                worst = max(worst, res)
                lines.append(
                    f"{format_float(t)},{n},{type_index},"
                    f"{format_float(lhs)},{format_float(rhs)},{format_float(res)}"
                )
    _write(os.path.join(out, "recursion_check.csv"), lines)
    ok = worst < sc.recursion_tol
    print(
        f"recursion-check [{sc.name or 'scenario'}]: orders 2..{degree}, both types; "
        f"max residual {worst:.3g} ({'PASS' if ok else 'FAIL'} at {sc.recursion_tol:g})"
    )
    return 0 if ok else 2


def _cmd_laplace(sc: ScenarioConfig) -> int:
    if sc.laplace_lambda is None:
        raise ConfigError("laplace: missing 'laplace' block ({lambda, t}) in the config")
    out = _out_dir(sc)
    lam, t = sc.laplace_lambda, sc.laplace_t or sc.horizon
    env_path = sample_env_path(sc.environment, t, sc.step, np.random.default_rng(sc.seed))
    ql = quenched_laplace(env_path, sc.branching, lam, t)
    lines = ["r,v1,v2"]
    lines += [
        f"{format_float(r)},{format_float(v1)},{format_float(v2)}"
        for r, (v1, v2) in zip(ql.r_grid, ql.v)
    ]
    _write(os.path.join(out, "laplace.csv"), lines)
    try:
        ann, ann_se = annealed_laplace_mc(
            sc.environment, sc.branching, sc.x0, lam, t, sc.n_paths, sc.step, sc.seed + 1
        )
    except NotImplementedError:
        # vectorized annealing is atom-only; the quenched CSV stands alone
        print(
            f"laplace [{sc.name or 'scenario'}]: v0 = ({ql.v0[0]:.8g}, {ql.v0[1]:.8g}); "
            f"annealed average skipped (tail components in the jump measures)"
        )
        return 0
    _, states = scenario_states(sc, sc.n_paths, sc.seed + 2, record_times=[t])
    direct, direct_se = fsum_mean_se(
        np.exp(-(states[0, :, 0, 0] * lam[0] + states[0, :, 0, 1] * lam[1]))
    )
    z = (ann - direct) / math.hypot(ann_se, direct_se) if (ann_se or direct_se) else 0.0
    print(
        f"laplace [{sc.name or 'scenario'}]: v0 = ({ql.v0[0]:.8g}, {ql.v0[1]:.8g}); "
        f"annealed {ann:.6g} (se {ann_se:.2g}) vs direct MC {direct:.6g} "
        f"(se {direct_se:.2g}), z = {z:+.2f}"
    )
    return 0


def _cmd_verify(sc: ScenarioConfig, degree: int) -> int:
    out = _out_dir(sc)
    reports = []
    rep = verify_mod.estimate_moments(sc, degree, sc.n_paths, sc.seed)
    verify_mod.write_report_csv(os.path.join(out, "verify_moments.csv"), rep)
    reports.append(rep)
    t_grid = sc.horizon * np.arange(1, 6) / 5
    rep = verify_mod.martingale_test(sc, t_grid, sc.n_paths, sc.seed + 1)
    verify_mod.write_report_csv(os.path.join(out, "verify_martingale.csv"), rep)
    reports.append(rep)
    if sc.coupling_k is not None:
        k1, k2 = sc.coupling_k
        rep = verify_mod.coupling_monotonicity_report(sc, k1, k2, sc.n_paths, sc.seed + 2)
        verify_mod.write_report_csv(os.path.join(out, "verify_coupling.csv"), rep)
        reports.append(rep)
    if sc.trunc_k_list is not None:
        rep = verify_mod.truncation_convergence_report(
            sc, sc.trunc_k_list, sc.n_paths, sc.seed + 3
        )
        verify_mod.write_report_csv(os.path.join(out, "verify_convergence.csv"), rep)
        reports.append(rep)
    n_pass = sum(r.passed for r in reports)
    ok = n_pass == len(reports)
    names = ", ".join(f"{r.name}={'PASS' if r.passed else 'FAIL'}" for r in reports)
    print(f"verify [{sc.name or 'scenario'}]: {n_pass}/{len(reports)} reports pass ({names})")
    return 0 if ok else 2


def _cmd_fmoment(sc: ScenarioConfig) -> int:
    if sc.fmoment_function is None:
        raise ConfigError("fmoment: missing 'fmoment' block (test-function descriptor)")
    out = _out_dir(sc)
    verdict = f_moment_verdict(sc.environment, sc.branching, sc.x0, sc.fmoment_function)
    payload = json.dumps(verdict.to_dict(), indent=2, sort_keys=True) + "\n"
    with open(os.path.join(out, "fmoment.json"), "w") as f:
        f.write(payload)
    print(
        f"fmoment [{sc.name or 'scenario'}]: f = {sc.fmoment_function.describe()} -> "
        f"{verdict.verdict} (branching {verdict.criteria['branching_tail']}, "
        f"environment {verdict.criteria['environment_tail']})"
    )
    return 0


def _cmd_couple(sc: ScenarioConfig) -> int:
    if sc.coupling_k is None:
        raise ConfigError("couple: missing 'verify.coupling_k' [k1, k2] in the config")
    out = _out_dir(sc)
    k1, k2 = sc.coupling_k
    rep = verify_mod.coupling_monotonicity_report(sc, k1, k2, sc.n_paths, sc.seed)
    verify_mod.write_report_csv(os.path.join(out, "coupling.csv"), rep)
    print(
        f"couple [{sc.name or 'scenario'}]: k1={k1:g} <= k2={k2:g} over {sc.n_paths} paths: "
        f"{'PASS' if rep.passed else 'FAIL'}"
    )
    return 0 if rep.passed else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cbre2",
        description="Two-type branching processes in a Levy random environment: "
        "simulation, exact moments, verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="scenario JSON file")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--paths", type=int, default=None, help="override the path count")
        p.add_argument("--out", default=None, help="override the output directory")
        p.add_argument("--n", type=int, default=None, help="moment degree override")
        p.add_argument(
            "--dump-config",
            action="store_true",
            help="echo the validated, normalized config and exit",
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        sc = load_scenario(args.config)
        sc = sc.with_overrides(
            seed=args.seed, n_paths=args.paths, out_dir=args.out, moment_degree=args.n
        )
        if args.dump_config:
            sys.stdout.write(dump_scenario(sc))
            return 0
        degree = sc.moment_degree
        if args.command == "simulate":
            return _cmd_simulate(sc)
        if args.command == "moments":
            return _cmd_moments(sc, degree)
        if args.command == "recursion-check":
            return _cmd_recursion_check(sc, degree)
        if args.command == "laplace":
            return _cmd_laplace(sc)
        if args.command == "verify":
            return _cmd_verify(sc, degree)
        if args.command == "fmoment":
            return _cmd_fmoment(sc)
        if args.command == "couple":
            return _cmd_couple(sc)
        raise AssertionError(args.command)  # pragma: no cover
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except Cbre2Error as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
