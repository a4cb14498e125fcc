"""Command-line entry point.

Exit status: 0 on success, 2 on input errors, 1 on runtime failures
(including non-convergence under ``--require-converged``).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .agents import convergence_scan, simulate_agents
from .artifacts import (
    RunManifest,
    dump_rows,
    emit_plot_data,
    read_measure_csv,
    write_matrix,
    write_rows,
)
from .complexity import congestion_family, mfg_gap_scan, scaling_report
from .domain import brute_force_fixed_points, kleene_lfp, load_poset
from .errors import InputError
from .game import best_response_dynamics, equilibria_csv, find_pure_equilibria, load_game
from .metrics import wasserstein1_grid
from .mfg import energy, picard_solve
from .scenario import load_scenario


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(message)


class RuntimeFailure(Exception):
    pass


def _int_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("list is empty")
    return values


def _n_range(text):
    if ".." in text:
        a, _, b = text.partition("..")
        try:
            lo, hi = int(a), int(b)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected a..b, got {text!r}")
        if hi < lo:
            raise argparse.ArgumentTypeError(f"empty range {text!r}")
        return list(range(lo, hi + 1))
    return _int_list(text)


def _manifest(args, subcommand, parameters, **kw) -> RunManifest:
    return RunManifest(subcommand, parameters, invocation=list(args.argv), **kw)


def _manifest_path(out: Path) -> Path:
    return out.with_name(out.name + ".manifest.json")


def cmd_fixpoint(args):
    poset, fmap = load_poset(args.file)
    if fmap is None:
        raise InputError("file declares no map", None, args.file)
    lfp, trace = kleene_lfp(fmap)
    fixed = sorted(brute_force_fixed_points(fmap))
    out = Path(args.out_dir)
    names = poset.names
    trace_csv = write_rows(out / "trace.csv", ["step", "element"], enumerate(names[e] for e in trace))
    fixed_csv = write_rows(out / "fixed_points.csv", ["element"], ([names[e]] for e in fixed))
    print(f"lfp {names[lfp]} after {len(trace) - 1} step(s)")
    _manifest(
        args,
        "fixpoint",
        {"file": str(args.file)},
        outputs=[str(trace_csv), str(fixed_csv)],
        results={"lfp": names[lfp], "fixed_points": [names[e] for e in fixed]},
    ).write(out / "manifest.json")


def cmd_nash(args):
    game = load_game(args.file)
    result = find_pure_equilibria(game)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    eq_csv = out / "equilibria.csv"
    eq_csv.write_text(equilibria_csv(game, result))
    outputs = [str(eq_csv)]
    summary = {
        "maximin": result.maximin,
        "minimax": result.minimax,
        "has_pure_saddle": result.has_pure_saddle,
        "equilibria": len(result.pure_equilibria),
    }
    params = {"file": str(args.file)}
    if args.start:
        x, y = (game.points.index(s) if s in game.points else -1 for s in args.start)
        if x < 0 or y < 0:
            raise InputError(f"unknown start point in {args.start}")
        traj, converged = best_response_dynamics(game, (x, y), args.max_rounds)
        dyn = write_rows(
            out / "dynamics.csv",
            ["move", "x", "y"],
            ((i, game.points[a], game.points[b]) for i, (a, b) in enumerate(traj)),
        )
        outputs.append(str(dyn))
        summary["dynamics_converged"] = converged
        params.update(start=list(args.start), max_rounds=args.max_rounds)
    print(
        f"{len(result.pure_equilibria)} pure equilibria; "
        f"maximin {result.maximin!r}, minimax {result.minimax!r}"
    )
    _manifest(args, "nash", params, outputs=outputs, results=summary).write(out / "manifest.json")


def cmd_mfg(args):
    scenario = load_scenario(args.scenario)
    sol = picard_solve(scenario)
    out = Path(args.out_dir)
    grid = scenario.grid
    res_csv = write_rows(out / "residuals.csv", ["iteration", "residual"], enumerate(sol.residuals, 1))
    mu_csv = write_matrix(out / "mu.csv", sol.mu, grid)
    phi_csv = write_matrix(out / "phi.csv", sol.phi, grid)
    policy_csv = write_matrix(
        out / "policy.csv", np.asarray(scenario.controls)[sol.policy], grid
    )
    series = {"energy": [energy(scenario, m, "paper") for m in sol.mu]}
    if sol.residuals:
        series["residual"] = sol.residuals
    plot_csv = emit_plot_data(
        series, out / "plot_data.csv", groups={"residual": "iterations", "energy": "time"}
    )
    status = "converged" if sol.converged else "not converged"
    last = sol.residuals[-1] if sol.residuals else float("nan")
    print(f"{status} after {sol.iterations} iteration(s), residual {last!r}")
    _manifest(
        args,
        "mfg",
        {"scenario": str(args.scenario), **scenario.as_params()},
        outputs=[str(p) for p in (res_csv, mu_csv, phi_csv, policy_csv, plot_csv)],
        results={"converged": sol.converged, "iterations": sol.iterations},
    ).write(out / "manifest.json")
    if args.require_converged and not sol.converged:
        raise RuntimeFailure(f"Picard iteration did not converge in {sol.iterations} iterations")


def cmd_w1(args):
    grid_a, mu = read_measure_csv(args.mu)
    grid_b, nu = read_measure_csv(args.nu)
    if grid_a.shape != grid_b.shape or not np.array_equal(grid_a, grid_b):
        raise InputError("the two measures must share one grid")
    value = wasserstein1_grid(mu, nu, grid_a)
    print(repr(value))
    if args.out:
        out = Path(args.out)
        write_rows(out, ["w1"], [[value]])
        _manifest(
            args, "w1", {"mu": str(args.mu), "nu": str(args.nu)}, outputs=[str(out)]
        ).write(_manifest_path(out))


def cmd_agents(args):
    scenario = load_scenario(args.scenario)
    sol = picard_solve(scenario)
    result = simulate_agents(scenario, args.N, args.seed, sol.policy, sol.mu)
    out = Path(args.out)
    write_matrix(out, result.empirical, scenario.grid)
    print(f"W1(empirical, mean-field) at final time: {result.w1_to_reference!r}")
    _manifest(
        args,
        "agents",
        {"scenario": str(args.scenario), "N": args.N, **scenario.as_params()},
        seeds=[args.seed],
        outputs=[str(out)],
        results={
            "w1_final": result.w1_to_reference,
            "mean_cost": float(result.per_agent_cost.mean()),
        },
    ).write(_manifest_path(out))


def cmd_scan(args):
    scenario = load_scenario(args.scenario)
    rows = convergence_scan(scenario, args.N_list, args.seeds)
    out = Path(args.out)
    write_rows(out, ["N", "median_w1"], rows)
    for n, w in rows:
        print(f"N={n}: median W1 {w!r}")
    _manifest(
        args,
        "scan",
        {"scenario": str(args.scenario), "N_list": args.N_list, **scenario.as_params()},
        seeds=list(args.seeds),
        outputs=[str(out)],
    ).write(_manifest_path(out))


def cmd_complexity(args):
    params = {"family": args.family, "n_range": args.n_range}
    if args.family == "needle":
        table = scaling_report(args.n_range)
        header = ["n", "deterministic_worst_steps", "verifier_steps"]
        rows = table.rows
        results = {
            "det_log2_slope": table.det_log2_slope,
            "verifier_slope": table.verifier_slope,
        }
    else:
        if args.scenario is None:
            raise InputError("--family mfg needs --scenario")
        base = load_scenario(args.scenario)
        params.update(scenario=str(args.scenario), **base.as_params())
        gap_rows = mfg_gap_scan(congestion_family(base), args.n_range)
        header = [
            "n",
            "gap",
            "tau_deterministic",
            "tau_witness",
            "converged_deterministic",
            "converged_witness",
        ]
        rows = [
            (r.n, r.gap, r.tau_deterministic, r.tau_witness,
             r.converged_deterministic, r.converged_witness)
            for r in gap_rows
        ]
        results = {}
    if args.out:
        out = Path(args.out)
        write_rows(out, header, rows)
        _manifest(args, "complexity", params, outputs=[str(out)], results=results).write(
            _manifest_path(out)
        )
    else:
        dump_rows(sys.stdout, header, rows)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="compgame",
        description="Fixed points, approximation games and mean-field equilibria.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("fixpoint", help="Kleene least fixed point of a poset map")
    s.add_argument("file")
    s.add_argument("--out-dir", default="out/fixpoint")
    s.set_defaults(func=cmd_fixpoint)

    s = sub.add_parser("nash", help="pure equilibria of an approximation game")
    s.add_argument("file")
    s.add_argument("--out-dir", default="out/nash")
    s.add_argument("--start", nargs=2, metavar=("X", "Y"))
    s.add_argument("--max-rounds", type=int, default=100)
    s.set_defaults(func=cmd_nash)

    s = sub.add_parser("mfg", help="solve a grid mean-field game")
    s.add_argument("scenario")
    s.add_argument("--out-dir", default="out/mfg")
    s.add_argument("--require-converged", action="store_true")
    s.set_defaults(func=cmd_mfg)

    s = sub.add_parser("w1", help="W1 distance between two x,weight CSV measures")
    s.add_argument("mu")
    s.add_argument("nu")
    s.add_argument("--out")
    s.set_defaults(func=cmd_w1)

    s = sub.add_parser("agents", help="simulate N agents under the mean-field policy")
    s.add_argument("scenario")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", default="out/agents.csv")
    s.set_defaults(func=cmd_agents)

    s = sub.add_parser("scan", help="median final W1 against N")
    s.add_argument("scenario")
    s.add_argument("--N-list", dest="N_list", type=_int_list, required=True)
    s.add_argument("--seeds", type=_int_list, required=True)
    s.add_argument("--out", default="out/scan.csv")
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("complexity", help="deterministic vs witness scaling")
    s.add_argument("--family", choices=("needle", "mfg"), required=True)
    s.add_argument("--n-range", type=_n_range, required=True)
    s.add_argument("--scenario")
    s.add_argument("--out")
    s.set_defaults(func=cmd_complexity)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        if argv is None:
            argv = sys.argv[1:]
        args = parser.parse_args(argv)
        args.argv = argv
        args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeFailure as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
