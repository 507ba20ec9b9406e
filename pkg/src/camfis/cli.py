"""Command-line interface.

Subcommands mirror the campaign stages::

    camfis pilot   --problem heat --out results        # pilot.csv, constants.csv
    camfis run     --problem heat --epsilon 0.1 ...    # one adaptive estimate
    camfis truth   --problem heat ...                  # truth.csv
    camfis mse     --problem heat ...                  # mse.csv (adaptive only)
    camfis compare --problem heat ...                  # tradeoff.csv + mse.csv

Later stages load earlier CSV artifacts from ``--out`` when present and
recompute them otherwise, so ``camfis compare`` alone runs a whole campaign.
Figures are rendered next to each CSV unless ``--no-plots`` is given.
"""

import argparse
import pathlib
import sys
from dataclasses import replace

from . import harness, reporting
from .config import default_config, load_config
from .harness import PilotReport
from .tradeoff import solve_tradeoff

__all__ = ["main"]

DEFAULT_SEED = 1729


def _common_flags():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=pathlib.Path, default=None,
                        help="configuration file (key = value, one section per problem)")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help="64-bit master seed (default %(default)s)")
    common.add_argument("--out", type=pathlib.Path, default=pathlib.Path("results"),
                        help="output directory (default %(default)s)")
    common.add_argument("--problem", choices=("heat", "beam"), default="heat")
    common.add_argument("--scale", choices=("desk", "paper"), default="desk",
                        help="built-in trial counts to use (default %(default)s)")
    common.add_argument("--no-plots", action="store_true",
                        help="write CSV only, skip figure rendering")
    return common


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="camfis",
        description="Adaptive-fidelity importance sampling campaigns "
        "on 1D PDE inverse problems.",
    )
    common = _common_flags()
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("pilot", parents=[common],
                   help="measure divergences and costs, fit the models")
    run = sub.add_parser("run", parents=[common],
                         help="one adaptive estimate at a tolerance")
    run.add_argument("--epsilon", type=float, required=True)
    sub.add_parser("truth", parents=[common],
                   help="estimate the reference value at high fidelity")
    sub.add_parser("mse", parents=[common],
                   help="measured MSE of the adaptive estimator per tolerance")
    sub.add_parser("compare", parents=[common],
                   help="three-estimator MSE/cost comparison per tolerance")
    return parser


def _load_cfg(args):
    if args.config is not None:
        return load_config(args.config, args.problem, args.scale)
    return default_config(args.problem, args.scale)


def _get_pilot(problem, cfg, args):
    """Load the pilot artifacts from --out, or run the pilot and persist."""
    constants = args.out / "constants.csv"
    if constants.exists():
        error_model, cost_model = reporting.read_constants_csv(constants)
        rows = tuple(
            harness.PilotRow(
                n=n,
                h=problem.hierarchy.h_of(n),
                chi2_mean=float("nan"),
                chi2_std=float("nan"),
                laplace_evals=cost_model.training_evals,
                fit_seconds=float("nan"),
                eval_seconds=float("nan"),
            )
            for n in cfg.fidelities
        )
        return PilotReport(rows=rows, error_model=error_model, cost_model=cost_model)
    report = harness.run_pilot(problem, cfg, args.seed)
    pilot_csv = args.out / "pilot.csv"
    reporting.write_pilot_csv(report, pilot_csv)
    reporting.write_constants_csv(report, constants)
    if not args.no_plots:
        reporting.plot_pilot(report, args.out / "pilot_chi2.png")
    print(f"pilot: {len(report.rows)} fidelities -> {pilot_csv}, {constants}")
    return report


def _get_truth(problem, cfg, args):
    """Load the reference value from --out, or run the truth stage.

    The frozen test function comes from the high-fidelity Gaussian fit,
    which is deterministic, so when only f_bar is on disk the fit is
    recomputed cheaply and the loaded value attached to it.
    """
    truth_csv = args.out / "truth.csv"
    if truth_csv.exists():
        cheap = replace(cfg, truth_trials=1, truth_samples=1)
        truth = harness.estimate_truth(problem, cheap, args.seed)
        return replace(
            truth,
            f_bar=reporting.read_truth_csv(truth_csv),
            n_samples=cfg.truth_samples,
            n_trials=cfg.truth_trials,
        )
    truth = harness.estimate_truth(problem, cfg, args.seed)
    reporting.write_truth_csv(truth, args.seed, truth_csv)
    print(f"truth: f_bar = {truth.f_bar:+.6f} -> {truth_csv}")
    return truth


def _cmd_pilot(args):
    cfg = _load_cfg(args)
    problem = harness.build_problem(cfg, args.seed)
    _get_pilot(problem, cfg, args)
    return 0


def _cmd_run(args):
    cfg = _load_cfg(args)
    problem = harness.build_problem(cfg, args.seed)
    report = _get_pilot(problem, cfg, args)
    result = harness.run_algorithm1(problem, cfg, report, args.epsilon, args.seed)
    reporting.write_tradeoff_csv(
        [(args.epsilon, result.n_star, result.m_star, result.predicted_cost)],
        args.out / "tradeoff.csv",
    )
    print(
        f"run: epsilon={args.epsilon:g} -> n*={result.n_star}, m*={result.m_star}, "
        f"estimate={result.estimate:+.6f} ({result.wall_seconds:.2f} s)"
    )
    return 0


def _cmd_truth(args):
    cfg = _load_cfg(args)
    problem = harness.build_problem(cfg, args.seed)
    _get_truth(problem, cfg, args)
    return 0


def _run_tolerance_grid(args, comparison):
    cfg = _load_cfg(args)
    problem = harness.build_problem(cfg, args.seed)
    report = _get_pilot(problem, cfg, args)
    truth = _get_truth(problem, cfg, args)

    candidates = [problem.hierarchy.h_of(r.n) for r in report.rows]
    solutions = []
    for epsilon in cfg.tolerances:
        sol = solve_tradeoff(
            candidates, report.error_model, report.cost_model, epsilon,
            cfg.f_sup_factor,
        )
        solutions.append(
            (epsilon, int(round(1.0 / sol.h_star)), sol.m_star, sol.predicted_cost)
        )
    reporting.write_tradeoff_csv(solutions, args.out / "tradeoff.csv")
    if not args.no_plots:
        reporting.plot_tradeoff(solutions, args.out / "tradeoff_fidelity.png")

    if comparison:
        records = harness.compare_estimators(problem, cfg, report, truth, args.seed)
    else:
        records = [
            harness.measure_mse(
                problem, cfg, report, epsilon, truth, args.seed, eps_index=i
            )
            for i, epsilon in enumerate(cfg.tolerances)
        ]
    reporting.write_mse_csv(records, args.out / "mse.csv")
    if not args.no_plots:
        reporting.plot_mse(records, args.out / "mse_cost.png")
    for r in records:
        print(
            f"mse: epsilon={r.epsilon:g} {r.estimator}: mse_hat={r.mse_hat:.3e} "
            f"cost={r.mean_wall_seconds:.3f} s (n={r.n_star}, m={r.m_star})"
        )
    return 0


def _cmd_mse(args):
    return _run_tolerance_grid(args, comparison=False)


def _cmd_compare(args):
    return _run_tolerance_grid(args, comparison=True)


_COMMANDS = {
    "pilot": _cmd_pilot,
    "run": _cmd_run,
    "truth": _cmd_truth,
    "mse": _cmd_mse,
    "compare": _cmd_compare,
}


def main(argv=None):
    args = _build_parser().parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
