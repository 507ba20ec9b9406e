"""CSV reports and the figures rendered alongside them.

All CSVs are UTF-8 with a header row, '.' decimal separator, and a fixed
column order; floats are written with ``repr`` so values round-trip exactly
and repeated deterministic runs produce byte-identical non-timing columns.
Figures are PNG files saved next to the CSV they visualize.
"""

import csv
import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .harness import ExperimentRecord
from .tradeoff import CostModel, ErrorModel

__all__ = [
    "write_pilot_csv",
    "write_constants_csv",
    "read_constants_csv",
    "write_truth_csv",
    "read_truth_csv",
    "write_tradeoff_csv",
    "write_mse_csv",
    "read_mse_csv",
    "plot_pilot",
    "plot_tradeoff",
    "plot_mse",
]


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_rows(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_pilot_csv(report, path):
    _write_rows(
        path,
        ["n", "h", "chi2_mean", "chi2_std", "M_h", "fit_seconds", "c_seconds"],
        [
            (r.n, r.h, r.chi2_mean, r.chi2_std, r.laplace_evals, r.fit_seconds, r.eval_seconds)
            for r in report.rows
        ],
    )


def write_constants_csv(report, path):
    em, cm = report.error_model, report.cost_model
    _write_rows(
        path,
        ["K0_tilde", "K1", "c0", "c1", "C", "M"],
        [(em.k0_tilde, em.k1, cm.c0, cm.c1, cm.high_fidelity_seconds, cm.training_evals)],
    )


def read_constants_csv(path, delta_form="polynomial", rate=2.0):
    """Rebuild the fitted models from a constants file."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        row = next(csv.DictReader(fh))
    error_model = ErrorModel(
        k0_tilde=float(row["K0_tilde"]),
        k1=float(row["K1"]),
        delta_form=delta_form,
        rate=rate,
    )
    cost_model = CostModel(
        c0=float(row["c0"]),
        c1=float(row["c1"]),
        high_fidelity_seconds=float(row["C"]),
        training_evals=int(row["M"]),
    )
    return error_model, cost_model


def write_truth_csv(truth, seed, path):
    _write_rows(
        path,
        ["f_bar", "n_samples", "n_trials", "seed"],
        [(truth.f_bar, truth.n_samples, truth.n_trials, int(seed))],
    )


def read_truth_csv(path):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        row = next(csv.DictReader(fh))
    return float(row["f_bar"])


def write_tradeoff_csv(solutions, path):
    """``solutions`` are (epsilon, n_star, m_star, predicted_cost) tuples."""
    _write_rows(path, ["epsilon", "n_star", "m_star", "predicted_cost"], solutions)


def write_mse_csv(records, path):
    _write_rows(
        path,
        ["epsilon", "estimator", "mse_hat", "mean_cost_seconds", "n_trials", "seed"],
        [
            (r.epsilon, r.estimator, r.mse_hat, r.mean_wall_seconds, r.n_trials, r.seed)
            for r in records
        ],
    )


def read_mse_csv(path):
    records = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(
                ExperimentRecord(
                    epsilon=float(row["epsilon"]),
                    estimator=row["estimator"],
                    n_star=-1,
                    m_star=-1,
                    f_bar=math.nan,
                    mse_hat=float(row["mse_hat"]),
                    mean_wall_seconds=float(row["mean_cost_seconds"]),
                    modeled_cost=math.nan,
                    n_trials=int(row["n_trials"]),
                    seed=int(row["seed"]),
                )
            )
    return records


def plot_pilot(report, path):
    """Measured weight-variance against mesh resolution, with the fitted curve."""
    ns = [r.n for r in report.rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.errorbar(
        ns,
        [r.chi2_mean for r in report.rows],
        yerr=[r.chi2_std for r in report.rows],
        fmt="o",
        capsize=3,
        label="measured",
    )
    ax.plot(
        ns,
        [report.error_model.predict_chi2_plus_one(r.h) for r in report.rows],
        "k--",
        label="fitted",
    )
    ax.set_xlabel("mesh intervals")
    ax.set_ylabel("estimated chi-square + 1")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_tradeoff(solutions, path):
    """Selected mesh resolution as a function of the MSE tolerance."""
    eps = [s[0] for s in solutions]
    n_star = [s[1] for s in solutions]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.semilogx(eps, n_star, "o-")
    ax.invert_xaxis()
    ax.set_xlabel("tolerance")
    ax.set_ylabel("selected mesh intervals")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_mse(records, path):
    """Measured MSE against measured cost, one line per estimator."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for tag in sorted({r.estimator for r in records}):
        points = sorted(
            [(r.mean_wall_seconds, r.mse_hat) for r in records if r.estimator == tag]
        )
        ax.loglog([p[0] for p in points], [p[1] for p in points], "o-", label=tag)
    ax.set_xlabel("cost [s]")
    ax.set_ylabel("measured MSE")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
