"""Campaign configuration: built-in defaults and the key = value file format.

A configuration file is flat INI text with one section per problem::

    [heat]
    fidelities = 8 16 32 64
    high_fidelity = 128
    theta_truth = 1 1 1 1 1 1
    noise_variance = 1e-5
    prior_mean = 1 1 1 1 1 1
    prior_variance = 0.1
    pilot_samples = 500
    pilot_trials = 50
    truth_samples = 10000
    truth_trials = 50
    mse_trials = 100
    tolerances = 10 1 0.1 0.01
    f_sup_factor = 1

Optional keys ``pinned_c0 / pinned_c1 / pinned_C`` freeze the cost-model
constants consumed by the fidelity selection (the pilot still measures and
reports real timings).  With them pinned, an entire campaign is a pure
function of the master seed; without them, the selected fidelity may depend
on wall-clock jitter.  The shipped defaults pin values measured by the
pilot on the reference environment.
"""

import configparser
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = ["ProblemConfig", "default_config", "load_config"]

_ONES = (1.0,) * 6


@dataclass(frozen=True)
class ProblemConfig:
    problem: str
    fidelities: tuple          # mesh intervals n per surrogate candidate
    high_fidelity: int
    theta_truth: tuple = _ONES
    noise_variance: float = 1e-5
    prior_mean: tuple = _ONES
    prior_variance: float = 0.1
    pilot_samples: int = 500
    pilot_trials: int = 50
    truth_samples: int = 10_000
    truth_trials: int = 50
    mse_trials: int = 100
    tolerances: tuple = (10.0, 1.0, 0.1, 0.01)
    f_sup_factor: float = 1.0
    timing_evals: int = 20
    pinned_c0: float = None
    pinned_c1: float = None
    pinned_C: float = None

    def __post_init__(self):
        if self.problem not in ("heat", "beam"):
            raise ValueError(f"unknown problem {self.problem!r}")
        if len(self.fidelities) < 2:
            raise ValueError("need at least 2 candidate fidelities")
        if any(int(n) >= self.high_fidelity for n in self.fidelities):
            raise ValueError("candidates must be strictly coarser than high fidelity")

    @property
    def theta_truth_array(self):
        return np.asarray(self.theta_truth, dtype=float)

    @property
    def prior_mean_array(self):
        return np.asarray(self.prior_mean, dtype=float)


# Desk-scale campaigns finish in minutes on one core; the trial counts are
# a quarter to a tenth of the full-scale ones.  The pinned cost constants
# were measured by `camfis pilot` on the reference container.
_DEFAULTS = {
    ("heat", "desk"): ProblemConfig(
        problem="heat",
        fidelities=(8, 16, 32, 64),
        high_fidelity=128,
        noise_variance=1e-5,
        prior_variance=0.1,
        pilot_samples=500,
        pilot_trials=50,
        truth_samples=10_000,
        truth_trials=50,
        mse_trials=100,
        tolerances=(10.0, 1.0, 0.1, 0.01),
        pinned_c0=2.0e-5,
        pinned_c1=3.0e-7,
        pinned_C=1.0e-4,
    ),
    ("heat", "paper"): ProblemConfig(
        problem="heat",
        fidelities=tuple(range(8, 65, 4)),
        high_fidelity=256,
        noise_variance=1e-5,
        prior_variance=0.1,
        pilot_samples=1_000,
        pilot_trials=500,
        truth_samples=100_000,
        truth_trials=500,
        mse_trials=1_000,
        tolerances=(10.0, 1.0, 0.1, 0.01, 0.001),
    ),
    ("beam", "desk"): ProblemConfig(
        problem="beam",
        fidelities=(15, 23, 31, 47, 63),
        high_fidelity=127,
        noise_variance=5.623e-4,
        prior_variance=1.778e-2,
        pilot_samples=500,
        pilot_trials=25,
        truth_samples=10_000,
        truth_trials=25,
        mse_trials=100,
        tolerances=(10.0, 1.0, 0.1, 0.01),
        pinned_c0=2.0e-5,
        pinned_c1=3.0e-7,
        pinned_C=1.0e-4,
    ),
    ("beam", "paper"): ProblemConfig(
        problem="beam",
        fidelities=tuple(range(7, 64, 4)),
        high_fidelity=255,
        noise_variance=5.623e-4,
        prior_variance=1.778e-2,
        pilot_samples=100_000,
        pilot_trials=100,
        truth_samples=100_000,
        truth_trials=100,
        mse_trials=2_500,
        tolerances=(10.0, 1.0, 0.1, 0.01, 0.001),
    ),
}


def default_config(problem, scale="desk"):
    """Built-in configuration for ``problem`` at ``scale`` (desk or paper)."""
    try:
        return _DEFAULTS[(problem, scale)]
    except KeyError:
        raise ValueError(f"no default configuration for ({problem!r}, {scale!r})")


_INT_KEYS = {
    "high_fidelity",
    "pilot_samples",
    "pilot_trials",
    "truth_samples",
    "truth_trials",
    "mse_trials",
    "timing_evals",
}
_FLOAT_KEYS = {
    "noise_variance",
    "prior_variance",
    "f_sup_factor",
    "pinned_c0",
    "pinned_c1",
    "pinned_C",
}
_INT_LIST_KEYS = {"fidelities"}
_FLOAT_LIST_KEYS = {"theta_truth", "prior_mean", "tolerances"}


def _split(raw):
    return raw.replace(",", " ").split()


def load_config(path, problem, scale="desk"):
    """Read a config file; keys it sets override the built-in defaults."""
    parser = configparser.ConfigParser()
    with open(path, "r", encoding="utf-8") as fh:
        parser.read_file(fh)
    if problem not in parser:
        raise ValueError(f"config file {path} has no [{problem}] section")
    section = parser[problem]
    overrides = {}
    for key, raw in section.items():
        if key in _INT_KEYS:
            overrides[key] = int(raw)
        elif key in _FLOAT_KEYS:
            overrides[key] = float(raw)
        elif key in _INT_LIST_KEYS:
            overrides[key] = tuple(int(v) for v in _split(raw))
        elif key in _FLOAT_LIST_KEYS:
            overrides[key] = tuple(float(v) for v in _split(raw))
        elif key == "problem":
            if raw != problem:
                raise ValueError("section name and problem key disagree")
        else:
            raise ValueError(f"unknown configuration key {key!r}")
    return replace(default_config(problem, scale), **overrides)


def save_config(cfg, path):
    """Write a config file round-trippable through :func:`load_config`."""
    parser = configparser.ConfigParser()
    section = {}
    for key in (
        "fidelities",
        "high_fidelity",
        "theta_truth",
        "noise_variance",
        "prior_mean",
        "prior_variance",
        "pilot_samples",
        "pilot_trials",
        "truth_samples",
        "truth_trials",
        "mse_trials",
        "tolerances",
        "f_sup_factor",
        "timing_evals",
        "pinned_c0",
        "pinned_c1",
        "pinned_C",
    ):
        value = getattr(cfg, key)
        if value is None:
            continue
        if isinstance(value, tuple):
            section[key] = " ".join(repr(v) if isinstance(v, float) else str(v) for v in value)
        else:
            section[key] = repr(value) if isinstance(value, float) else str(value)
    parser[cfg.problem] = section
    with open(path, "w", encoding="utf-8") as fh:
        parser.write(fh)
