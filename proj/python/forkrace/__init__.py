"""Monte-Carlo simulator of multi-pool fork races with uncle and nephew rewards.

Rewards and per-round ratios come back as exact ``fractions.Fraction`` values;
experiment summaries are plain dicts parsed from the native JSON output.
"""

import json

from ._core import (
    ForkraceError,
    check_exhaustive as _check_exhaustive,
    nephew_reward,
    power_threshold,
    replay,
    run_config as _run_config,
    uncle_reward,
)

__all__ = [
    "ForkraceError",
    "check_exhaustive",
    "nephew_reward",
    "power_threshold",
    "replay",
    "run",
    "simulate",
    "uncle_reward",
]


def run(config):
    """Run an experiment from a config dict (same keys as the JSON config file)."""
    return json.loads(_run_config(json.dumps(config)))


def simulate(alphas, rounds, seed=1, gamma=10.0, replications=1, **extra):
    """Single-configuration run; returns the summary dict."""
    config = {
        "mode": "single",
        "alphas": list(alphas),
        "gamma": gamma,
        "rounds": rounds,
        "replications": replications,
        "seed": seed,
    }
    config.update(extra)
    return run(config)


def check_exhaustive(max_events, m=2, dishonest_stop_lead=2, release="all", uncle_cutoff=6):
    """Exhaustive oracle comparison over every event order of length ``max_events``."""
    return json.loads(_check_exhaustive(max_events, m, dishonest_stop_lead, release, uncle_cutoff))
