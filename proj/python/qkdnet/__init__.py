"""Multipath QKD network key agreement simulator."""

import json

from ._core import (
    QkdnetError,
    check_bounds,
    derive_trial_seed,
    deterministic_pa,
    exact_oracles,
    impersonation_bound,
    inner_product,
    paths,
    reduction_polynomial,
    required_paths,
    tag,
    xor_combine,
)
from ._core import run as _run

__all__ = [
    "QkdnetError",
    "check_bounds",
    "derive_trial_seed",
    "deterministic_pa",
    "exact_oracles",
    "impersonation_bound",
    "inner_product",
    "paths",
    "reduction_polynomial",
    "required_paths",
    "run",
    "tag",
    "xor_combine",
]


def run(scenario, trials=None, seed=None, out=None):
    """Runs a scenario file and returns the summary as a dict."""
    return json.loads(_run(str(scenario), trials, seed, None if out is None else str(out)))
