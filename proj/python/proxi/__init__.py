"""Kernel proxy-variable estimators (KPV, PMMR) and baselines."""

from ._proxi import (
    ProxiError,
    __version__,
    cmae,
    default_a_grid,
    estimate,
    gen_discrete_toy,
    gen_main,
    methods,
    true_ate,
)

__all__ = [
    "ProxiError",
    "__version__",
    "cmae",
    "default_a_grid",
    "estimate",
    "gen_discrete_toy",
    "gen_main",
    "methods",
    "true_ate",
]
