"""Deterministic crowd-navigation benchmark.

Thin wrapper over the compiled core. Every simulation is a pure function
of (condition, seed, method): the same arguments always reproduce the
same trajectories, metrics, and artifacts, byte for byte.
"""

try:
    from ._crowdsweep import (
        __version__,
        analyze,
        condition_info,
        conditions,
        generate_scenario,
        methods,
        replay,
        run_experiments,
        run_scenario,
        run_trial,
        spearman,
    )
except ImportError:  # in-tree builds keep the extension outside the package
    from _crowdsweep import (
        __version__,
        analyze,
        condition_info,
        conditions,
        generate_scenario,
        methods,
        replay,
        run_experiments,
        run_scenario,
        run_trial,
        spearman,
    )

__all__ = [
    "__version__",
    "analyze",
    "condition_info",
    "conditions",
    "generate_scenario",
    "methods",
    "replay",
    "run_experiments",
    "run_scenario",
    "run_trial",
    "spearman",
]
