"""Node congested clique simulator with spanning forest and MSF protocols."""

import json as _json

from ._core import (
    NccError,
    components,
    gen_graph,
    ksparse_roundtrip,
    kruskal,
    msf,
    sort_distributed,
    spanning_forest,
)
from ._core import run_experiment as _run_experiment

__all__ = [
    "NccError",
    "components",
    "gen_graph",
    "ksparse_roundtrip",
    "kruskal",
    "msf",
    "run_experiment",
    "sort_distributed",
    "spanning_forest",
]


def run_experiment(command, **kwargs):
    """Runs a CLI command in-process and returns the parsed report."""
    return _json.loads(_run_experiment(command, **kwargs))
