"""Extremal-dependence networks, independent-set selection and tail-risk portfolios."""

__version__ = "0.1.0"

from .edm import EdmMatrix, TailPolicy, edm_matrix, edm_pair
from .ingest import PricePanel, ReturnPanel, load_panel, log_returns
from .network import ThresholdGraph, betweenness, build_graph, network_stats

__all__ = [
    "__version__",
    "EdmMatrix",
    "PricePanel",
    "ReturnPanel",
    "TailPolicy",
    "ThresholdGraph",
    "betweenness",
    "build_graph",
    "edm_matrix",
    "edm_pair",
    "load_panel",
    "log_returns",
    "network_stats",
]
