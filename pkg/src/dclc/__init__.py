"""Dual-layer computation under limited communication: classical, quantum and polygon-GPT strategies."""

from .boolfn import BooleanFunction, DualLayerTask, enumerate_tasks, parse_function, parse_task
from .classical import census, classify_triviality, max_classical_success
from .polygon import build_bipartite, build_polygon

__version__ = "0.1.0"

__all__ = [
    "BooleanFunction",
    "DualLayerTask",
    "enumerate_tasks",
    "parse_function",
    "parse_task",
    "census",
    "classify_triviality",
    "max_classical_success",
    "build_polygon",
    "build_bipartite",
]
