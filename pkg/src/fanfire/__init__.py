"""Petri-net workflow engine with parallel fan traversal and chart-descent smoothness search."""

from .petri import (
    Arc,
    Binding,
    Marking,
    PetriNet,
    Place,
    Registry,
    TokenValue,
    Transition,
    enabled,
    fire,
    is_quiescent,
    validate,
)
from .runtime import RunConfig, RunResult, FiringRecord, replay, run, run_deterministic

__all__ = [
    "Arc",
    "Binding",
    "FiringRecord",
    "Marking",
    "PetriNet",
    "Place",
    "Registry",
    "RunConfig",
    "RunResult",
    "TokenValue",
    "Transition",
    "enabled",
    "fire",
    "is_quiescent",
    "replay",
    "run",
    "run_deterministic",
    "validate",
]

__version__ = "0.1.0"
