"""Simulator and validation suite for preferential attachment with triangles."""

from .engine import GrowthGraph, Mode, ModelParams, StepRecord, new_graph, run, step, step_two_stage
from .metrics import SnapshotStats, brute_force_stats, import_graph, snapshot_stats
from .sampler import derive_stream
from .theory import Regime, TheoryTable, classify_regime, compute_A, degree_law

__all__ = [
    "GrowthGraph",
    "Mode",
    "ModelParams",
    "Regime",
    "SnapshotStats",
    "StepRecord",
    "TheoryTable",
    "brute_force_stats",
    "classify_regime",
    "compute_A",
    "degree_law",
    "derive_stream",
    "import_graph",
    "new_graph",
    "run",
    "snapshot_stats",
    "step",
    "step_two_stage",
]
