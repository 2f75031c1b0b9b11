"""Heralded memory-memory entanglement through single-rail and dual-rail photonic swaps."""

from .distill import (
    DistillRound,
    PumpingSchedule,
    bennett_round_map,
    deutsch_round_exact,
    deutsch_round_map,
    distillation_limit,
    pump,
)
from .herald import Encoding, HeraldOutcome, LinkParams, herald
from .metrics import LinkMetrics, fidelity_bell, hashing_bound, link_metrics, repeaterless_bound
from .optimize import GammaPolicy, crossover_loss, eta_lim, max_range, optimize_gamma
from .states import BellDiagonalVec, BellState, TwoQubitState

__version__ = "0.1.0"

__all__ = [
    "BellDiagonalVec",
    "BellState",
    "DistillRound",
    "Encoding",
    "GammaPolicy",
    "HeraldOutcome",
    "LinkMetrics",
    "LinkParams",
    "PumpingSchedule",
    "TwoQubitState",
    "bennett_round_map",
    "crossover_loss",
    "deutsch_round_exact",
    "deutsch_round_map",
    "distillation_limit",
    "eta_lim",
    "fidelity_bell",
    "hashing_bound",
    "herald",
    "link_metrics",
    "max_range",
    "optimize_gamma",
    "pump",
    "repeaterless_bound",
]
