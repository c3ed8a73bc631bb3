"""Certification of coherence transfer through quantum networks and open
quantum dynamics."""
from .capability import KernelResult, PopulationTransferMatrix, criterion_q, temporal_q, triangle_q
from .estimators import CoherenceTransferCriterion, TemporalCoherenceCriterion
from .networks import NetworkSize, ScenarioData, Variant, run_one_qubit, run_two_qubit
from .optimizer import LinearProgram, LPStatus, simplex_solve

__version__ = "0.1.0"

__all__ = [
    "CoherenceTransferCriterion",
    "KernelResult",
    "LPStatus",
    "LinearProgram",
    "NetworkSize",
    "PopulationTransferMatrix",
    "ScenarioData",
    "TemporalCoherenceCriterion",
    "Variant",
    "criterion_q",
    "run_one_qubit",
    "run_two_qubit",
    "simplex_solve",
    "temporal_q",
    "triangle_q",
]
