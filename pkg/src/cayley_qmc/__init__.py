"""Forward quantum Markov chains of the Ising model on Cayley trees.

Exact finite-volume states, the boundary-field dynamics and the transfer
matrix that locates the phase transition at ``theta = (k+1)/(k-1)``.
"""
from .algebra import DiagOp, PauliOp, ProductObservable, parse_observable
from .dynamics import ModelParams, critical_theta, find_fixed_points, iterate_trajectory
from .errors import CapacityError, CayleyQMCError, DomainError, ParamError, RegimeError, SupportError
from .qmc import boundary_condition, evaluate_state, oracle_weights, state_value
from .transition import build_transfer_matrix, gap_report, leaf_sigma3_expectation, phase_diagram
from .tree import TreeParams, VertexCoord

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "CayleyQMCError",
    "DiagOp",
    "DomainError",
    "ModelParams",
    "ParamError",
    "PauliOp",
    "ProductObservable",
    "RegimeError",
    "SupportError",
    "TreeParams",
    "VertexCoord",
    "boundary_condition",
    "build_transfer_matrix",
    "critical_theta",
    "evaluate_state",
    "find_fixed_points",
    "gap_report",
    "iterate_trajectory",
    "leaf_sigma3_expectation",
    "oracle_weights",
    "parse_observable",
    "phase_diagram",
    "state_value",
]
