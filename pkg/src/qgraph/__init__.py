"""Finite quantum graphs, their edge correspondences and Cuntz-Pimsner algebras."""
from ._config import get_tol, set_tol
from .errors import QGraphError, ValidationError
from .qspace import QuantumSpace, adapted_units
from .qadj import (
    QuantumGraph,
    check_cp,
    check_schur_idempotent,
    classical_graph,
    complete_graph,
    kraus_rank,
    main_example,
    quantum_sinks,
    quantum_sources,
    rank_one_graph,
    trivial_graph,
    validate_graph,
)
from .edgecorr import build_edge_correspondence
from .simplicity import certify_simplicity, qck_separation

__version__ = "0.1.0"

__all__ = [
    "QGraphError",
    "QuantumGraph",
    "QuantumSpace",
    "ValidationError",
    "adapted_units",
    "build_edge_correspondence",
    "certify_simplicity",
    "check_cp",
    "check_schur_idempotent",
    "classical_graph",
    "complete_graph",
    "get_tol",
    "kraus_rank",
    "main_example",
    "qck_separation",
    "quantum_sinks",
    "quantum_sources",
    "rank_one_graph",
    "set_tol",
    "trivial_graph",
    "validate_graph",
]
