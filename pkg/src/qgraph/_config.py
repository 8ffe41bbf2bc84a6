"""Global numerical tolerance.

The default can be overridden with the ``QGRAPH_TOL`` environment variable or
at runtime with :func:`set_tol`.
"""
import os

_DEFAULT_TOL = 1e-9
_tol = float(os.environ.get("QGRAPH_TOL", _DEFAULT_TOL))


def get_tol() -> float:
    return _tol


def set_tol(value: float) -> None:
    global _tol
    if not value > 0:
        raise ValueError("tolerance must be positive")
    _tol = float(value)


def resolve_tol(tol=None) -> float:
    return _tol if tol is None else float(tol)
