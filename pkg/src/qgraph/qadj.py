"""Quantum adjacency matrices and quantum graphs.

A linear map ``A`` on ``B`` is stored as a ``dim(B) x dim(B)`` complex matrix
acting on e-coordinate column vectors: column ``p`` is ``A(e_p)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._config import resolve_tol
from .errors import MultiBlock, NotCP, TraceConstraintViolated, ValidationError
from .qspace import QuantumSpace, adjoint_map, comultiply

__all__ = [
    "QuantumGraph",
    "SchurCheck",
    "check_schur_idempotent",
    "choi_matrix",
    "check_cp",
    "kraus_rank",
    "epsilon_vector",
    "quantum_sources",
    "quantum_sinks",
    "range_ideal",
    "validate_graph",
    "complete_graph",
    "trivial_graph",
    "rank_one_graph",
    "classical_graph",
    "main_example",
]


@dataclass(frozen=True, eq=False)
class QuantumGraph:
    space: QuantumSpace
    matrix: np.ndarray
    name: str = "matrix"

    def __post_init__(self):
        A = np.array(self.matrix, dtype=complex)
        D = self.space.dim
        if A.shape != (D, D):
            raise ValidationError(f"adjacency must be {D}x{D}, got {A.shape}")
        if not np.all(np.isfinite(A)):
            raise ValidationError("adjacency has non-finite entries")
        A.setflags(write=False)
        object.__setattr__(self, "matrix", A)

    def apply(self, x) -> np.ndarray:
        return self.matrix @ np.asarray(x)

    @property
    def is_zero(self) -> bool:
        return not np.any(np.abs(self.matrix) > 0)

    def with_matrix(self, matrix, name=None) -> "QuantumGraph":
        return QuantumGraph(self.space, matrix, name or self.name)


@dataclass(frozen=True)
class SchurCheck:
    passed: bool
    residual: float

    def __bool__(self):
        return self.passed


def check_schur_idempotent(G: QuantumGraph, tol=None) -> SchurCheck:
    """Evaluate ``m (A (x) A) m^*`` against ``delta^2 A`` on every basis element."""
    tol = resolve_tol(tol)
    sp = G.space
    A = G.matrix
    lhs = sp.mult_matrix @ np.kron(A, A) @ sp.comult_matrix
    rhs = sp.delta_sq * A
    scale = max(np.max(np.abs(rhs)), np.max(np.abs(lhs)), 1.0)
    resid = float(np.max(np.abs(lhs - rhs)))
    return SchurCheck(bool(resid <= tol * scale), resid)


def choi_matrix(G: QuantumGraph) -> np.ndarray:
    """``sum_{a,i,j} e_ij^(a) (x) A(e_ij^(a))`` as a matrix on ``C^N (x) C^N``.

    ``N`` is the sum of the block sizes; B is embedded block-diagonally.
    """
    sp = G.space
    N = sum(sp.sizes)
    starts = np.cumsum((0,) + sp.sizes)[:-1]

    def embed(x):
        out = np.zeros((N, N), dtype=complex)
        for a, m in enumerate(sp.to_blocks(x)):
            s = starts[a]
            out[s:s + m.shape[0], s:s + m.shape[0]] = m
        return out

    choi = np.zeros((N * N, N * N), dtype=complex)
    for p in range(sp.dim):
        choi += np.kron(embed(sp.basis_vector(p)), embed(G.matrix[:, p]))
    return choi


def _hermitian_spectrum(C):
    herm_err = float(np.max(np.abs(C - C.conj().T))) if C.size else 0.0
    return np.linalg.eigvalsh((C + C.conj().T) / 2), herm_err


def check_cp(G: QuantumGraph, tol=None) -> bool:
    """Complete positivity via positive semidefiniteness of the Choi matrix."""
    tol = resolve_tol(tol)
    C = choi_matrix(G)
    evals, herm_err = _hermitian_spectrum(C)
    scale = max(np.max(np.abs(evals)), 1.0)
    if herm_err > tol * scale:
        return False
    return bool(evals.min() >= -tol * scale)


def kraus_rank(G: QuantumGraph, tol=None) -> int:
    """Dimension of the span of any Kraus family, computed as the Choi rank."""
    tol = resolve_tol(tol)
    if G.space.d != 1:
        raise MultiBlock(f"Kraus rank is defined here for a single block, got {G.space.d}")
    if not check_cp(G, tol):
        raise NotCP("adjacency is not completely positive")
    s = np.linalg.svd(choi_matrix(G), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def epsilon_vector(G: QuantumGraph) -> np.ndarray:
    """``delta^-2 (id (x) A) m^*(1)`` as a ``dim x dim`` array."""
    sp = G.space
    M = comultiply(sp, sp.unit())
    return (M @ G.matrix.T) / sp.delta_sq


def _block_is_zero(M, tol):
    scale = max(np.max(np.abs(M)) if M.size else 0.0, 1.0)
    return not np.any(np.abs(M) > tol * scale)


def quantum_sources(G: QuantumGraph, tol=None) -> set:
    """Blocks ``a`` with ``A(x 1_a) = 0`` for all ``x`` (0-based)."""
    tol = resolve_tol(tol)
    sp, A = G.space, G.matrix
    scale = max(np.max(np.abs(A)), 1.0)
    return {a for a in range(sp.d)
            if not np.any(np.abs(A[:, sp.blocks.block_slice(a)]) > tol * scale)}


def quantum_sinks(G: QuantumGraph, tol=None) -> set:
    """Blocks ``a`` with ``1_a A(x) = 0`` for all ``x`` (0-based)."""
    tol = resolve_tol(tol)
    sp, A = G.space, G.matrix
    scale = max(np.max(np.abs(A)), 1.0)
    return {a for a in range(sp.d)
            if not np.any(np.abs(A[sp.blocks.block_slice(a), :]) > tol * scale)}


def range_ideal(G: QuantumGraph, tol=None) -> frozenset:
    """Blocks generating ``B A(B) B``: the complement of the sinks."""
    return frozenset(set(range(G.space.d)) - quantum_sinks(G, tol))


def validate_graph(G: QuantumGraph, tol=None) -> dict:
    """Run the Schur idempotence and CP checks; raise if either fails."""
    schur = check_schur_idempotent(G, tol)
    if not schur:
        raise ValidationError(f"A is not quantum Schur idempotent (residual {schur.residual:.3e})")
    if not check_cp(G, tol):
        raise NotCP("A is not completely positive")
    return {"schur_residual": schur.residual, "cp": True, "degenerate": G.is_zero}


# -- constructors -------------------------------------------------------------

def _matrix_of(space: QuantumSpace, fn) -> np.ndarray:
    return np.stack([fn(space.basis_vector(p)) for p in range(space.dim)], axis=1)


def complete_graph(space: QuantumSpace) -> QuantumGraph:
    """``A(x) = delta^2 psi(x) 1``."""
    A = space.delta_sq * np.outer(space.unit(), space.psi_vector)
    return QuantumGraph(space, A, "complete")


def trivial_graph(space: QuantumSpace) -> QuantumGraph:
    return QuantumGraph(space, np.eye(space.dim, dtype=complex), "trivial")


def rank_one_graph(space: QuantumSpace, T, tol=None) -> QuantumGraph:
    """``A(x) = T x T^*`` for block-diagonal ``T``.

    Requires ``Tr(rho_a^-1 T_a^* T_a) = delta^2`` on every block.
    """
    tol = resolve_tol(tol)
    if isinstance(T, (list, tuple)) and all(np.ndim(t) == 2 for t in T) and len(T) == space.d:
        T = space.from_blocks(T)
    T = np.asarray(T, dtype=complex).reshape(-1)
    if T.shape != (space.dim,):
        raise ValidationError("T must be an element of B")
    for a, Ta in enumerate(space.to_blocks(T)):
        val = float(np.real(np.trace(np.diag(1.0 / space.rho[a]) @ Ta.conj().T @ Ta)))
        if abs(val - space.delta_sq) > tol * space.delta_sq:
            raise TraceConstraintViolated(
                f"Tr(rho^-1 T^* T) = {val} on block {a + 1}, expected {space.delta_sq}")
    Tstar = space.star(T)
    A = _matrix_of(space, lambda x: space.product(space.product(T, x), Tstar))
    return QuantumGraph(space, A, "rank_one")


def classical_graph(M) -> QuantumGraph:
    """Classical directed graph on ``C^d`` with the uniform state.

    Row ``i`` of ``M`` lists the out-neighbours of vertex ``i``: ``A(e_i) = sum_j M[i, j] e_j``.
    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise ValidationError("classical adjacency must be a nonempty square matrix")
    if not np.all(np.isin(M, (0, 1))):
        raise ValidationError("classical adjacency entries must be 0 or 1")
    space = QuantumSpace.tracial([1] * M.shape[0])
    return QuantumGraph(space, M.T.astype(complex), "classical")


def main_example(n: int) -> QuantumGraph:
    """``A(x1 + x2 + x3) = (x1 + x2 + x3) + (x1 + x2) + 0`` on three copies of ``M_n``."""
    n = int(n)
    if n < 1:
        raise ValidationError("n must be positive")
    space = QuantumSpace.tracial([n, n, n])

    def A(x):
        x1, x2, x3 = space.to_blocks(x)
        return space.from_blocks([x1 + x2 + x3, x1 + x2, np.zeros_like(x1)])

    return QuantumGraph(space, _matrix_of(space, A), "main_example")


def adjoint_graph(G: QuantumGraph) -> QuantumGraph:
    """Same space with ``A`` replaced by its GNS adjoint."""
    return G.with_matrix(adjoint_map(G.space, G.matrix), G.name + "_adjoint")
