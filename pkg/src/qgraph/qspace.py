"""Finite quantum sets (B, psi).

``B`` is a direct sum of full matrix blocks ``M_{n(1)} + ... + M_{n(d)}`` and
``psi`` is the faithful state ``x -> sum_a Tr(rho_a x_a)`` with ``rho``
diagonal in the standard matrix units.

Elements of ``B`` are stored as flat complex vectors of length ``dim(B)`` over
the standard matrix units ``e_ij^(a)``, ordered by block and then row-major
inside each block.  Elements of ``B (x) B`` are ``dim(B) x dim(B)`` arrays
``X`` meaning ``sum_pq X[p, q] e_p (x) e_q``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from ._config import resolve_tol
from .errors import NonInvertibleDensity, NotAState, NotDeltaForm, ValidationError

__all__ = [
    "BlockStructure",
    "QuantumSpace",
    "validate_delta_form",
    "adapted_units",
    "gns_inner",
    "multiply",
    "comultiply",
    "adjoint_map",
]


@dataclass(frozen=True)
class BlockStructure:
    sizes: tuple

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.sizes)
        if len(sizes) < 1:
            raise ValidationError("a block structure needs at least one block")
        if any(n < 1 for n in sizes):
            raise ValidationError(f"block sizes must be positive, got {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @property
    def d(self) -> int:
        return len(self.sizes)

    @property
    def dim(self) -> int:
        return sum(n * n for n in self.sizes)

    @cached_property
    def offsets(self) -> tuple:
        out, pos = [], 0
        for n in self.sizes:
            out.append(pos)
            pos += n * n
        return tuple(out)

    @cached_property
    def labels(self) -> tuple:
        """``(a, i, j)`` for every flat index, 0-based."""
        return tuple((a, i, j) for a, n in enumerate(self.sizes)
                     for i in range(n) for j in range(n))

    def index(self, a: int, i: int, j: int) -> int:
        return self.offsets[a] + i * self.sizes[a] + j

    def block_slice(self, a: int) -> slice:
        return slice(self.offsets[a], self.offsets[a] + self.sizes[a] ** 2)

    @cached_property
    def block_of(self) -> np.ndarray:
        return np.array([a for a, _, _ in self.labels], dtype=int)


@dataclass(frozen=True, eq=False)
class QuantumSpace:
    """A quantum set with a diagonal density matrix.

    Construction validates the state (positivity, normalisation and the
    delta-form condition) unless ``check=False``.
    """

    blocks: BlockStructure
    rho: tuple
    delta_sq: float = field(default=None)
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        if not isinstance(self.blocks, BlockStructure):
            object.__setattr__(self, "blocks", BlockStructure(tuple(self.blocks)))
        if len(self.rho) != self.blocks.d:
            raise ValidationError("need one weight list per block")
        rho = []
        for a, (n, w) in enumerate(zip(self.blocks.sizes, self.rho)):
            w = np.asarray(w, dtype=float).reshape(-1)
            if w.shape != (n,):
                raise ValidationError(f"block {a + 1} expects {n} weights, got {w.size}")
            if not np.all(np.isfinite(w)):
                raise ValidationError("weights must be finite")
            w.setflags(write=False)
            rho.append(w)
        object.__setattr__(self, "rho", tuple(rho))
        if self.delta_sq is None and np.all(np.concatenate(rho) > 0):
            object.__setattr__(self, "delta_sq", float(np.sum(1.0 / rho[0])))
        if self.check:
            validate_delta_form(self)

    # -- constructors -------------------------------------------------------
    @classmethod
    def tracial(cls, sizes: Sequence[int]) -> "QuantumSpace":
        """The unique tracial delta-form: ``rho_a = n(a)/dim(B) * I``."""
        blocks = BlockStructure(tuple(sizes))
        return cls(blocks, tuple(np.full(n, n / blocks.dim) for n in blocks.sizes),
                   float(blocks.dim))

    @classmethod
    def from_weights(cls, sizes, weights, delta_sq=None) -> "QuantumSpace":
        return cls(BlockStructure(tuple(sizes)), tuple(weights), delta_sq)

    # -- basic data ---------------------------------------------------------
    @property
    def dim(self) -> int:
        return self.blocks.dim

    @property
    def sizes(self) -> tuple:
        return self.blocks.sizes

    @property
    def d(self) -> int:
        return self.blocks.d

    @property
    def delta(self) -> float:
        return float(np.sqrt(self.delta_sq))

    @cached_property
    def gns_weights(self) -> np.ndarray:
        """``psi(e_p^* e_p)``; the GNS Gram matrix in the e-basis is diagonal."""
        return np.array([self.rho[a][j] for a, _, j in self.blocks.labels])

    @cached_property
    def psi_vector(self) -> np.ndarray:
        """``psi(e_p)`` so that ``psi(x) = psi_vector @ x``."""
        return np.array([self.rho[a][i] if i == j else 0.0 for a, i, j in self.blocks.labels])

    @cached_property
    def _star_perm(self) -> np.ndarray:
        b = self.blocks
        return np.array([b.index(a, j, i) for a, i, j in b.labels])

    # -- elements -----------------------------------------------------------
    def zero(self) -> np.ndarray:
        return np.zeros(self.dim, dtype=complex)

    def unit(self) -> np.ndarray:
        return self.from_blocks([np.eye(n) for n in self.sizes])

    def basis_vector(self, p: int) -> np.ndarray:
        v = self.zero()
        v[p] = 1.0
        return v

    def matrix_unit(self, a: int, i: int, j: int) -> np.ndarray:
        return self.basis_vector(self.blocks.index(a, i, j))

    def central_projection(self, blocks) -> np.ndarray:
        """``1_J`` for a block index or an iterable of 0-based block indices."""
        if isinstance(blocks, (int, np.integer)):
            blocks = (blocks,)
        mats = [np.eye(n) if a in set(blocks) else np.zeros((n, n))
                for a, n in enumerate(self.sizes)]
        return self.from_blocks(mats)

    def to_blocks(self, x) -> list:
        x = np.asarray(x)
        return [x[self.blocks.block_slice(a)].reshape(n, n) for a, n in enumerate(self.sizes)]

    def from_blocks(self, mats) -> np.ndarray:
        return np.concatenate([np.asarray(m, dtype=complex).reshape(-1) for m in mats])

    def product(self, x, y) -> np.ndarray:
        return self.from_blocks([u @ v for u, v in zip(self.to_blocks(x), self.to_blocks(y))])

    def star(self, x) -> np.ndarray:
        return np.conj(np.asarray(x)[self._star_perm])

    def psi(self, x) -> complex:
        return complex(self.psi_vector @ np.asarray(x))

    def norm(self, x) -> float:
        """C*-norm: largest spectral norm over the blocks."""
        return max(float(np.linalg.norm(m, 2)) for m in self.to_blocks(x))

    def block_support(self, x, tol=None) -> set:
        """Blocks on which ``x`` is nonzero (relative to the largest entry)."""
        tol = resolve_tol(tol)
        x = np.asarray(x)
        scale = max(np.max(np.abs(x)) if x.size else 0.0, 1.0)
        return {a for a in range(self.d)
                if np.max(np.abs(x[self.blocks.block_slice(a)])) > tol * scale}

    def random_element(self, rng) -> np.ndarray:
        return rng.normal(size=self.dim) + 1j * rng.normal(size=self.dim)

    # -- structure maps -----------------------------------------------------
    def left_mul_matrix(self, x) -> np.ndarray:
        """Matrix of ``y -> x y`` in the e-basis."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for a, (n, xa) in enumerate(zip(self.sizes, self.to_blocks(x))):
            s = self.blocks.block_slice(a)
            out[s, s] = np.kron(xa, np.eye(n))
        return out

    def right_mul_matrix(self, y) -> np.ndarray:
        """Matrix of ``x -> x y`` in the e-basis."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for a, (n, ya) in enumerate(zip(self.sizes, self.to_blocks(y))):
            s = self.blocks.block_slice(a)
            out[s, s] = np.kron(np.eye(n), ya.T)
        return out

    @cached_property
    def left_mul_basis(self) -> np.ndarray:
        """Stack ``L[p] = left_mul_matrix(e_p)``."""
        return np.stack([self.left_mul_matrix(self.basis_vector(p)) for p in range(self.dim)])

    @cached_property
    def right_mul_basis(self) -> np.ndarray:
        return np.stack([self.right_mul_matrix(self.basis_vector(p)) for p in range(self.dim)])

    @cached_property
    def mult_matrix(self) -> np.ndarray:
        """``m`` as a ``dim x dim**2`` matrix; column ``p*dim + q`` is ``e_p e_q``."""
        return np.concatenate(list(self.left_mul_basis), axis=1)

    @cached_property
    def comult_matrix(self) -> np.ndarray:
        """GNS adjoint of ``m`` with respect to ``psi`` and ``psi (x) psi``."""
        w = self.gns_weights
        w2 = np.kron(w, w)
        return (self.mult_matrix.conj().T * w[None, :]) / w2[:, None]

    @cached_property
    def star_product_tensor(self) -> np.ndarray:
        """``SP[q, s]`` is the e-coordinate vector of ``e_q^* e_s``."""
        D = self.dim
        sp = np.zeros((D, D, D), dtype=complex)
        b = self.blocks
        for q, (a, i, j) in enumerate(b.labels):
            n = self.sizes[a]
            for l in range(n):
                sp[q, b.index(a, i, l), b.index(a, j, l)] = 1.0
        return sp

    @cached_property
    def psi_pairing(self) -> np.ndarray:
        """``P[p, q] = psi(e_p e_q)``; invertible because psi is faithful."""
        return np.einsum("r,rpq->pq", self.psi_vector, self.mult_matrix.reshape(self.dim, self.dim, self.dim))

    # -- tensors ------------------------------------------------------------
    def tensor(self, x, y) -> np.ndarray:
        return np.outer(np.asarray(x), np.asarray(y))

    def tensor_inner(self, X, Y) -> complex:
        """Scalar inner product on ``B (x) B`` induced by ``psi (x) psi``."""
        w = self.gns_weights
        return complex(np.sum(np.conj(X) * Y * w[:, None] * w[None, :]))

    def tensor_module_inner(self, X, Y) -> np.ndarray:
        """B-valued inner product ``<x1 (x) y1 | x2 (x) y2> = y1^* psi(x1^* x2) y2``."""
        K = np.conj(X).T @ (self.gns_weights[:, None] * Y)
        return np.einsum("qs,qsr->r", K, self.star_product_tensor)


def validate_delta_form(space: QuantumSpace, tol=None) -> float:
    """Check positivity, normalisation and the delta-form condition.

    Also confirms ``m m^* = delta^2 id`` on the basis.  Returns ``delta^2``.
    """
    tol = resolve_tol(tol)
    weights = np.concatenate(space.rho)
    if np.any(weights <= 0):
        raise NonInvertibleDensity(f"density weights must be positive, got {weights.tolist()}")
    total = float(weights.sum())
    if abs(total - 1.0) > tol * max(1.0, total):
        raise NotAState(f"trace of the density matrix is {total!r}, expected 1")
    sums = np.array([np.sum(1.0 / w) for w in space.rho])
    ref = space.delta_sq if space.delta_sq is not None else sums[0]
    if np.any(np.abs(sums - ref) > tol * np.max(sums)):
        raise NotDeltaForm(f"Tr(rho_a^-1) differs across blocks or from delta^2: {sums.tolist()} vs {ref}")
    mm = space.mult_matrix @ space.comult_matrix
    resid = np.max(np.abs(mm - ref * np.eye(space.dim)))
    if resid > tol * ref:
        raise NotDeltaForm(f"m m^* differs from delta^2 id by {resid:.3e}")
    return float(ref)


def adapted_units(space: QuantumSpace) -> dict:
    """``f_ij^(a) = psi(e_ii)^(-1/2) e_ij psi(e_jj)^(-1/2)`` keyed by ``(a, i, j)``."""
    out = {}
    for a, i, j in space.blocks.labels:
        scale = 1.0 / np.sqrt(space.rho[a][i] * space.rho[a][j])
        out[(a, i, j)] = scale * space.matrix_unit(a, i, j)
    return out


def gns_inner(space: QuantumSpace, x, y) -> complex:
    """``<x|y> = psi(x^* y)``."""
    return complex(np.sum(np.conj(x) * space.gns_weights * y))


def multiply(space: QuantumSpace, X) -> np.ndarray:
    """``m`` applied to an element of ``B (x) B``."""
    return space.mult_matrix @ np.asarray(X).reshape(-1)


def comultiply(space: QuantumSpace, x) -> np.ndarray:
    """``m^*(x)`` as a ``dim x dim`` array."""
    return (space.comult_matrix @ np.asarray(x)).reshape(space.dim, space.dim)


def adjoint_map(space: QuantumSpace, L) -> np.ndarray:
    """GNS adjoint of a linear map on B given as a matrix in the e-basis."""
    w = space.gns_weights
    return (np.conj(np.asarray(L)).T * w[None, :]) / w[:, None]
