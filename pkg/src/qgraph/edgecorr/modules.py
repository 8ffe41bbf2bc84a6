"""Finite-dimensional Hilbert B-bimodules and their balanced tensor powers.

A module is held in a basis that is orthonormal for the scalar inner product
``psi(<xi|eta>)``.  In that basis the left and right actions of each standard
matrix unit ``e_p`` are matrices, and the B-valued inner product is recovered
from the right action through ``psi(<xi|eta> e_q) = <xi, eta . e_q>``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .._config import resolve_tol
from ..errors import BudgetExceeded
from ..qspace import QuantumSpace

DEFAULT_MAX_LEVEL = 6
DEFAULT_MAX_SPAN = 20_000


@dataclass(frozen=True, eq=False)
class HilbertBimodule:
    space: QuantumSpace
    left: np.ndarray   # (dim B, r, r)
    right: np.ndarray  # (dim B, r, r)

    @property
    def rank(self) -> int:
        return self.left.shape[1]

    def left_matrix(self, x) -> np.ndarray:
        return np.tensordot(np.asarray(x), self.left, axes=(0, 0))

    def right_matrix(self, y) -> np.ndarray:
        return np.tensordot(np.asarray(y), self.right, axes=(0, 0))

    def left_act(self, x, xi) -> np.ndarray:
        return self.left_matrix(x) @ xi

    def right_act(self, xi, y) -> np.ndarray:
        return self.right_matrix(y) @ xi

    @cached_property
    def _pairing_inv(self) -> np.ndarray:
        return np.linalg.inv(self.space.psi_pairing)

    def inner(self, xi, eta) -> np.ndarray:
        """B-valued inner product, conjugate-linear in ``xi``."""
        w = np.einsum("i,qij,j->q", np.conj(xi), self.right, eta)
        return w @ self._pairing_inv

    def scalar_inner(self, xi, eta) -> complex:
        return complex(np.vdot(xi, eta))

    @cached_property
    def gram(self) -> np.ndarray:
        """B-valued Gram of the basis, shape ``(r, r, dim B)``."""
        return np.transpose(self.right, (1, 2, 0)) @ self._pairing_inv

    def rank_one(self, xi, eta) -> np.ndarray:
        """Matrix of ``theta_{xi,eta}: mu -> xi . <eta|mu>``."""
        rows = np.einsum("i,qij->qj", np.conj(eta), self.right)          # (D, r)
        cols = np.einsum("pij,j->pi", self.right, xi)                   # (D, r)
        return np.einsum("qp,pi,qj->ij", self._pairing_inv, cols, rows)

    def central_subspace(self, tol=None) -> np.ndarray:
        """Orthonormal basis (columns) of ``{w : x.w = w.x for all x}``."""
        tol = resolve_tol(tol)
        stacked = (self.left - self.right).reshape(-1, self.rank)
        if stacked.size == 0:
            return np.eye(self.rank, dtype=complex)
        _, s, vh = np.linalg.svd(stacked)
        scale = max(s[0] if s.size else 0.0, 1.0)
        nullity = self.rank - int(np.sum(s > tol * scale))
        return vh[self.rank - nullity:].conj().T


def algebra_module(space: QuantumSpace) -> HilbertBimodule:
    """``B`` over itself in the GNS-orthonormal basis ``e_p / sqrt(psi(e_p^* e_p))``."""
    s = np.sqrt(space.gns_weights)
    conj = lambda M: (s[:, None] * M) / s[None, :]
    left = np.stack([conj(L) for L in space.left_mul_basis])
    right = np.stack([conj(R) for R in space.right_mul_basis])
    return HilbertBimodule(space, left, right)


def orthonormal_from_gram(G, tol):
    """Return ``(V, Vt)`` with ``Vt @ V = I`` and ``V^H G V = I`` on the range of ``G``."""
    G = (G + G.conj().T) / 2
    evals, U = np.linalg.eigh(G)
    top = evals[-1] if evals.size else 0.0
    keep = evals > tol * max(top, 0.0) if top > 0 else np.zeros_like(evals, dtype=bool)
    lam, Uk = evals[keep], U[:, keep]
    V = Uk / np.sqrt(lam)[None, :]
    Vt = np.sqrt(lam)[:, None] * Uk.conj().T
    return V, Vt


@dataclass(frozen=True, eq=False)
class TensorStep:
    """``E (x)_B X`` realised from the spanning set ``u_a (x) v_b``."""

    module: HilbertBimodule
    V: np.ndarray       # spanning coordinates of the new basis, (rE*rX, r)
    Vt: np.ndarray      # new coordinates of a spanning combination, (r, rE*rX)
    r_left: int
    r_right: int

    @cached_property
    def tmap(self) -> np.ndarray:
        """``tmap[n, a, b]``: coordinate ``n`` of ``u_a (x) v_b``."""
        return self.Vt.reshape(-1, self.r_left, self.r_right)


def tensor_left(E: HilbertBimodule, X: HilbertBimodule, tol=None,
                max_span: int = DEFAULT_MAX_SPAN) -> TensorStep:
    """Balanced tensor product ``E (x)_B X`` with reduction by Gram rank."""
    tol = resolve_tol(tol)
    rE, rX = E.rank, X.rank
    if rE * rX > max_span:
        raise BudgetExceeded(f"spanning set of size {rE * rX} exceeds budget {max_span}")
    c = E.gram  # (rE, rE, D)
    # psi(<u_a (x) v_b | u_a' (x) v_b'>) = psi(<v_b | <u_a|u_a'> . v_b'>)
    G = np.einsum("acp,pbd->abcd", c, X.left).reshape(rE * rX, rE * rX)
    V, Vt = orthonormal_from_gram(G, tol)
    D = E.space.dim
    IX = np.eye(rX)
    IE = np.eye(rE)
    left = np.stack([Vt @ np.kron(E.left[p], IX) @ V for p in range(D)])
    right = np.stack([Vt @ np.kron(IE, X.right[p]) @ V for p in range(D)])
    return TensorStep(HilbertBimodule(E.space, left, right), V, Vt, rE, rX)


class TensorPowers:
    """Lazily built tower ``X^(x)0 = B``, ``X^(x)1 = E``, ``X^(x)k = E (x)_B X^(x)(k-1)``.

    ``tensor_map(k, j)`` is the array ``Theta[n, g, z]`` giving coordinate ``n``
    in level ``k + j`` of ``u_g (x) w_z`` for ``u_g`` in level ``k`` and ``w_z``
    in level ``j``.
    """

    def __init__(self, E: HilbertBimodule, tol=None, max_level: int = DEFAULT_MAX_LEVEL,
                 max_span: int = DEFAULT_MAX_SPAN):
        self.E = E
        self.space = E.space
        self.tol = resolve_tol(tol)
        self.max_level = max_level
        self.max_span = max_span
        self._levels = [algebra_module(E.space), E]
        self._steps = [None, None]
        self._theta = {}

    def level(self, k: int) -> HilbertBimodule:
        if k < 0:
            raise ValueError("level must be nonnegative")
        if k > self.max_level:
            raise BudgetExceeded(f"tensor level {k} exceeds cap {self.max_level}")
        while len(self._levels) <= k:
            step = tensor_left(self.E, self._levels[-1], self.tol, self.max_span)
            self._levels.append(step.module)
            self._steps.append(step)
        return self._levels[k]

    def dim(self, k: int) -> int:
        return self.level(k).rank

    def step(self, k: int) -> TensorStep:
        self.level(k)
        return self._steps[k]

    def t_tensor(self, j: int) -> np.ndarray:
        """``[n, a, z]``: level ``j+1`` coordinates of ``u_a (x) w_z`` with ``u_a`` in E."""
        if j == 0:
            Ebim = self.E
            s = np.sqrt(self.space.gns_weights)
            # eta (x) b = eta . b, with b in the orthonormal basis e_q / s_q
            return np.transpose(Ebim.right, (1, 2, 0)) / s[None, None, :]
        return self.step(j + 1).tmap

    def tensor_map(self, k: int, j: int) -> np.ndarray:
        key = (k, j)
        if key in self._theta:
            return self._theta[key]
        if k == 0:
            Xj = self.level(j)
            s = np.sqrt(self.space.gns_weights)
            theta = np.transpose(Xj.left, (1, 0, 2)) / s[None, :, None]
        elif k == 1:
            theta = self.t_tensor(j)
        else:
            self.level(k + j)
            prev = self.tensor_map(k - 1, j)                 # (r_{k-1+j}, r_{k-1}, r_j)
            T = self.t_tensor(k - 1 + j)                     # (r_{k+j}, rE, r_{k-1+j})
            V = self.step(k).V.reshape(self.E.rank, self.dim(k - 1), -1)  # (rE, r_{k-1}, r_k)
            X = np.einsum("nam,mbz->nabz", T, prev)
            theta = np.einsum("nabz,abg->ngz", X, V)
        self._theta[key] = theta
        return theta

    def tensor(self, k: int, xi, j: int, zeta) -> np.ndarray:
        """``xi (x) zeta`` for ``xi`` in level ``k`` and ``zeta`` in level ``j``."""
        return np.einsum("ngz,g,z->n", self.tensor_map(k, j), xi, zeta)

    def t_operator(self, k: int, xi, j: int) -> np.ndarray:
        """Matrix of ``zeta -> xi (x) zeta`` from level ``j`` to level ``k + j``."""
        return np.einsum("ngz,g->nz", self.tensor_map(k, j), xi)

    def partial_inner(self, k: int, left, m: int, right) -> np.ndarray:
        """Contract the first ``k`` legs of ``right`` (level ``m``) against ``left``."""
        if m < k:
            raise ValueError("right vector must have at least as many legs as left")
        return self.t_operator(k, left, m - k).conj().T @ right


def to_level0(space: QuantumSpace, x) -> np.ndarray:
    """e-coordinates of an element of B to level-0 orthonormal coordinates."""
    return np.sqrt(space.gns_weights) * np.asarray(x)


def from_level0(space: QuantumSpace, v) -> np.ndarray:
    return np.asarray(v) / np.sqrt(space.gns_weights)
