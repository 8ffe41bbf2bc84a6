"""The quantum edge correspondence as a concrete subspace of ``B (x) B``."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .._config import resolve_tol
from ..errors import NotInSpan, ZeroCorrespondence
from ..qadj import QuantumGraph, epsilon_vector, quantum_sinks, quantum_sources
from ..qspace import adapted_units
from .modules import DEFAULT_MAX_LEVEL, DEFAULT_MAX_SPAN, HilbertBimodule, TensorPowers

__all__ = [
    "EdgeCorrespondence",
    "build_edge_correspondence",
    "phi_compacts_check",
]


@dataclass(frozen=True, eq=False)
class EdgeCorrespondence:
    """Basis of ``E = span{x . eps . y}`` inside ``B (x) B``.

    ``basis`` holds ``dim E`` ambient vectors (flattened ``dim B**2``
    coordinates), orthonormal for ``psi (x) psi``.  ``module`` carries the
    actions in that basis.
    """

    graph: QuantumGraph
    basis: np.ndarray       # (dim B**2, r)
    module: HilbertBimodule
    tol: float

    @property
    def space(self):
        return self.graph.space

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @cached_property
    def _w2(self) -> np.ndarray:
        w = self.space.gns_weights
        return np.kron(w, w)

    @cached_property
    def gram(self) -> np.ndarray:
        """Scalar Gram ``psi(<b_i|b_j>)`` of the basis (the identity, up to rounding)."""
        Q = self.basis
        return Q.conj().T @ (self._w2[:, None] * Q)

    # -- coordinates ----------------------------------------------------------
    def coords(self, Z, check: bool = True) -> np.ndarray:
        """Coordinates of an ambient tensor (``dim x dim`` array) in the E-basis."""
        z = np.asarray(Z).reshape(-1)
        c = self.basis.conj().T @ (self._w2 * z)
        if check:
            resid = z - self.basis @ c
            norm = np.sqrt(abs(np.sum(self._w2 * np.abs(z) ** 2)))
            err = np.sqrt(abs(np.sum(self._w2 * np.abs(resid) ** 2)))
            if err > self.tol * max(norm, 1.0) * 10:
                raise NotInSpan(f"tensor leaves E (residual {err:.3e})")
        return c

    def ambient(self, xi) -> np.ndarray:
        D = self.space.dim
        return (self.basis @ np.asarray(xi)).reshape(D, D)

    def generator(self, x, y) -> np.ndarray:
        """Coordinates of ``x . eps . y``."""
        sp = self.space
        Z = sp.left_mul_matrix(x) @ epsilon_vector(self.graph) @ sp.right_mul_matrix(y).T
        return self.coords(Z)

    @cached_property
    def epsilon(self) -> np.ndarray:
        return self.coords(epsilon_vector(self.graph))

    # -- module structure -----------------------------------------------------
    def inner_product(self, xi, eta) -> np.ndarray:
        return self.module.inner(xi, eta)

    def ambient_inner_product(self, xi, eta) -> np.ndarray:
        """Same inner product computed from the ``B (x)_psi B`` formula."""
        return self.space.tensor_module_inner(self.ambient(xi), self.ambient(eta))

    def formula_inner(self, x1, y1, x2, y2) -> np.ndarray:
        """``<x1 . eps . y1 | x2 . eps . y2> = delta^-2 y1^* A(x1^* x2) y2``."""
        sp = self.space
        inner = self.graph.apply(sp.product(sp.star(x1), x2))
        return sp.product(sp.product(sp.star(y1), inner), y2) / sp.delta_sq

    def left_act(self, x, xi) -> np.ndarray:
        sp = self.space
        return self.coords(sp.left_mul_matrix(x) @ self.ambient(xi))

    def right_act(self, xi, y) -> np.ndarray:
        sp = self.space
        return self.coords(self.ambient(xi) @ sp.right_mul_matrix(y).T)

    def phi(self, x) -> np.ndarray:
        """Left action ``phi_E(x)`` as a matrix on E-coordinates."""
        return self.module.left_matrix(x)

    def rank_one(self, xi, eta) -> np.ndarray:
        return self.module.rank_one(xi, eta)

    def left_kernel_blocks(self) -> set:
        """Blocks ``a`` with ``1_a . E = 0``."""
        sp = self.space
        return {a for a in range(sp.d)
                if np.max(np.abs(self.phi(sp.central_projection(a))), initial=0.0) <= self.tol}

    def inner_ideal_blocks(self) -> frozenset:
        """Block support of ``span <E|E>``."""
        sp = self.space
        support = set()
        g = self.module.gram.reshape(-1, sp.dim)
        scale = max(np.max(np.abs(g), initial=0.0), 1.0)
        for a in range(sp.d):
            if np.max(np.abs(g[:, sp.blocks.block_slice(a)]), initial=0.0) > self.tol * scale:
                support.add(a)
        return frozenset(support)

    @property
    def faithful(self) -> bool:
        return not quantum_sources(self.graph, self.tol)

    @property
    def full(self) -> bool:
        return not quantum_sinks(self.graph, self.tol)

    # -- tensor powers --------------------------------------------------------
    @cached_property
    def powers(self) -> TensorPowers:
        return TensorPowers(self.module, self.tol, DEFAULT_MAX_LEVEL, DEFAULT_MAX_SPAN)

    def tensor_power(self, n: int) -> HilbertBimodule:
        return self.powers.level(n)

    def partial_inner(self, k: int, left, m: int, right) -> np.ndarray:
        return self.powers.partial_inner(k, left, m, right)

    @cached_property
    def multiplicity_matrix(self) -> np.ndarray:
        """``M[a, b] = dim(1_a E 1_b) / (n(a) n(b))``, the bimodule multiplicities."""
        sp = self.space
        M = np.zeros((sp.d, sp.d), dtype=int)
        for a in range(sp.d):
            La = self.phi(sp.central_projection(a))
            for b in range(sp.d):
                P = La @ self.module.right_matrix(sp.central_projection(b))
                rank = int(round(np.real(np.trace(P))))
                M[a, b] = rank // (sp.sizes[a] * sp.sizes[b])
        return M


def build_edge_correspondence(G: QuantumGraph, tol=None) -> EdgeCorrespondence:
    """Span all ``e_p . eps . e_q`` and reduce to an orthonormal basis."""
    tol = resolve_tol(tol)
    sp = G.space
    D = sp.dim
    eps = epsilon_vector(G)
    if np.max(np.abs(eps), initial=0.0) <= tol:
        raise ZeroCorrespondence("epsilon vanishes: A is zero")
    L, R = sp.left_mul_basis, sp.right_mul_basis
    span = np.einsum("prs,st,qut->pqru", L, eps, R).reshape(D * D, D * D).T
    w2 = np.kron(sp.gns_weights, sp.gns_weights)
    sq = np.sqrt(w2)
    U, s, _ = np.linalg.svd(sq[:, None] * span, full_matrices=False)
    r = int(np.sum(s > tol * s[0]))
    Q = U[:, :r] / sq[:, None]

    proj = Q.conj().T * w2[None, :]
    IL = np.eye(D)
    left = np.stack([proj @ np.kron(Lp, IL) @ Q for Lp in L])
    right = np.stack([proj @ np.kron(IL, Rp) @ Q for Rp in R])
    for p in range(D):
        resid = np.kron(L[p], IL) @ Q - Q @ left[p]
        if np.max(np.abs(resid), initial=0.0) > 1e3 * tol * max(1.0, np.max(np.abs(L[p]))):
            raise NotInSpan("left action leaves the span")
    return EdgeCorrespondence(G, Q, HilbertBimodule(sp, left, right), tol)


def phi_compacts_check(E: EdgeCorrespondence) -> float:
    """Max residual of ``phi(f_ij) = sum_k theta_{f_ik . eps, f_jk . eps}`` over adapted units."""
    sp = E.space
    f = adapted_units(sp)
    one = sp.unit()
    gen = {key: E.generator(val, one) for key, val in f.items()}
    worst = 0.0
    for (a, i, j), fij in f.items():
        lhs = E.phi(fij)
        rhs = sum(E.rank_one(gen[(a, i, k)], gen[(a, j, k)]) for k in range(sp.sizes[a]))
        scale = max(np.max(np.abs(lhs)), 1.0)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))) / scale)
    return worst
