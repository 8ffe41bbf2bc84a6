"""Ideals of B (sets of blocks) and the ideal-theoretic properties of E."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ..errors import NotFull
from ..qadj import quantum_sources
from .correspondence import EdgeCorrespondence

__all__ = [
    "Ideal",
    "nontrivial_ideals",
    "katsura_ideal",
    "is_invariant",
    "MinimalityResult",
    "is_minimal",
    "is_hereditary",
    "is_saturated",
    "IdealClassification",
    "classify_ideals",
    "scan_saturated_hereditary",
]


@dataclass(frozen=True)
class Ideal:
    """The ideal ``B 1_J`` for a set ``J`` of 0-based block indices."""

    blocks: frozenset

    def __post_init__(self):
        object.__setattr__(self, "blocks", frozenset(int(b) for b in self.blocks))

    @classmethod
    def of(cls, *blocks) -> "Ideal":
        return cls(frozenset(blocks))

    def __contains__(self, block) -> bool:
        return block in self.blocks

    def __le__(self, other):
        return self.blocks <= other.blocks

    def sorted(self) -> list:
        return sorted(self.blocks)

    def one_based(self) -> list:
        return [b + 1 for b in sorted(self.blocks)]

    def validate(self, d: int) -> None:
        bad = [b for b in self.blocks if not 0 <= b < d]
        if bad:
            raise ValueError(f"block indices {bad} out of range for {d} blocks")


def nontrivial_ideals(d: int) -> list:
    """All ideals other than 0 and B, smallest first."""
    return [Ideal(frozenset(c)) for k in range(1, d) for c in combinations(range(d), k)]


def katsura_ideal(E: EdgeCorrespondence) -> Ideal:
    """In finite dimensions every operator is compact, so ``J_X = (ker phi)^perp``."""
    return Ideal(frozenset(range(E.space.d)) - quantum_sources(E.graph, E.tol))


def is_invariant(E: EdgeCorrespondence, J: Ideal) -> bool:
    """``A(J) subset J``: A maps every basis element of J into J's blocks."""
    sp = E.space
    A = E.graph.matrix
    cols = np.concatenate([np.arange(sp.dim)[sp.blocks.block_slice(a)] for a in J.sorted()]) \
        if J.blocks else np.array([], dtype=int)
    rows = np.concatenate([np.arange(sp.dim)[sp.blocks.block_slice(a)]
                           for a in range(sp.d) if a not in J]) if len(J.blocks) < sp.d \
        else np.array([], dtype=int)
    if cols.size == 0 or rows.size == 0:
        return True
    scale = max(np.max(np.abs(A)), 1.0)
    return not np.any(np.abs(A[np.ix_(rows, cols)]) > E.tol * scale)


@dataclass(frozen=True)
class MinimalityResult:
    minimal: bool
    witness: Ideal = None

    def __bool__(self):
        return self.minimal


def is_minimal(E: EdgeCorrespondence) -> MinimalityResult:
    """Minimality of a full E via absence of a nontrivial A-invariant ideal."""
    if not E.full:
        raise NotFull("minimality criterion needs a full correspondence")
    for J in nontrivial_ideals(E.space.d):
        if is_invariant(E, J):
            return MinimalityResult(False, J)
    return MinimalityResult(True)


def _rank(M, tol):
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * max(s[0], 1.0)))


def _range_basis(M, tol):
    if M.size == 0:
        return np.zeros((M.shape[0], 0), dtype=complex)
    U, s, _ = np.linalg.svd(M)
    if s.size == 0 or s[0] == 0:
        return np.zeros((M.shape[0], 0), dtype=complex)
    return U[:, : int(np.sum(s > tol * max(s[0], 1.0)))]


def _left_right(E, I):
    sp = E.space
    p = sp.central_projection(I.sorted())
    return E.module.left_matrix(p), E.module.right_matrix(p)


def is_hereditary(E: EdgeCorrespondence, I: Ideal) -> bool:
    """``I E subset E I`` by a rank test on the concrete subspaces."""
    IX, XI = _left_right(E, I)
    return _rank(np.hstack([XI, IX]), E.tol) == _rank(XI, E.tol)


def is_saturated(E: EdgeCorrespondence, I: Ideal) -> bool:
    """Every ``b`` in the Katsura ideal with ``b . E subset E I`` lies in ``I``."""
    sp = E.space
    J = katsura_ideal(E)
    _, XI = _left_right(E, I)
    Q = _range_basis(XI, E.tol)
    comp = np.eye(E.dim) - Q @ Q.conj().T
    idx = [p for p in range(sp.dim) if sp.blocks.block_of[p] in J]
    if not idx:
        return True
    cols = np.stack([(comp @ E.module.left[p]).reshape(-1) for p in idx], axis=1)
    _, s, vh = np.linalg.svd(cols)
    rank = int(np.sum(s > E.tol * max(s[0] if s.size else 0.0, 1.0)))
    null = vh[rank:].conj().T                      # solutions b, in coordinates idx
    outside = [k for k, p in enumerate(idx) if sp.blocks.block_of[p] not in I]
    if null.size == 0 or not outside:
        return True
    return not np.any(np.abs(null[outside, :]) > np.sqrt(E.tol))


@dataclass(frozen=True)
class IdealClassification:
    ideal: Ideal
    hereditary: bool
    saturated: bool


def classify_ideals(E: EdgeCorrespondence) -> list:
    return [IdealClassification(I, is_hereditary(E, I), is_saturated(E, I))
            for I in nontrivial_ideals(E.space.d)]


def scan_saturated_hereditary(E: EdgeCorrespondence) -> list:
    """Nontrivial ideals that are both saturated and hereditary."""
    return [c.ideal for c in classify_ideals(E) if c.hereditary and c.saturated]
