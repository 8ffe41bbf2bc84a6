"""Periodicity of the edge correspondence: is some tensor power isomorphic to B?"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ..qadj import quantum_sinks, quantum_sources
from .correspondence import EdgeCorrespondence

__all__ = [
    "PeriodicityCheck",
    "predicted_dim",
    "periodic_at",
    "revalidate_witness",
    "multiplicity_aperiodic",
    "AperiodicityReport",
    "aperiodicity_report",
]

DEFAULT_SAMPLES = 32


@dataclass
class PeriodicityCheck:
    """``status`` is one of ``PERIODIC``, ``NOT_PERIODIC``, ``INCONCLUSIVE``."""

    n: int
    status: str
    dim: int
    central_dim: int = 0
    witness: np.ndarray = None    # level-n coordinates, <w|w> = 1
    how: str = ""

    def __bool__(self):
        return self.status == "PERIODIC"


def _is_invertible(sp, x, tol) -> bool:
    for blk in sp.to_blocks(x):
        s = np.linalg.svd(blk, compute_uv=False)
        if s[-1] <= tol * max(s[0], 1.0) * 1e3:
            return False
    return True


def _normalise(E, X, omega):
    """Scale a central ``omega`` so that ``<omega|omega> = 1``."""
    sp = E.space
    c = X.inner(omega, omega)
    scale = sp.from_blocks([np.diag(1.0 / np.sqrt(np.real(np.diag(b)))) for b in sp.to_blocks(c)])
    return X.right_act(omega, scale)


def predicted_dim(E: EdgeCorrespondence, n: int) -> int:
    """``dim X^(x)n = sum_ab (M^n)_ab n_a n_b`` from the multiplicity matrix."""
    sizes = np.array(E.space.sizes)
    Mn = np.linalg.matrix_power(E.multiplicity_matrix, n)
    return int(np.sum(Mn * np.outer(sizes, sizes)))


def periodic_at(E: EdgeCorrespondence, n: int, seed: int = 0,
                samples: int = DEFAULT_SAMPLES) -> PeriodicityCheck:
    """``X^(x)n = B`` as correspondences iff the dimensions agree and some central
    ``omega`` has invertible ``<omega|omega>``.

    The candidate ``eps^(x)n`` is tried first, then seeded random combinations
    of the central subspace, then a grid of basis vectors and pairwise sums.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    sp = E.space
    guess = predicted_dim(E, n)
    if guess != sp.dim:
        # no tensor power is built when the count already rules it out
        return PeriodicityCheck(n, "NOT_PERIODIC", guess, how="dimension")
    P = E.powers
    X = P.level(n)
    if X.rank != sp.dim:
        return PeriodicityCheck(n, "NOT_PERIODIC", X.rank, how="dimension")
    Z = X.central_subspace(E.tol)
    k = Z.shape[1]
    if k == 0:
        return PeriodicityCheck(n, "NOT_PERIODIC", X.rank, 0, how="no central vectors")

    def good(omega):
        if np.linalg.norm(omega) <= E.tol:
            return False
        return _is_invertible(sp, X.inner(omega, omega), E.tol)

    def found(omega, how):
        w = _normalise(E, X, omega)
        return PeriodicityCheck(n, "PERIODIC", X.rank, k, w, how)

    eps_n = E.epsilon
    for level in range(1, n):
        eps_n = P.tensor(1, E.epsilon, level, eps_n)
    eps_n = Z @ (Z.conj().T @ eps_n)
    if good(eps_n):
        return found(eps_n, "epsilon power")

    rng = np.random.default_rng(seed)
    for _ in range(samples):
        c = rng.normal(size=k) + 1j * rng.normal(size=k)
        omega = Z @ c
        if good(omega):
            return found(omega, "random sample")

    grid = [Z[:, i] for i in range(k)] + [Z[:, i] + Z[:, j] for i, j in combinations(range(k), 2)]
    for omega in grid:
        if good(omega):
            return found(omega, "grid")
    return PeriodicityCheck(n, "INCONCLUSIVE", X.rank, k, how="all samples singular")


def revalidate_witness(E: EdgeCorrespondence, check: PeriodicityCheck) -> bool:
    """Independently re-check that a witness is central with invertible inner product."""
    if check.witness is None:
        return False
    sp = E.space
    X = E.powers.level(check.n)
    w = check.witness
    if X.rank != sp.dim:
        return False
    for p in range(sp.dim):
        x = sp.basis_vector(p)
        if np.linalg.norm(X.left_act(x, w) - X.right_act(w, x)) > 1e3 * E.tol:
            return False
    return _is_invertible(sp, X.inner(w, w), E.tol)


def multiplicity_aperiodic(E: EdgeCorrespondence) -> bool:
    """True when the multiplicity matrix is not a permutation matrix.

    The multiplicity matrix of ``X^(x)n`` is ``M^n``, and ``X^(x)n = B`` forces
    ``M^n = I``, which for a nonnegative integer matrix means ``M`` permutes.
    """
    M = E.multiplicity_matrix
    d = M.shape[0]
    is_perm = (np.all((M == 0) | (M == 1)) and np.all(M.sum(axis=0) == 1)
               and np.all(M.sum(axis=1) == 1))
    return not (is_perm and d > 0)


@dataclass
class AperiodicityReport:
    """``status``: ``APERIODIC_CERTIFIED``, ``NO_PERIOD_UP_TO_N`` or ``PERIODIC_AT``."""

    status: str
    N: int
    period: int = None
    reason: str = ""
    dims: dict = field(default_factory=dict)
    inconclusive_levels: list = field(default_factory=list)
    multiplicity_certificate: bool = False
    witness: PeriodicityCheck = None

    def label(self) -> str:
        if self.status == "PERIODIC_AT":
            return f"PERIODIC_AT({self.period})"
        return self.status

    def to_dict(self) -> dict:
        out = {
            "status": self.status,
            "label": self.label(),
            "N": self.N,
            "reason": self.reason,
            "dims": {str(k): v for k, v in sorted(self.dims.items())},
            "inconclusive_levels": list(self.inconclusive_levels),
            "multiplicity_certificate": self.multiplicity_certificate,
        }
        if self.period is not None:
            out["period"] = self.period
            out["witness_method"] = self.witness.how
        return out


def aperiodicity_report(E: EdgeCorrespondence, N: int = 4, seed: int = 0) -> AperiodicityReport:
    """A source or sink rules out periodicity at once; otherwise scan ``n = 1..N``."""
    sources = quantum_sources(E.graph, E.tol)
    sinks = quantum_sinks(E.graph, E.tol)
    mult = multiplicity_aperiodic(E)
    if sources or sinks:
        what = "source" if sources else "sink"
        return AperiodicityReport("APERIODIC_CERTIFIED", N, reason=f"graph has a quantum {what}",
                                  multiplicity_certificate=mult)
    dims, pending = {0: E.space.dim}, []
    for n in range(1, N + 1):
        chk = periodic_at(E, n, seed=seed)
        dims[n] = chk.dim
        if chk.status == "PERIODIC":
            return AperiodicityReport("PERIODIC_AT", N, n, "central vector with invertible norm",
                                      dims, pending, mult, chk)
        if chk.status == "INCONCLUSIVE":
            pending.append(n)
    reason = "dimension count" if all(dims[n] != dims[0] for n in range(1, N + 1)) \
        else "no central vector with invertible norm"
    return AperiodicityReport("NO_PERIOD_UP_TO_N", N, None, reason, dims, pending, mult)
