"""Truncated Fock module ``F_N(X) = X^(x)0 + ... + X^(x)N`` and the operator
identities of the Fock representation, checked as finite matrices.

Every level is held in a basis that is orthonormal for ``psi(<.|.>)``, so
operator adjoints are conjugate transposes.  Creation operators drop whatever
would land above level N; an identity involving them is compared only on the
input levels where that truncation cannot interfere (the *window*).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceeded, IdealNotInKatsura, QInIdeal
from .edgecorr.correspondence import EdgeCorrespondence
from .edgecorr.ideals import Ideal, katsura_ideal
from .edgecorr.periodicity import predicted_dim
from .qspace import adapted_units, comultiply

__all__ = [
    "FockTruncation",
    "verify_toeplitz_identities",
    "verify_qck",
    "TruncatedIdealSpan",
    "truncated_ideal_span",
    "separation_check",
    "brute_force_return",
]

DEFAULT_MAX_FOCK_DIM = 4000


class FockTruncation:
    def __init__(self, E: EdgeCorrespondence, N: int = 3, max_dim: int = DEFAULT_MAX_FOCK_DIM):
        if N < 1:
            raise ValueError("N must be at least 1")
        self.E = E
        self.N = N
        self.space = E.space
        self.tol = E.tol
        P = E.powers
        if N > P.max_level:
            raise BudgetExceeded(f"Fock level {N} exceeds tensor cap {P.max_level}")
        # the multiplicity count gives the size before any tensor power is built
        expected = E.space.dim + sum(predicted_dim(E, k) for k in range(1, N + 1))
        if expected > max_dim:
            raise BudgetExceeded(f"Fock dimension {expected} exceeds budget {max_dim}")
        self.dims = [P.dim(k) for k in range(N + 1)]
        self.offsets = np.concatenate([[0], np.cumsum(self.dims)]).astype(int)
        self.dim = int(self.offsets[-1])

    # -- bookkeeping ------------------------------------------------------------
    def level_slice(self, k: int) -> slice:
        return slice(self.offsets[k], self.offsets[k + 1])

    def window(self, top: int = None) -> np.ndarray:
        """Coordinate indices of levels ``0..top`` (default ``N - 1``)."""
        top = self.N - 1 if top is None else top
        return np.arange(self.offsets[top + 1])

    def zeros(self) -> np.ndarray:
        return np.zeros((self.dim, self.dim), dtype=complex)

    def embed(self, k: int, vec) -> np.ndarray:
        out = np.zeros(self.dim, dtype=complex)
        out[self.level_slice(k)] = vec
        return out

    @property
    def P0(self) -> np.ndarray:
        out = self.zeros()
        s = self.level_slice(0)
        out[s, s] = np.eye(self.dims[0])
        return out

    # -- operators --------------------------------------------------------------
    def op_pi(self, b) -> np.ndarray:
        """Left action of ``b`` on every level."""
        P = self.E.powers
        out = self.zeros()
        for k in range(self.N + 1):
            s = self.level_slice(k)
            out[s, s] = P.level(k).left_matrix(b)
        return out

    def op_pi0(self, b) -> np.ndarray:
        return self.op_pi(b) @ self.P0

    def op_t_power(self, k: int, xi) -> np.ndarray:
        """Creation by ``xi`` in level ``k``: ``zeta -> xi (x) zeta``."""
        P = self.E.powers
        out = self.zeros()
        for j in range(self.N + 1 - k):
            out[self.level_slice(j + k), self.level_slice(j)] = P.t_operator(k, xi, j)
        return out

    def op_t(self, xi) -> np.ndarray:
        return self.op_t_power(1, xi)

    def op_psi_t(self, K) -> np.ndarray:
        """``psi_t(K)`` for an operator ``K`` on E: ``K (x) 1`` above level 0."""
        P = self.E.powers
        K = np.asarray(K)
        out = self.zeros()
        s1 = self.level_slice(1)
        out[s1, s1] = K
        for k in range(2, self.N + 1):
            st = P.step(k)
            s = self.level_slice(k)
            out[s, s] = st.Vt @ np.kron(K, np.eye(st.r_right)) @ st.V
        return out

    def op_psi_t_rank_one(self, K) -> np.ndarray:
        """``psi_t(K)`` through a decomposition ``K = sum c_ij theta_{b_i, b_j}``."""
        mod = self.E.module
        r = mod.rank
        eye = np.eye(r)
        thetas = np.stack([mod.rank_one(eye[i], eye[j]).reshape(-1)
                           for i in range(r) for j in range(r)], axis=1)
        c = np.linalg.lstsq(thetas, np.asarray(K).reshape(-1), rcond=None)[0]
        ts = [self.op_t(eye[i]) for i in range(r)]
        out = self.zeros()
        for idx, coef in enumerate(c):
            if abs(coef) > 0:
                i, j = divmod(idx, r)
                out += coef * ts[i] @ ts[j].conj().T
        return out

    # -- helpers for the graph family T(x) = t(x . eps) ---------------------------
    def T_basis(self) -> list:
        if not hasattr(self, "_T"):
            E = self.E
            one = self.space.unit()
            self._T = [self.op_t(E.generator(self.space.basis_vector(p), one))
                       for p in range(self.space.dim)]
        return self._T

    def T(self, x) -> np.ndarray:
        return sum(c * Tp for c, Tp in zip(np.asarray(x), self.T_basis()) if c != 0) \
            if np.any(np.asarray(x)) else self.zeros()

    def T_star(self, x) -> np.ndarray:
        """``T^*(x) = T(x^*)^*``."""
        return self.T(self.space.star(x)).conj().T


def _restricted_residual(F, lhs, rhs, cols=None) -> float:
    cols = F.window() if cols is None else cols
    diff = (lhs - rhs)[:, cols]
    return float(np.max(np.abs(diff), initial=0.0))


def _mu(F, S1, S2, x):
    """``mu(S1 (x) S2) m^*(x)`` for operator-valued maps S1, S2 on B."""
    sp = F.space
    M = comultiply(sp, x)
    out = F.zeros()
    for p, q in zip(*np.nonzero(np.abs(M) > 0)):
        out += M[p, q] * S1(sp.basis_vector(p)) @ S2(sp.basis_vector(q))
    return out


def verify_toeplitz_identities(F: FockTruncation) -> dict:
    """Residuals of the three ``T``-identities over the adapted units."""
    E, sp = F.E, F.space
    psi_phi = lambda x: F.op_psi_t(E.phi(x))
    res = {"identity_1": 0.0, "identity_2": 0.0, "identity_3": 0.0}
    full = F.window(F.N)
    for f in adapted_units(sp).values():
        lhs1 = _mu(F, F.T_star, F.T, f)
        res["identity_1"] = max(res["identity_1"],
                                _restricted_residual(F, lhs1, F.op_pi(F.E.graph.apply(f))))
        lhs2 = _mu(F, F.T, F.T_star, f)
        res["identity_2"] = max(res["identity_2"], _restricted_residual(F, lhs2, psi_phi(f), full))
        lhs3 = _mu(F, psi_phi, F.T, f)
        res["identity_3"] = max(res["identity_3"],
                                _restricted_residual(F, lhs3, sp.delta_sq * F.T(f)))
    res["max"] = max(res.values())
    return res


def verify_qck(F: FockTruncation) -> dict:
    """QCK1 residual, and the QCK2 / QCK3 defects against their Fock-module values."""
    E, sp = F.E, F.space
    delta = sp.delta
    S = lambda x: F.T(x) / delta
    S_star = lambda x: F.T_star(x) / delta
    A = E.graph.apply
    basis = [sp.basis_vector(p) for p in range(sp.dim)]

    # QCK1: sum over (m^* (x) 1) m^*(x) of S S^* S, via Y_p = mu(S (x) S^*) m^*(e_p)
    Y = [_mu(F, S, S_star, e) for e in basis]
    qck1 = 0.0
    for f in adapted_units(sp).values():
        M = comultiply(sp, f)
        lhs = F.zeros()
        for p, q in zip(*np.nonzero(np.abs(M) > 0)):
            lhs += M[p, q] * Y[p] @ S(basis[q])
        qck1 = max(qck1, _restricted_residual(F, lhs, S(f)))

    qck2 = 0.0
    for e in basis:
        defect = _mu(F, F.T_star, F.T, e) - _mu(F, F.T, F.T_star, A(e))
        qck2 = max(qck2, _restricted_residual(F, defect, F.op_pi0(A(e))))

    lhs3 = _mu(F, S, S_star, sp.unit())
    defect3 = np.eye(F.dim) / sp.delta_sq - lhs3
    full = F.window(F.N)
    qck3 = _restricted_residual(F, defect3, F.P0 / sp.delta_sq, full)
    qck3_raw = float(np.max(np.abs(defect3)))
    return {
        "qck1_residual": qck1,
        "qck2_defect_residual": qck2,
        "qck3_defect_residual": qck3,
        "qck3_defect_norm": qck3_raw,
    }


@dataclass
class TruncatedIdealSpan:
    """Span of ``t^n(xi) pi0(b) t^m(eta)^*`` (``n + m <= N - 1``), stored per block.

    Such an operator only has a ``(level n, level m)`` block, so the span is a
    direct sum over blocks; each entry holds an orthonormal basis of vectorised
    blocks.
    """

    fock: FockTruncation
    ideal: Ideal
    blocks: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return sum(B.shape[1] for B in self.blocks.values())

    def residual(self, op) -> float:
        """Distance from ``op`` to the span (Frobenius norm)."""
        F = self.fock
        total = 0.0
        for n in range(F.N + 1):
            for m in range(F.N + 1):
                blk = op[F.level_slice(n), F.level_slice(m)].reshape(-1)
                Q = self.blocks.get((n, m))
                if Q is not None and Q.shape[1]:
                    blk = blk - Q @ (Q.conj().T @ blk)
                total += float(np.vdot(blk, blk).real)
        return float(np.sqrt(total))


def _span_basis(cols, tol):
    if not cols:
        return None
    M = np.stack(cols, axis=1)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return U[:, :0]
    return U[:, : int(np.sum(s > tol * s[0]))]


def truncated_ideal_span(F: FockTruncation, I: Ideal) -> TruncatedIdealSpan:
    E, sp = F.E, F.space
    P = E.powers
    I.validate(sp.d)
    span = TruncatedIdealSpan(F, I)
    bs = [sp.basis_vector(p) for p in range(sp.dim) if sp.blocks.block_of[p] in I]
    if not bs:
        return span
    L0 = P.level(0)
    for n in range(F.N):
        for m in range(F.N - n):
            cols = []
            for i in range(P.dim(n)):
                u = np.zeros(P.dim(n))
                u[i] = 1.0
                Tn = P.t_operator(n, u, 0)                     # level 0 -> level n
                for b in bs:
                    left = Tn @ L0.left_matrix(b)
                    for j in range(P.dim(m)):
                        v = np.zeros(P.dim(m))
                        v[j] = 1.0
                        Tm = P.t_operator(m, v, 0)
                        cols.append((left @ Tm.conj().T).reshape(-1))
            span.blocks[(n, m)] = _span_basis(cols, F.tol)
    return span


def separation_check(F: FockTruncation, I: Ideal, q: int, strict: bool = False) -> bool:
    """True when ``pi0(1_q)`` lies outside the truncated ideal span of ``I``.

    A block ``q`` inside ``I`` gives False (the projection is in the span)
    unless ``strict`` is set, in which case it is an error.
    """
    E, sp = F.E, F.space
    if not I <= katsura_ideal(E):
        raise IdealNotInKatsura(f"ideal {I.one_based()} is not inside the Katsura ideal")
    if not 0 <= q < sp.d:
        raise ValueError("block index out of range")
    if strict and q in I:
        raise QInIdeal(f"block {q + 1} lies in the ideal")
    target = F.op_pi0(sp.central_projection(q))
    norm = float(np.linalg.norm(target))
    span = truncated_ideal_span(F, I)
    return span.residual(target) > F.tol * max(norm, 1.0) * 1e3


def brute_force_return(E: EdgeCorrespondence, xi, m: int) -> float:
    """Largest ``||t^m(xi)^* t^n(eta) t^m(xi) 1||`` over basis ``eta``, ``0 < n < m``,
    computed with explicit Fock matrices.  Zero iff ``xi`` is non-returning.
    """
    F = FockTruncation(E, N=2 * m - 1)
    Tm = F.op_t_power(m, xi)
    one = F.embed(0, np.sqrt(F.space.gns_weights) * F.space.unit())
    start = Tm @ one
    worst = 0.0
    for n in range(1, m):
        for j in range(F.dims[n]):
            eta = np.zeros(F.dims[n])
            eta[j] = 1.0
            v = Tm.conj().T @ (F.op_t_power(n, eta) @ start)
            worst = max(worst, float(np.linalg.norm(v)))
    return worst
