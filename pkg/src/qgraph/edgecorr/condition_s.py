"""Non-returning vectors, structured families and the Condition (S) certificate."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import BudgetExceeded, ZeroVector
from ..qadj import quantum_sinks, quantum_sources
from .correspondence import EdgeCorrespondence
from .modules import to_level0

__all__ = [
    "NonReturningResult",
    "is_non_returning",
    "StructuredFamily",
    "family_vector",
    "family_phi",
    "family_phi_direct",
    "FamilyEvidence",
    "ConditionSCertificate",
    "condition_s_certificate",
]


@dataclass(frozen=True)
class NonReturningResult:
    value: bool
    max_defect: float = 0.0
    flags: tuple = ()

    def __bool__(self):
        return self.value


def _return_defects(E: EdgeCorrespondence, xi, m: int, n: int) -> np.ndarray:
    """Norms of ``zeta(eta) = <xi | eta (x) xi>`` (first m legs) for each basis ``eta`` of level n."""
    P = E.powers
    theta = P.tensor_map(n, m - n)                         # (r_m, r_n, r_{m-n})
    r_m, r_n, r_t = theta.shape
    # head/tail split xi = sum c[g, b] u_g (x) v_b
    c = np.linalg.lstsq(theta.reshape(r_m, r_n * r_t), xi, rcond=None)[0].reshape(r_n, r_t)
    tail = P.tensor_map(m - n, n)                           # (r_m, r_{m-n}, r_n)
    gram_n = P.level(n).gram                                # (r_n, r_n, D)
    Lm = P.level(m).left                                    # (D, r_m, r_m)
    # omega[g, eta, k] = (<u_g|eta> . xi)_k
    omega = np.einsum("gep,pkl,l->gek", gram_n, Lm, xi)
    zeta = np.einsum("gb,kbz,gek->ez", np.conj(c), np.conj(tail), omega)
    return np.linalg.norm(zeta, axis=1)


def is_non_returning(E: EdgeCorrespondence, xi, m: int) -> NonReturningResult:
    """Exact finite test of ``t^m(xi)^* t^n(eta) t^m(xi) = 0`` for all ``0 < n < m``.

    Valid when the left action is injective, because then ``t^n`` is isometric
    in the universal covariant representation.
    """
    flags = []
    if quantum_sources(E.graph, E.tol):
        flags.append("not_faithful_sufficient_only")
    if m < 2:
        return NonReturningResult(True, 0.0, tuple(flags + ["LevelTooSmall"]))
    xi = np.asarray(xi, dtype=complex)
    scale = max(float(np.vdot(xi, xi).real), 1e-300)
    worst = 0.0
    for n in range(1, m):
        d = _return_defects(E, xi, m, n)
        worst = max(worst, float(d.max(initial=0.0)) / scale)
    return NonReturningResult(worst <= E.tol, worst, tuple(flags))


@dataclass(frozen=True)
class StructuredFamily:
    """``pair``: (1_a eps 1_b) (x) (eps 1_b)^(m-1); ``sink``: (1_c eps) (x) eps^(m-1)."""

    kind: str
    a: int
    b: int = None

    def __post_init__(self):
        if self.kind == "pair":
            if self.b is None or self.a == self.b:
                raise ValueError("a pair family needs two distinct blocks")
        elif self.kind == "sink":
            if self.b is not None:
                raise ValueError("a sink family has a single block")
        else:
            raise ValueError(f"unknown family kind {self.kind!r}")

    @classmethod
    def pair(cls, a, b):
        return cls("pair", a, b)

    @classmethod
    def sink(cls, c):
        return cls("sink", c)

    @property
    def source_block(self) -> int:
        return self.a

    def describe(self) -> dict:
        if self.kind == "pair":
            return {"kind": "pair", "a": self.a + 1, "b": self.b + 1}
        return {"kind": "sink", "c": self.a + 1}


def _check_family(E, fam):
    d = E.space.d
    if not 0 <= fam.a < d or (fam.b is not None and not 0 <= fam.b < d):
        raise ValueError("family blocks out of range")
    if fam.kind == "sink" and fam.a not in quantum_sinks(E.graph, E.tol):
        raise ValueError(f"block {fam.a + 1} is not a quantum sink")


def family_vector(E: EdgeCorrespondence, fam: StructuredFamily, m: int) -> np.ndarray:
    """Materialise the family vector in level ``m`` coordinates."""
    _check_family(E, fam)
    sp = E.space
    one = sp.unit()
    if fam.kind == "pair":
        pb = sp.central_projection(fam.b)
        head = E.generator(sp.central_projection(fam.a), pb)
        link = E.generator(one, pb)
    else:
        head = E.generator(sp.central_projection(fam.a), one)
        link = E.epsilon
    P = E.powers
    tail = to_level0(sp, one)
    for level in range(m - 1):
        tail = P.tensor(1, link, level, tail)
    return P.tensor(1, head, m - 1, tail)


def _step(E, fam):
    A = E.graph.matrix
    if fam.kind == "pair":
        R = E.space.right_mul_matrix(E.space.central_projection(fam.b))
        return R @ A
    return A


def family_phi(E: EdgeCorrespondence, fam: StructuredFamily, m: int) -> np.ndarray:
    """Normalised ``x -> <xi|x.xi> / ||<xi|xi>||`` as a matrix on e-coordinates.

    Computed by iterating ``F(y) = A(y) 1_b`` (or ``F = A`` for a sink) on
    ``x 1_a``, without building the tensor power.
    """
    _check_family(E, fam)
    sp = E.space
    F = _step(E, fam)
    Pa = sp.left_mul_matrix(sp.central_projection(fam.a))
    M = np.linalg.matrix_power(F, m) @ Pa
    norm = sp.norm(M @ sp.unit())
    if norm <= E.tol:
        raise ZeroVector(f"family {fam.describe()} vanishes at length {m}")
    return M / norm


def family_phi_direct(E: EdgeCorrespondence, fam: StructuredFamily, m: int) -> np.ndarray:
    """Same map computed from the materialised tensor-power vector."""
    sp = E.space
    xi = family_vector(E, fam, m)
    Xm = E.powers.level(m)
    cols = [Xm.inner(xi, Xm.left_act(sp.basis_vector(p), xi)) for p in range(sp.dim)]
    M = np.stack(cols, axis=1)
    norm = sp.norm(Xm.inner(xi, xi))
    if norm <= E.tol:
        raise ZeroVector(f"family {fam.describe()} vanishes at length {m}")
    return M / norm


def _is_corner_embedding(E, phi, c) -> tuple:
    """Injective, *-preserving and multiplicative on the matrix units of block c."""
    sp = E.space
    tol = E.tol
    n = sp.sizes[c]
    units = [(i, j) for i in range(n) for j in range(n)]
    imgs = {u: phi @ sp.matrix_unit(c, *u) for u in units}
    stack = np.stack(list(imgs.values()), axis=1)
    s = np.linalg.svd(stack, compute_uv=False)
    injective = bool(s.size and s[-1] > tol * max(s[0], 1.0))
    star = all(np.allclose(imgs[(j, i)], sp.star(imgs[(i, j)]), atol=1e3 * tol) for i, j in units)
    mult = True
    for (i, j) in units:
        for (k, l) in units:
            want = imgs[(i, l)] if j == k else np.zeros(sp.dim)
            if not np.allclose(sp.product(imgs[(i, j)], imgs[(k, l)]), want, atol=1e3 * tol):
                mult = False
                break
        if not mult:
            break
    return injective, star, mult


@dataclass
class FamilyEvidence:
    block: int
    family: StructuredFamily
    image_blocks: list
    period: tuple
    non_returning_checked: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "block": self.block + 1,
            "family": self.family.describe(),
            "image_blocks": [b + 1 for b in self.image_blocks],
            "period": list(self.period),
            "non_returning_checked": self.non_returning_checked,
        }


@dataclass
class ConditionSCertificate:
    certified: bool
    m_max: int
    evidence: list
    missing_blocks: list
    reason: str = ""

    @property
    def status(self) -> str:
        return "CERTIFIED" if self.certified else "NOT_CERTIFIED"

    def __bool__(self):
        return self.certified

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "m_max": self.m_max,
            "families": [e.to_dict() for e in self.evidence],
            "missing_blocks": [b + 1 for b in self.missing_blocks],
            "reason": self.reason,
        }


def _candidates(E, c):
    d = E.space.d
    out = [StructuredFamily.pair(c, b) for b in range(d) if b != c]
    if c in quantum_sinks(E.graph, E.tol):
        out.append(StructuredFamily.sink(c))
    return out


def try_family(E, fam, c, m_max, spot_levels):
    sp = E.space
    maps = {}
    for m in range(2, m_max + 1):
        try:
            phi = family_phi(E, fam, m)
        except ZeroVector:
            return None
        if not all(_is_corner_embedding(E, phi, c)):
            return None
        maps[m] = phi
    period = None
    ms = sorted(maps)
    for j, m1 in enumerate(ms):
        for m0 in ms[:j]:
            if np.allclose(maps[m0], maps[m1], atol=1e3 * E.tol):
                period = (m0, m1)
                break
        if period:
            break
    if period is None:
        return None
    checked = []
    for m in spot_levels:
        if m > m_max:
            continue
        try:
            res = is_non_returning(E, family_vector(E, fam, m), m)
        except BudgetExceeded:
            continue
        if not res:
            return None
        checked.append(m)
    image = sorted(sp.block_support(maps[period[0]] @ sp.central_projection(c), E.tol))
    return FamilyEvidence(c, fam, image, period, checked)


def condition_s_certificate(E: EdgeCorrespondence, m_max: int = 8,
                            spot_levels=(2, 3)) -> ConditionSCertificate:
    """Search the pair and sink families for a per-block Condition (S) witness.

    NOT_CERTIFIED means the structured search failed, not that Condition (S)
    fails.
    """
    if m_max < 3:
        raise ValueError("m_max must be at least 3 to observe a repetition")
    if quantum_sources(E.graph, E.tol):
        return ConditionSCertificate(False, m_max, [], list(range(E.space.d)),
                                     "correspondence is not faithful")
    evidence, missing = [], []
    for c in range(E.space.d):
        found = None
        for fam in _candidates(E, c):
            found = try_family(E, fam, c, m_max, spot_levels)
            if found is not None:
                break
        if found is None:
            missing.append(c)
        else:
            evidence.append(found)
    reason = "" if not missing else "no structured family recovers blocks " + \
        ", ".join(str(b + 1) for b in missing)
    return ConditionSCertificate(not missing, m_max, evidence, missing, reason)
