"""Simplicity verdicts for the Cuntz-Pimsner algebra of an edge correspondence,
and the report separating it from the quantum Cuntz-Krieger algebra."""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import BudgetExceeded
from .edgecorr import (
    Ideal,
    StructuredFamily,
    aperiodicity_report,
    build_edge_correspondence,
    classify_ideals,
    condition_s_certificate,
    is_invariant,
    is_minimal,
    periodic_at,
    revalidate_witness,
)
from .edgecorr.condition_s import try_family
from .qadj import QuantumGraph, kraus_rank, quantum_sinks, quantum_sources

__all__ = [
    "SIMPLE",
    "NOT_SIMPLE",
    "UNKNOWN",
    "SimplicityVerdict",
    "certify_simplicity",
    "revalidate_verdict",
    "SeparationReport",
    "qck_separation",
]

SIMPLE, NOT_SIMPLE, UNKNOWN = "SIMPLE", "NOT_SIMPLE", "UNKNOWN"
SINGLE_BLOCK_KRAUS, SCHWEIZER, CONDITION_S = "SINGLE_BLOCK_KRAUS", "SCHWEIZER", "CONDITION_S"


@dataclass
class SimplicityVerdict:
    verdict: str
    route: str
    evidence: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "route": self.route, "evidence": self.evidence}


def _route(G: QuantumGraph, tol) -> str:
    if G.space.d == 1:
        return SINGLE_BLOCK_KRAUS
    return CONDITION_S if quantum_sinks(G, tol) else SCHWEIZER


def certify_simplicity(G: QuantumGraph, m_max: int = 8, N_period: int = 4,
                       seed: int = 0, tol=None) -> SimplicityVerdict:
    """Route the graph to the applicable criterion.

    Single block: simple iff the Kraus rank exceeds one.  Full correspondence:
    minimal and aperiodic.  Otherwise a Condition (S) certificate together
    with the absence of nontrivial saturated hereditary ideals, which is only
    sufficient, so its failure gives UNKNOWN.
    """
    route = _route(G, tol)
    if G.is_zero:
        return SimplicityVerdict(UNKNOWN, route, {"reason": "zero adjacency: the correspondence vanishes"})
    if route == SINGLE_BLOCK_KRAUS:
        d = kraus_rank(G, tol)
        return SimplicityVerdict(SIMPLE if d > 1 else NOT_SIMPLE, route, {"kraus_rank": d})

    E = build_edge_correspondence(G, tol)
    sources = sorted(quantum_sources(G, E.tol))
    base = {"faithful": not sources, "full": route == SCHWEIZER}
    try:
        if route == SCHWEIZER:
            return _schweizer(E, N_period, seed, base)
        return _condition_s(E, m_max, base)
    except BudgetExceeded as exc:
        return SimplicityVerdict(UNKNOWN, route, dict(base, reason=f"budget exceeded: {exc}"))


def _schweizer(E, N_period, seed, ev):
    mini = is_minimal(E)
    ev = dict(ev, minimal=mini.minimal)
    if not mini:
        ev["witness_ideal"] = mini.witness.one_based()
        return SimplicityVerdict(NOT_SIMPLE, SCHWEIZER, ev)
    rep = aperiodicity_report(E, N_period, seed)
    ev["aperiodicity"] = rep.to_dict()
    if rep.status == "APERIODIC_CERTIFIED" or not ev["faithful"]:
        return SimplicityVerdict(SIMPLE, SCHWEIZER, ev)
    if rep.status == "PERIODIC_AT":
        ev["period"] = rep.period
        return SimplicityVerdict(NOT_SIMPLE, SCHWEIZER, ev)
    if rep.multiplicity_certificate:
        ev["aperiodic_by"] = "multiplicity matrix is not a permutation"
        return SimplicityVerdict(SIMPLE, SCHWEIZER, ev)
    ev["reason"] = f"no period found up to {N_period}"
    return SimplicityVerdict(UNKNOWN, SCHWEIZER, ev)


def _condition_s(E, m_max, ev):
    cert = condition_s_certificate(E, m_max)
    classes = classify_ideals(E)
    sat_her = [c.ideal for c in classes if c.hereditary and c.saturated]
    ev = dict(ev, condition_s=cert.to_dict(),
              ideals=[{"ideal": c.ideal.one_based(), "hereditary": c.hereditary,
                       "saturated": c.saturated} for c in classes],
              saturated_hereditary=[I.one_based() for I in sat_her])
    if cert.certified and not sat_her:
        return SimplicityVerdict(SIMPLE, CONDITION_S, ev)
    reasons = []
    if not cert.certified:
        reasons.append("Condition (S) not certified: " + cert.reason)
    if sat_her:
        reasons.append("nontrivial saturated hereditary ideals exist")
    ev["reason"] = "; ".join(reasons)
    return SimplicityVerdict(UNKNOWN, CONDITION_S, ev)


def revalidate_verdict(G: QuantumGraph, v: SimplicityVerdict, tol=None) -> bool:
    """Re-check the witness carried by a verdict against its defining predicate."""
    ev = v.evidence
    if v.verdict == UNKNOWN:
        return True
    if v.route == SINGLE_BLOCK_KRAUS:
        d = kraus_rank(G, tol)
        return d == ev["kraus_rank"] and (d > 1) == (v.verdict == SIMPLE)
    E = build_edge_correspondence(G, tol)
    if v.route == SCHWEIZER:
        if v.verdict == NOT_SIMPLE and "witness_ideal" in ev:
            J = Ideal(frozenset(b - 1 for b in ev["witness_ideal"]))
            return 0 < len(J.blocks) < E.space.d and is_invariant(E, J)
        if v.verdict == NOT_SIMPLE:
            return revalidate_witness(E, periodic_at(E, ev["period"]))
        return bool(is_minimal(E))
    # Condition (S) route: every family must reproduce its evidence
    m_max = ev["condition_s"]["m_max"]
    for fam in ev["condition_s"]["families"]:
        f = fam["family"]
        sf = StructuredFamily.pair(f["a"] - 1, f["b"] - 1) if f["kind"] == "pair" \
            else StructuredFamily.sink(f["c"] - 1)
        got = try_family(E, sf, fam["block"] - 1, m_max, ())
        if got is None or [b + 1 for b in got.image_blocks] != fam["image_blocks"]:
            return False
    return not ev["saturated_hereditary"]


@dataclass
class SeparationReport:
    sources: list
    sinks: list
    simplicity: SimplicityVerdict
    separated: object     # True or "unknown"
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "sources": [b + 1 for b in self.sources],
            "sinks": [b + 1 for b in self.sinks],
            "simplicity": self.simplicity.to_dict(),
            "separated": self.separated,
            "reason": self.reason,
        }


def qck_separation(G: QuantumGraph, m_max: int = 8, N_period: int = 4,
                   seed: int = 0, tol=None) -> SeparationReport:
    """No sources, some sink and a simple Cuntz-Pimsner algebra separate the two algebras."""
    sources = sorted(quantum_sources(G, tol))
    sinks = sorted(quantum_sinks(G, tol))
    verdict = certify_simplicity(G, m_max, N_period, seed, tol)
    reasons = []
    if sources:
        reasons.append("graph has quantum sources")
    if not sinks:
        reasons.append("graph has no quantum sinks")
    if verdict.verdict != SIMPLE:
        reasons.append(f"simplicity verdict is {verdict.verdict}")
    if reasons:
        return SeparationReport(sources, sinks, verdict, "unknown", "; ".join(reasons))
    return SeparationReport(sources, sinks, verdict, True,
                            "no sources, nonempty sinks, simple Cuntz-Pimsner algebra")
