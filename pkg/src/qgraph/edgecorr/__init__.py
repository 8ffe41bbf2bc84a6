"""Edge correspondences of quantum graphs, their tensor powers and ideals."""
from .condition_s import (
    ConditionSCertificate,
    FamilyEvidence,
    NonReturningResult,
    StructuredFamily,
    condition_s_certificate,
    family_phi,
    family_phi_direct,
    family_vector,
    is_non_returning,
)
from .correspondence import EdgeCorrespondence, build_edge_correspondence, phi_compacts_check
from .ideals import (
    Ideal,
    IdealClassification,
    MinimalityResult,
    classify_ideals,
    is_hereditary,
    is_invariant,
    is_minimal,
    is_saturated,
    katsura_ideal,
    nontrivial_ideals,
    scan_saturated_hereditary,
)
from .modules import HilbertBimodule, TensorPowers, algebra_module, from_level0, to_level0
from .periodicity import (
    AperiodicityReport,
    PeriodicityCheck,
    aperiodicity_report,
    multiplicity_aperiodic,
    periodic_at,
    predicted_dim,
    revalidate_witness,
)

__all__ = [
    "AperiodicityReport",
    "ConditionSCertificate",
    "EdgeCorrespondence",
    "FamilyEvidence",
    "HilbertBimodule",
    "Ideal",
    "IdealClassification",
    "MinimalityResult",
    "NonReturningResult",
    "PeriodicityCheck",
    "StructuredFamily",
    "TensorPowers",
    "algebra_module",
    "aperiodicity_report",
    "build_edge_correspondence",
    "classify_ideals",
    "condition_s_certificate",
    "family_phi",
    "family_phi_direct",
    "family_vector",
    "from_level0",
    "is_hereditary",
    "is_invariant",
    "is_minimal",
    "is_non_returning",
    "is_saturated",
    "katsura_ideal",
    "multiplicity_aperiodic",
    "nontrivial_ideals",
    "periodic_at",
    "phi_compacts_check",
    "predicted_dim",
    "revalidate_witness",
    "scan_saturated_hereditary",
    "to_level0",
]
