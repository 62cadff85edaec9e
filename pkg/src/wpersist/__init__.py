"""Noise thresholds and persistency-of-nonlocality bounds for W states."""

from .symcorr import (
    BellFunctional,
    SettingProfile,
    StrategyCounts,
    SymVector,
    apply_functional,
    enumerate_profiles,
    s_o1_closed_form,
    vertex_image,
    vertex_image_permanent,
)
from .quantum import (
    MeasurementAngles,
    NoisyWState,
    dense_oracle,
    mixed_point,
    product_point,
    w_point,
)
from .bellfamily import (
    FamilyConstants,
    family_coefficients,
    family_classical_value,
    family_local_bound_enumerate,
    family_quantum_value,
    pcrit_family,
)
from .polytope import (
    PCritCertificate,
    SearchConfig,
    build_vertices,
    optimize_angles,
    pcrit_at_angles,
    pcrit_lp,
    verify_certificate,
)
from .persistency import (
    PCritTable,
    PersistencyBound,
    asymptotic_report,
    lower_bound,
    upper_bound,
)
from .channels import amplitude_damp, verify_w_damping_identity
from .errors import CapacityError, TableGapError

__all__ = [
    "BellFunctional",
    "CapacityError",
    "FamilyConstants",
    "MeasurementAngles",
    "NoisyWState",
    "PCritCertificate",
    "PCritTable",
    "PersistencyBound",
    "SearchConfig",
    "SettingProfile",
    "StrategyCounts",
    "SymVector",
    "TableGapError",
    "amplitude_damp",
    "apply_functional",
    "asymptotic_report",
    "build_vertices",
    "dense_oracle",
    "enumerate_profiles",
    "family_classical_value",
    "family_coefficients",
    "family_local_bound_enumerate",
    "family_quantum_value",
    "lower_bound",
    "mixed_point",
    "optimize_angles",
    "pcrit_at_angles",
    "pcrit_family",
    "pcrit_lp",
    "product_point",
    "s_o1_closed_form",
    "upper_bound",
    "verify_certificate",
    "verify_w_damping_identity",
    "vertex_image",
    "vertex_image_permanent",
    "w_point",
]
