"""Figures of merit for synthesized gates: fidelities, Wigner negativity, entanglement."""

from .entanglement import (
    MomentData,
    NegativityReport,
    gaussian_negativity,
    negativity,
    negativity_report,
    quadrature_moments,
    symplectic_eigenvalues,
)
from .fidelity import (
    QualityFactors,
    ScalingRow,
    conditional_fidelity,
    deterministic_fidelity,
    fidelity_scaling_probe,
    qfqs_diagonal,
    self_kerr_deterministic_deficit,
    self_kerr_model_deficit,
    success_deficit,
    success_deficit_expansion,
    success_probability,
    support_bound,
)
from .wigner import WignerGrid, default_axis, negative_regions, wigner, wigner_displaced_parity

__all__ = [
    "MomentData",
    "NegativityReport",
    "QualityFactors",
    "ScalingRow",
    "WignerGrid",
    "conditional_fidelity",
    "default_axis",
    "deterministic_fidelity",
    "fidelity_scaling_probe",
    "gaussian_negativity",
    "negative_regions",
    "negativity",
    "negativity_report",
    "qfqs_diagonal",
    "quadrature_moments",
    "self_kerr_deterministic_deficit",
    "self_kerr_model_deficit",
    "success_deficit",
    "success_deficit_expansion",
    "success_probability",
    "support_bound",
    "symplectic_eigenvalues",
    "wigner",
    "wigner_displaced_parity",
]
