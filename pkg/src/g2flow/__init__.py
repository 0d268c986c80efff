"""Left-invariant G2-structures on 7-dimensional Lie groups: torsion, Laplacians and flows."""
from .errors import (
    BlowUpHalt,
    ConfigError,
    DegreeError,
    G2FlowError,
    InvalidAlgebra,
    MetricError,
    NotCoclosed,
    NotPositive,
    PositivityLost,
)
from .exterior import AltForm, Metric7, hodge_star, interior, wedge
from .flows import FlowSpec, FlowTrace, evolution_crosscheck, flow_rhs, hitchin_volume, integrate
from .laplacian import laplacian_direct, laplacian_phi_decomposed, laplacian_psi_coclosed
from .lie import LieAlgebra, ce_differential, curvature, levi_civita
from .presets import get_preset, preset_names
from .structure import G2Structure, metric_from_phi, standard_phi
from .torsion import Geometry, coclosed_identity_suite, full_torsion, identity_suite, torsion_class

__version__ = "0.1.0"

__all__ = [
    "BlowUpHalt",
    "ConfigError",
    "DegreeError",
    "G2FlowError",
    "InvalidAlgebra",
    "MetricError",
    "NotCoclosed",
    "NotPositive",
    "PositivityLost",
    "AltForm",
    "Metric7",
    "hodge_star",
    "interior",
    "wedge",
    "FlowSpec",
    "FlowTrace",
    "evolution_crosscheck",
    "flow_rhs",
    "hitchin_volume",
    "integrate",
    "laplacian_direct",
    "laplacian_phi_decomposed",
    "laplacian_psi_coclosed",
    "LieAlgebra",
    "ce_differential",
    "curvature",
    "levi_civita",
    "get_preset",
    "preset_names",
    "G2Structure",
    "metric_from_phi",
    "standard_phi",
    "Geometry",
    "coclosed_identity_suite",
    "full_torsion",
    "identity_suite",
    "torsion_class",
]
