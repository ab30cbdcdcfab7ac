"""Scaled torus PCA: principal components for multivariate angular data.

Torus data are mapped to a sphere of fitted radius by spherical MDS,
analysed with principal nested spheres, and mapped back to the torus to
give a principal curve and a variance decomposition.
"""

from .analysis import (
    circular_kde,
    classification_rate,
    mode_cluster,
    watson_uniformity_test,
)
from .embedding import (
    check_spherical_embeddability,
    classical_mds,
    pairwise_sphere_distances,
    pairwise_torus_distances,
)
from .errors import (
    DegenerateSubsphereError,
    InvalidArgumentError,
    NumericalFailureError,
    ParseError,
)
from .geometry import (
    circle_distance,
    frechet_mean_circle,
    sphere_distance,
    torus_distance,
    wrap,
)
from .model import RunConfig, TorusModel, fit, load_model, save_model
from .pns import fit_pns, pns_forward, pns_inverse
from .radius import RadiusSelectionConfig, select_radius
from .simulate import simulate
from .smds import SmdsConfig, solve_smds
from .torus_map import PairedConfiguration, interpolate, predict, principal_curve, torus_variance

__version__ = "0.1.0"

__all__ = [
    "DegenerateSubsphereError",
    "InvalidArgumentError",
    "NumericalFailureError",
    "PairedConfiguration",
    "ParseError",
    "RadiusSelectionConfig",
    "RunConfig",
    "SmdsConfig",
    "TorusModel",
    "check_spherical_embeddability",
    "circle_distance",
    "circular_kde",
    "classical_mds",
    "classification_rate",
    "fit",
    "fit_pns",
    "frechet_mean_circle",
    "interpolate",
    "load_model",
    "mode_cluster",
    "pairwise_sphere_distances",
    "pairwise_torus_distances",
    "pns_forward",
    "pns_inverse",
    "predict",
    "principal_curve",
    "save_model",
    "select_radius",
    "simulate",
    "solve_smds",
    "sphere_distance",
    "torus_distance",
    "torus_variance",
    "watson_uniformity_test",
    "wrap",
]
