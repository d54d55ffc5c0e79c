"""Extremal parallelepipeds inscribed in ellipsoids.

Constructions that maximize total edge length or total facet area, sharp
closed-form bounds with numerical certification, and the diagonal
equalization procedures (Schur-Horn style rotations) the constructions
rest on.
"""

from .config import DEFAULT_TOLERANCES, ToleranceConfig
from .constructors import (
    ExtremalCertificate,
    VertexConstraint,
    construct_L_max,
    construct_S_max,
    construct_through_vertex,
    construct_vertex_2d,
    construct_vertex_eigen_L,
    construct_vertex_eigen_S,
    vertex_lambdas,
)
from .equalizer import (
    EqualizationReport,
    RotationTriple,
    barycentric_basis,
    equalize_diagonal,
    equalize_diagonal_barycentric,
    rotation_about_ones_axis,
)
from .errors import (
    ConstraintViolated,
    DegenerateParallelepiped,
    DegenerateVertex,
    DimensionMismatch,
    DimensionTooSmall,
    InscribedExtremaError,
    NonPositiveInput,
    NotConverged,
    NotEigenvector,
    NotInscribed,
    NotOnBoundary,
    NotOrthotope,
    NotPositiveDefinite,
    NotRowConstant,
    SingularGram,
    UnsupportedCase,
    WrongDimension,
)
from .functionals import (
    FunctionalValue,
    beta_product_sum,
    bound_L_max,
    bound_S_max,
    diag_quadratic,
    edge_length_total,
    facet_area_total_factored,
    facet_area_total_gram,
    maclaurin_gap,
    phi,
    phi_max,
    planar_identity_check,
)
from .geometry import (
    Ellipsoid,
    InscribedReport,
    Parallelepiped,
    SphereOrthotope,
    all_plus_vertex,
    is_inscribed,
    orthotope_to_parallelepiped,
    parallelepiped_to_orthotope,
    sign_vectors,
    vertices,
)
from .linalg import householder_to, random_orthogonal
from .oracle import (
    RshReport,
    SearchReport,
    TangentNormalsDump,
    explore_restricted_schur_horn,
    random_search_global,
    random_search_vertex,
    stationarity_check,
    tangent_normals_dump,
)

__version__ = "0.1.0"

__all__ = [
    "ConstraintViolated",
    "DEFAULT_TOLERANCES",
    "DegenerateParallelepiped",
    "DegenerateVertex",
    "DimensionMismatch",
    "DimensionTooSmall",
    "Ellipsoid",
    "EqualizationReport",
    "ExtremalCertificate",
    "FunctionalValue",
    "InscribedExtremaError",
    "InscribedReport",
    "NonPositiveInput",
    "NotConverged",
    "NotEigenvector",
    "NotInscribed",
    "NotOnBoundary",
    "NotOrthotope",
    "NotPositiveDefinite",
    "NotRowConstant",
    "Parallelepiped",
    "RotationTriple",
    "RshReport",
    "SearchReport",
    "SingularGram",
    "SphereOrthotope",
    "TangentNormalsDump",
    "ToleranceConfig",
    "UnsupportedCase",
    "VertexConstraint",
    "WrongDimension",
    "all_plus_vertex",
    "barycentric_basis",
    "beta_product_sum",
    "bound_L_max",
    "bound_S_max",
    "construct_L_max",
    "construct_S_max",
    "construct_through_vertex",
    "construct_vertex_2d",
    "construct_vertex_eigen_L",
    "construct_vertex_eigen_S",
    "diag_quadratic",
    "edge_length_total",
    "equalize_diagonal",
    "equalize_diagonal_barycentric",
    "explore_restricted_schur_horn",
    "facet_area_total_factored",
    "facet_area_total_gram",
    "householder_to",
    "is_inscribed",
    "maclaurin_gap",
    "orthotope_to_parallelepiped",
    "parallelepiped_to_orthotope",
    "phi",
    "phi_max",
    "planar_identity_check",
    "random_orthogonal",
    "random_search_global",
    "random_search_vertex",
    "rotation_about_ones_axis",
    "sign_vectors",
    "stationarity_check",
    "tangent_normals_dump",
    "vertex_lambdas",
    "vertices",
]
