"""Holonomy toolkit: transport, polar profiles and rank-4 certificates in one namespace."""

from .independence import (
    CertificationReport,
    GramCertificate,
    IndicatrixFunctionSample,
    PointwiseData,
    certify,
    fit_randers_form,
    gram_rank,
    independence_quadruple,
    independence_quadruple_C,
    sample,
    uniform_grid,
)
from .profile import (
    ConvexityReport,
    PolarProfile,
    fourier_profile,
    lemma_expr_values,
    profile_curvature,
    profile_from_function,
    strong_convexity_check,
)
from .transport import (
    HolonomyMap,
    Path,
    TransportResult,
    circle_loop,
    constant_loop,
    indicatrix_samples,
    loop_holonomy,
    nonlinearity_defect,
    parallel_transport,
    polygon,
    square_loop,
)

__all__ = [name for name in dir() if not name.startswith("_")]
