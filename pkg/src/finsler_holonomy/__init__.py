"""Numerical Finsler geometry: sprays, curvature, nonlinear transport and holonomy certificates."""

__version__ = "0.1.0"

from .metrics import MetricSpec, bryant_shen, euclidean, klein, randers_shen, spec_from_dict  # noqa: E402

__all__ = ["MetricSpec", "bryant_shen", "euclidean", "klein", "randers_shen", "spec_from_dict", "__version__"]
