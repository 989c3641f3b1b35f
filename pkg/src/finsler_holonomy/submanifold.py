"""Restriction of a projectively flat metric to a 2-plane through the origin.

In a projectively flat chart every plane through the origin is totally
geodesic (geodesics are straight lines), so the restricted spray is the
parent spray read in plane coordinates and curvature fields of the surface
extend to curvature fields of the parent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import taylor as tj
from .curvature import curvature_jet, riemann_curvature
from .errors import UnsupportedFrameError
from .independence import CertificationReport, certify
from .metrics import MetricSpec, NormLinear, bryant_shen, check_point, custom_pointwise, euclidean, klein, randers_shen
from .spray import geodesic_coefficients


@dataclass(frozen=True)
class PlaneRestriction:
    parent: MetricSpec
    frame: np.ndarray  # (n, 2), orthonormal columns
    basis: tuple[int, int] | None  # coordinate indices, when the plane is a coordinate plane
    restricted: MetricSpec

    def embed(self, v) -> np.ndarray:
        return self.frame @ np.asarray(v, float)

    def project(self, v) -> np.ndarray:
        return self.frame.T @ np.asarray(v, float)


@dataclass(frozen=True)
class _Composed:
    """``ybar -> f(E ybar)`` for a pointwise program f."""

    f: Callable
    frame: np.ndarray

    def __call__(self, y):
        n = self.frame.shape[0]
        if isinstance(y, tj.Taylor):
            Y = tj.Taylor.stack([sum(self.frame[i, k] * y[k] for k in range(2)) for i in range(n)])
        else:
            Y = np.tensordot(self.frame, np.asarray(y, float), axes=(1, 0))
        return self.f(Y)


def _frame(spec: MetricSpec, plane) -> tuple[np.ndarray, tuple[int, int] | None]:
    n = spec.n
    arr = np.asarray(plane)
    if arr.ndim == 1 and arr.size == 2 and np.issubdtype(arr.dtype, np.integer):
        i, j = (int(v) for v in arr)
        if i == j or not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"invalid coordinate plane {plane!r} for n = {n}")
        E = np.zeros((n, 2))
        E[i, 0] = E[j, 1] = 1.0
        return E, (i, j)
    E = np.asarray(plane, float)
    if E.shape != (n, 2):
        raise ValueError(f"a frame must have shape ({n}, 2), got {E.shape}")
    if np.max(np.abs(E.T @ E - np.eye(2))) > 1e-12:
        raise UnsupportedFrameError("only orthonormal 2-frames are supported")
    return E, None


def restrict(spec: MetricSpec, plane) -> PlaneRestriction:
    """Restrict ``spec`` to a plane given by coordinate indices ``(i, j)`` (0-based) or an orthonormal frame."""
    E, basis = _frame(spec, plane)
    fam = spec.family
    if fam == "Euclidean":
        sub = euclidean(2)
    elif fam == "Klein":
        sub = klein(2)
    elif fam == "RandersShen":
        # the family depends on a only through <a, .>, and <a, E v> = <E^T a, v>
        sub = randers_shen(E.T @ np.asarray(spec.a), spec.sign)
    elif fam == "BryantShenPointwise":
        sub = bryant_shen(spec.alpha, 2, spec.flag_curvature)
    elif fam == "CustomPointwise":
        sub = custom_pointwise(_restrict_function(spec.F0, E), _restrict_function(spec.P0, E), 2, spec.lam)
    else:
        raise UnsupportedFrameError(f"{fam} is already 2-dimensional")
    if spec.lam is not None and sub.lam != spec.lam:
        from dataclasses import replace

        sub = replace(sub, lam=spec.lam)
    return PlaneRestriction(spec, E, basis, sub)


def _restrict_function(f, E: np.ndarray):
    if isinstance(f, NormLinear):
        n = E.shape[0]
        A = np.eye(n) if f.matrix is None else np.asarray(f.matrix, float)
        b = np.zeros(n) if not f.linear else np.asarray(f.linear, float)
        A2 = E.T @ A @ E
        return NormLinear(f.scale, tuple(E.T @ b), tuple(tuple(r) for r in A2))
    return _Composed(f, E)


def transversal_geodesic_coefficients(res: PlaneRestriction, xbar, ybar, method: str = "metric") -> float:
    """Largest component of ``G(E xbar, E ybar)`` normal to the plane."""
    x, y = res.embed(xbar), res.embed(ybar)
    G = geodesic_coefficients(res.parent, x, y, method).G
    return float(np.max(np.abs(G - res.frame @ (res.frame.T @ G))))


def curvature_extension_check(res: PlaneRestriction, xbar, ybar, Xbar, Ybar) -> float:
    """``max |Kbar(X, Y) - E^T K(E X, E Y)|`` at an in-plane point."""
    x, y = res.embed(xbar), res.embed(ybar)
    check_point(res.parent, x, y)
    R = riemann_curvature(res.parent, x, y)
    Rbar = riemann_curvature(res.restricted, xbar, ybar)
    X, Y = res.embed(Xbar), res.embed(Ybar)
    parent = res.frame.T @ np.einsum("ijk,j,k->i", R, X, Y)
    sub = np.einsum("ijk,j,k->i", Rbar, np.asarray(Xbar, float), np.asarray(Ybar, float))
    return float(np.max(np.abs(sub - parent)))


def transversal_curvature(res: PlaneRestriction, xbar, ybar, Xbar, Ybar) -> float:
    """Normal component of the parent curvature ``K(E X, E Y)`` on in-plane data."""
    x, y = res.embed(xbar), res.embed(ybar)
    X, Y = res.embed(Xbar), res.embed(Ybar)
    K = tj.einsum("ijk,jk->i", curvature_jet(res.parent, x, y, 0), np.outer(X, Y)).value
    return float(np.max(np.abs(K - res.frame @ (res.frame.T @ K))))


def certify_via_plane(spec: MetricSpec, plane, condition: str, **params) -> CertificationReport:
    """Certify the restricted surface; the verdict carries over to the parent."""
    res = restrict(spec, plane)
    report = certify(res.restricted, condition, **params)
    where = f"coordinates {list(res.basis)}" if res.basis is not None else "an orthonormal frame"
    report.notes.append(f"plane spanned by {where} of the {spec.n}-dimensional {spec.family} metric")
    return report
