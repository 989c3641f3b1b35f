"""Curvature of the spray and horizontal Berwald covariant derivatives.

Vertical vectors and sections of the pull-back bundle are both stored as
plain n-vectors.  Fields are represented by a rule producing their jet at
``(x, y)``, so covariant derivatives can be nested: every derivative consumes
one jet order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import taylor as tj
from .errors import PointwiseFamilyError
from .metrics import MetricSpec, check_point, metric_tensor
from .spray import point_jet, spray_jets


def _require_global(spec: MetricSpec):
    if spec.is_pointwise:
        raise PointwiseFamilyError(f"{spec.family} carries no x-derivative data; curvature needs a global family")


def curvature_jet(spec: MetricSpec, x, y, order: int = 0, method: str = "projective") -> tj.Taylor:
    """Jet of ``R^i_jk = dG^i_j/dx^k - dG^i_k/dx^j + G^m_j G^i_km - G^m_k G^i_jm``."""
    _require_global(spec)
    n = spec.n
    S = spray_jets(spec, x, y, order + 1, method)
    Gj = S.Gj
    dGj = tj.Taylor.stack([Gj.reshape(n * n)[p].diff(k) for p in range(n * n) for k in range(n)]).reshape(n, n, n)
    Gjk = S.Gjk
    Gj_t = Gj.truncate(Gjk.order)
    return dGj - dGj.transpose(0, 2, 1) + tj.einsum("mj,ikm->ijk", Gj_t, Gjk) - tj.einsum("mk,ijm->ijk", Gj_t, Gjk)


def riemann_curvature(spec: MetricSpec, x, y, method: str = "projective") -> np.ndarray:
    """``R[i, j, k] = R^i_jk(x, y)``."""
    x, y = check_point(spec, x, y)
    return curvature_jet(spec, x, y, 0, method).value.copy()


def constant_curvature_model(spec: MetricSpec, x, y, lam: float) -> np.ndarray:
    """``lam (delta^i_k g_jm y^m - delta^i_j g_km y^m)``."""
    g = metric_tensor(spec, x, y)
    gy = g @ np.asarray(y, float)
    eye = np.eye(spec.n)
    return lam * (np.einsum("ik,j->ijk", eye, gy) - np.einsum("ij,k->ijk", eye, gy))


@dataclass(frozen=True)
class FlagResidual:
    residual: float
    sign: int  # +1: R = lam(d_k g_j - d_j g_k); -1: the opposite order


def flag_curvature_residual(spec: MetricSpec, x, y, lam: float) -> FlagResidual:
    """Relative sup-distance of R from the constant-curvature model, best of both sign orders."""
    R = riemann_curvature(spec, x, y)
    model = constant_curvature_model(spec, x, y, lam)
    scale = 1.0 + np.abs(R).max()
    plus = np.abs(R - model).max() / scale
    minus = np.abs(R + model).max() / scale
    if plus <= minus:
        return FlagResidual(float(plus), 1)
    return FlagResidual(float(minus), -1)


@dataclass(frozen=True)
class IndicatrixVectorField:
    """A vertical vector field ``y -> xi^i(x, y)`` given by its jets near ``x``."""

    spec: MetricSpec
    x: np.ndarray
    jet: Callable[[np.ndarray, np.ndarray, int], tj.Taylor]
    label: str = "xi"

    def __call__(self, y) -> np.ndarray:
        x, y = check_point(self.spec, self.x, y)
        return self.jet(self.x, y, 0).value.copy()

    def at(self, x) -> "IndicatrixVectorField":
        return IndicatrixVectorField(self.spec, np.asarray(x, float), self.jet, self.label)


def curvature_vector_field(spec: MetricSpec, x, X, Y) -> IndicatrixVectorField:
    """``xi(y) = R^i_jk(x, y) X^j Y^k`` for constant vectors X, Y."""
    _require_global(spec)
    X = np.asarray(X, float)
    Y = np.asarray(Y, float)

    def jet(x_, y_, order):
        R = curvature_jet(spec, x_, y_, order)
        return tj.einsum("ijk,jk->i", R, np.outer(X, Y))

    return IndicatrixVectorField(spec, np.asarray(x, float), jet, f"R({X.tolist()},{Y.tolist()})")


def berwald_covariant_derivative(spec: MetricSpec, xi: IndicatrixVectorField, X) -> IndicatrixVectorField:
    """``(d xi^i/dx^j - G^k_j d xi^i/dy^k + G^i_jk xi^k) X^j``."""
    _require_global(spec)
    n = spec.n
    X = np.asarray(X, float)

    def jet(x_, y_, order):
        inner = xi.jet(x_, y_, order + 1)
        S = spray_jets(spec, x_, y_, order)
        dx = tj.Taylor.stack([tj.Taylor.stack([inner[i].diff(j) for j in range(n)]) for i in range(n)])
        dy = tj.Taylor.stack([tj.Taylor.stack([inner[i].diff(n + k) for k in range(n)]) for i in range(n)])
        Gj = S.Gj.truncate(order)
        Gjk = S.Gjk.truncate(order)
        term = dx - tj.einsum("kj,ik->ij", Gj, dy) + tj.einsum("ijk,k->ij", Gjk, inner.truncate(order))
        return tj.einsum("ij,j->i", term, X)

    return IndicatrixVectorField(spec, xi.x, jet, f"nabla_{X.tolist()}({xi.label})")


def first_covariant_closed_form(spec: MetricSpec, x, y, W) -> np.ndarray:
    """Closed form ``(n+1) (dP/dy^k) W^k``, the factor multiplying xi."""
    x, y = check_point(spec, x, y)
    n = spec.n
    Yj = tj.seed(y, 1)
    P = spec.P(x, Yj)
    return (n + 1) * float(P.coef[1 : n + 1] @ np.asarray(W, float))


@dataclass(frozen=True)
class SecondDerivativeComparison:
    closed: np.ndarray  # closed form with the product weight used
    generic: np.ndarray  # nested Berwald derivative
    xi: np.ndarray
    factor: float  # scalar multiplying xi in the closed form


def second_covariant_factor(spec: MetricSpec, x, y, W, Z, product_weight: float = 3.0) -> float:
    """``3 {P_{x^j y^k} - P P_{y^k y^j} + w P_{y^k} P_{y^j}} W^k Z^j``.

    Differentiating ``(3 P_k W^k) xi`` gives ``w = 3`` for the product
    term; ``w = 1`` is the variant without the inner factor 3.
    """
    _require_global(spec)
    n = spec.n
    X, Y = point_jet(spec, x, y, 2)
    P = spec.P(X, Y)
    W = np.asarray(W, float)
    Z = np.asarray(Z, float)
    eye = np.eye(2 * n, dtype=int)
    Py = np.array([P.partial(eye[n + k]) for k in range(n)])
    Pxy = np.array([[P.partial(eye[j] + eye[n + k]) for k in range(n)] for j in range(n)])  # [j, k]
    Pyy = np.array([[P.partial(eye[n + k] + eye[n + l]) for l in range(n)] for k in range(n)])
    p = float(P.value)
    inner = Pxy.T - p * Pyy + product_weight * np.outer(Py, Py)  # [k, j]
    return 3.0 * float(W @ inner @ Z)


def second_covariant_closed_form(
    spec: MetricSpec, x, y, W, Z, U=None, V=None, product_weight: float = 3.0
) -> SecondDerivativeComparison:
    """Closed form of ``nabla_Z nabla_W xi`` next to the nested generic derivative, xi = R(U, V)."""
    x, y = check_point(spec, x, y)
    n = spec.n
    U = np.eye(n)[0] if U is None else U
    V = np.eye(n)[1] if V is None else V
    xi = curvature_vector_field(spec, x, U, V)
    nested = berwald_covariant_derivative(spec, berwald_covariant_derivative(spec, xi, W), Z)
    factor = second_covariant_factor(spec, x, y, W, Z, product_weight)
    xi_val = xi(y)
    return SecondDerivativeComparison(factor * xi_val, nested(y), xi_val, factor)


def projective_identity_residual(spec: MetricSpec, x, y, lam: float, j: int = 0, k: int = 1) -> float:
    """Residual of ``P_{x^j y^k} - P P_{jk} + P_j P_k = 2 P_j P_k - (lam/2) d^2F^2/dy^j dy^k``."""
    _require_global(spec)
    x, y = check_point(spec, x, y)
    n = spec.n
    X, Y = point_jet(spec, x, y, 2)
    P = spec.P(X, Y)
    F = spec.F(X, Y)
    eye = np.eye(2 * n, dtype=int)
    pj, pk = P.partial(eye[n + j]), P.partial(eye[n + k])
    lhs = P.partial(eye[j] + eye[n + k]) - float(P.value) * P.partial(eye[n + j] + eye[n + k]) + pj * pk
    rhs = 2.0 * pj * pk - 0.5 * lam * (F * F).partial(eye[n + j] + eye[n + k])
    return float(abs(lhs - rhs))


def nabla_R(spec: MetricSpec, x, y, W) -> np.ndarray:
    """Horizontal Berwald derivative of the tensor R along a constant W."""
    x, y = check_point(spec, x, y)
    n = spec.n
    W = np.asarray(W, float)
    R = curvature_jet(spec, x, y, 1)
    S = spray_jets(spec, x, y, 0)
    Gj = S.Gj.value
    Gjk = S.Gjk.value
    R0 = R.value
    dRx = np.stack([R.diff(l).value for l in range(n)], axis=-1)  # [i,j,k,l]
    dRy = np.stack([R.diff(n + m).value for m in range(n)], axis=-1)  # [i,j,k,m]
    out = np.einsum("ijkl,l->ijk", dRx, W)
    out -= np.einsum("ml,ijkm,l->ijk", Gj, dRy, W)
    out += np.einsum("ilm,mjk,l->ijk", Gjk, R0, W)
    out -= np.einsum("mlj,imk,l->ijk", Gjk, R0, W)
    out -= np.einsum("mlk,ijm,l->ijk", Gjk, R0, W)
    return out


def nabla_R_residual(spec: MetricSpec, x, y, W) -> float:
    return float(np.abs(nabla_R(spec, x, y, W)).max())
