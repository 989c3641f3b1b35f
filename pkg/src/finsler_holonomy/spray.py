"""Geodesic coefficients, horizontal lift and geodesic integration.

Convention: geodesics solve ``x''^i + 2 G^i(x, x') = 0`` and projectively
flat families have ``G^i = P y^i``.  Jets are taken in the 2n variables
``(x^1..x^n, y^1..y^n)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from . import taylor as tj
from .errors import ChartExitError, MetricDegeneracyError, PointwiseFamilyError, StepFailureError
from .metrics import BALL_FAMILIES, CHART_MARGIN, MetricSpec, check_point

RTOL = 1e-10
ATOL = 1e-12


@dataclass(frozen=True)
class SprayData:
    G: np.ndarray  # G^i
    Gj: np.ndarray  # Gj[i, j] = G^i_j
    Gjk: np.ndarray  # Gjk[i, j, k] = G^i_jk
    x: np.ndarray
    y: np.ndarray


@dataclass(frozen=True)
class SprayJets:
    G: tj.Taylor
    Gj: tj.Taylor
    Gjk: tj.Taylor


def point_jet(spec: MetricSpec, x, y, order: int):
    """Seed jets for x and y at a chart point; returns (X, Y)."""
    n = spec.n
    z = tj.seed(np.concatenate([np.asarray(x, float), np.asarray(y, float)]), order)
    return z[:n], z[n:]


def projective_factor_jet(spec: MetricSpec, X, Y, method: str = "auto"):
    """``P`` as a jet; ``method="derived"`` uses ``(1/2F) dF/dx^i y^i``."""
    if method in ("auto", "closed"):
        return spec.P(X, Y)
    n = spec.n
    # the x-derivative costs one order
    F = spec.F(X, Y)
    Fx_y = sum(F.diff(i) * Y[i] for i in range(n))
    return Fx_y / (2.0 * F)


def _require_global(spec: MetricSpec):
    if spec.is_pointwise:
        raise PointwiseFamilyError(f"{spec.family} carries no x-derivative data")


def spray_jets(spec: MetricSpec, x, y, order: int, method: str = "projective") -> SprayJets:
    """Jets of G^i, G^i_j, G^i_jk; ``Gjk`` is valid to ``order``.

    ``method="projective"`` builds the closed forms from P;
    ``method="metric"`` uses the general formula with ``g^{il}``.
    """
    n = spec.n
    if method == "projective":
        X, Y = point_jet(spec, x, y, order + 2)
        P = spec.P(X, Y)
        return _projective_sprays(P, Y, n)
    if method == "projective-derived":
        X, Y = point_jet(spec, x, y, order + 3)
        P = projective_factor_jet(spec, X, Y, "derived")
        return _projective_sprays(P, Y.truncate(P.order), n)
    if method == "metric":
        _require_global(spec)
        X, Y = point_jet(spec, x, y, order + 5)
        G = metric_geodesic_jet(spec, X, Y)
        Gj = tj.Taylor.stack([tj.Taylor.stack([G[i].diff(n + j) for j in range(n)]) for i in range(n)])
        Gjk = tj.Taylor.stack(
            [tj.Taylor.stack([tj.Taylor.stack([Gj[i, j].diff(n + k) for k in range(n)]) for j in range(n)]) for i in range(n)]
        )
        return SprayJets(G, Gj, Gjk)
    raise ValueError(f"unknown method {method!r}")


def _projective_sprays(P, Y, n: int) -> SprayJets:
    eye = np.eye(n)
    G = P * Y
    dP = tj.Taylor.stack([P.diff(n + k) for k in range(n)])  # P_k
    Yt = Y.truncate(dP.order)
    Gj = tj.einsum("k,i->ik", dP, Yt) + P * eye
    ddP = tj.Taylor.stack([dP[k].diff(n + l) for k in range(n) for l in range(n)]).reshape(n, n)
    Yt2 = Y.truncate(ddP.order)
    dPt = dP.truncate(ddP.order)
    Gjk = tj.einsum("kl,i->ikl", ddP, Yt2) + tj.einsum("k,il->ikl", dPt, eye) + tj.einsum("l,ik->ikl", dPt, eye)
    return SprayJets(G, Gj, Gjk)


def metric_geodesic_jet(spec: MetricSpec, X, Y):
    """``G^i = 1/4 g^{il} (2 dg_jl/dx^k - dg_jk/dx^l) y^j y^k`` as a jet."""
    n = spec.n
    F = spec.F(X, Y)
    F2 = F * F
    dF2 = [F2.diff(n + i) for i in range(n)]
    g = [[0.5 * dF2[i].diff(n + j) for j in range(n)] for i in range(n)]
    dg = [[[g[i][j].diff(k) for k in range(n)] for j in range(n)] for i in range(n)]  # dg[j][l][k] = d g_jl / dx^k
    Yt = Y.truncate(dg[0][0][0].order)
    rhs = []
    for l in range(n):
        acc = 0.0
        for j in range(n):
            for k in range(n):
                acc = acc + (2.0 * dg[j][l][k] - dg[j][k][l]) * Yt[j] * Yt[k]
        rhs.append(0.25 * acc)
    g_t = [[g[i][j].truncate(rhs[0].order) for j in range(n)] for i in range(n)]
    return tj.Taylor.stack(solve_jet(g_t, rhs))


def solve_jet(A, b):
    """Gaussian elimination on a small matrix of scalar jets (no pivoting; A is SPD)."""
    n = len(b)
    A = [list(row) for row in A]
    b = list(b)
    for p in range(n):
        piv = A[p][p]
        if np.any(np.abs(piv.value) < 1e-300):
            raise MetricDegeneracyError("singular metric tensor")
        for r in range(p + 1, n):
            f = A[r][p] / piv
            for c in range(p, n):
                A[r][c] = A[r][c] - f * A[p][c]
            b[r] = b[r] - f * b[p]
    out = [None] * n
    for p in range(n - 1, -1, -1):
        acc = b[p]
        for c in range(p + 1, n):
            acc = acc - A[p][c] * out[c]
        out[p] = acc / A[p][p]
    return out


def geodesic_coefficients(spec: MetricSpec, x, y, method: str = "projective") -> SprayData:
    """G^i, G^i_j, G^i_jk at a point of the slit tangent bundle."""
    x, y = check_point(spec, x, y)
    if spec.is_pointwise and method != "projective":
        raise PointwiseFamilyError(f"{spec.family} only supports the projective-factor path")
    if method == "metric":
        g = _metric_values(spec, x, y)
        if np.linalg.cond(g) > 1e12:
            raise MetricDegeneracyError("metric tensor is numerically singular")
    jets = spray_jets(spec, x, y, 0, method)
    return SprayData(jets.G.value.copy(), jets.Gj.value.copy(), jets.Gjk.value.copy(), x, y)


def _metric_values(spec, x, y):
    from .metrics import metric_tensor

    return metric_tensor(spec, x, y)


def connection_matrix(spec: MetricSpec, x, y) -> np.ndarray:
    """``G^i_j(x, y)`` for a batch ``y`` of shape (n, B); only P and dP/dy are needed."""
    n = spec.n
    x = np.asarray(x, float).reshape((n,) + (1,) * (np.ndim(y) - 1))
    Yj = tj.seed(y, 1)
    P = spec.P(x, Yj)
    dP = P.coef[1 : n + 1]  # dP[k] = dP/dy^k
    return np.einsum("k...,i...->ik...", dP, y) + np.einsum("ij,...->ij...", np.eye(n), P.value)


def horizontal_lift(spec: MetricSpec, x, y, v) -> tuple[np.ndarray, np.ndarray]:
    """Components ``(v, -G^i_k v^k)`` in the (d/dx, d/dy) splitting."""
    x, y = check_point(spec, x, y)
    v = np.asarray(v, dtype=float)
    sd = geodesic_coefficients(spec, x, y)
    return v.copy(), -sd.Gj @ v


@dataclass(frozen=True)
class GeodesicTrace:
    t: np.ndarray
    x: np.ndarray  # (n, T)
    xdot: np.ndarray  # (n, T)
    F: np.ndarray
    exit_time: float | None = None


def _chart_event(spec: MetricSpec):
    n = spec.n
    radius = 1.0 - CHART_MARGIN

    def event(t, s):
        return radius - np.sqrt(s[:n] @ s[:n])

    event.terminal = True
    event.direction = -1
    return event


def geodesic_integrate(spec: MetricSpec, x0, y0, T: float, tol: float = RTOL, n_out: int = 201, allow_exit: bool = False) -> GeodesicTrace:
    """Integrate ``x'' + 2 P(x, x') x' = 0`` on [0, T] with adaptive RK45.

    Raises :class:`ChartExitError` (carrying the exit time) when the curve hits
    ``|x| = 1 - 1e-6`` on a ball chart, unless ``allow_exit`` is set, in which
    case the trace up to the exit time is returned.
    """
    if spec.is_pointwise:
        raise PointwiseFamilyError(f"{spec.family} has no geodesic equation away from x = 0")
    x0, y0 = check_point(spec, x0, y0)
    n = spec.n

    def rhs(t, s):
        x, v = s[:n], s[n:]
        return np.concatenate([v, -2.0 * float(spec.P(x, v)) * v])

    events = [_chart_event(spec)] if spec.family in BALL_FAMILIES else None
    sol = solve_ivp(rhs, (0.0, T), np.concatenate([x0, y0]), method="RK45", rtol=tol, atol=ATOL, dense_output=True, events=events)
    if sol.status == -1:
        raise StepFailureError(sol.message)
    exit_time = None
    t_end = T
    if sol.status == 1:
        exit_time = float(sol.t_events[0][0])
        if not allow_exit:
            raise ChartExitError(f"geodesic left the chart at t = {exit_time:.6g}", exit_time)
        t_end = exit_time
    ts = np.linspace(0.0, t_end, n_out)
    states = sol.sol(ts)
    xs, vs = states[:n], states[n:]
    Fs = np.asarray(spec.F(xs, vs), dtype=float)
    return GeodesicTrace(ts, xs, vs, Fs, exit_time)


def chart_exit_time(spec: MetricSpec, x0, y0, t_max: float) -> float:
    """First time the geodesic reaches the chart margin, or ``inf`` before ``t_max``."""
    trace = geodesic_integrate(spec, x0, y0, t_max, allow_exit=True, n_out=2)
    return float("inf") if trace.exit_time is None else trace.exit_time


def line_deviation(trace: GeodesicTrace) -> float:
    """Max Euclidean distance of the trace from the line through x(0) along x'(0)."""
    p = trace.x[:, :1]
    d = trace.xdot[:, 0] / np.linalg.norm(trace.xdot[:, 0])
    rel = trace.x - p
    perp = rel - np.outer(d, d @ rel)
    return float(np.max(np.linalg.norm(perp, axis=0)))
