"""Polar profiles of positively 1-homogeneous functions on the plane.

A positively 1-homogeneous ``phi > 0`` on R^2 is determined by the
2pi-periodic function ``r`` with ``phi(y) = exp(-r(t)) |y|``, ``t`` the polar
angle of ``y``; the unit level set of ``phi`` is the curve
``t -> exp(r(t)) (cos t, sin t)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from . import taylor as tj
from .errors import DomainError, SamplingError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PolarProfile:
    """A 2pi-periodic profile ``r(t)``.

    ``r`` must accept floats, arrays and one-variable :class:`Taylor` jets, so
    that derivatives in ``t`` come out of jet evaluation.
    """

    r: Callable
    is_pi_periodic: bool = False
    label: str = "profile"
    spec: dict | None = field(default=None, compare=False)

    def derivatives(self, t, order: int = 2) -> np.ndarray:
        """Rows ``r, r', r'', ...`` up to ``order`` at the angles ``t``."""
        t = np.asarray(t, dtype=float)
        jet = self.r(tj.directional_seed(t, 1.0, order))
        if not isinstance(jet, tj.Taylor):  # constant profile
            out = np.zeros((order + 1,) + t.shape)
            out[0] = jet
            return out
        return jet.coef * _factorial_column(order, jet.ndim)

    def __call__(self, t):
        return self.derivatives(t, 0)[0]

    def function(self) -> Callable:
        """The 1-homogeneous function ``y -> exp(-r(atan2(y2, y1))) |y|``."""

        def phi(y):
            t = tj.atan2(y[1], y[0])
            return tj.exp(-self.r(t)) * tj.norm(y)

        return phi


def _factorial_column(order: int, ndim: int) -> np.ndarray:
    f = np.cumprod([1.0] + list(range(1, order + 1)))
    return f.reshape((-1,) + (1,) * ndim)


def fourier_profile(c0: float = 0.0, cos: Sequence[float] = (), sin: Sequence[float] = (), label: str | None = None) -> PolarProfile:
    """``r(t) = c0 + sum_k cos[k-1] cos(kt) + sin[k-1] sin(kt)``."""
    cos = tuple(float(v) for v in cos)
    sin = tuple(float(v) for v in sin)

    def r(t):
        out = c0 + 0.0 * t
        for k, ck in enumerate(cos, start=1):
            if ck:
                out = out + ck * tj.cos(k * t)
        for k, sk in enumerate(sin, start=1):
            if sk:
                out = out + sk * tj.sin(k * t)
        return out

    odd_terms = any(cos[k - 1] for k in range(1, len(cos) + 1, 2)) or any(
        sin[k - 1] for k in range(1, len(sin) + 1, 2)
    )
    spec = {"c0": float(c0), "cos": list(cos), "sin": list(sin)}
    return PolarProfile(r, is_pi_periodic=not odd_terms, label=label or f"fourier{spec}", spec=spec)


def profile_from_function(phi: Callable, label: str = "phi") -> PolarProfile:
    """Profile of a positive 1-homogeneous program ``phi`` on R^2."""
    grid = np.linspace(0.0, TWO_PI, 721)
    vals = np.asarray(phi(np.array([np.cos(grid), np.sin(grid)])), dtype=float)
    if np.any(~np.isfinite(vals)) or np.any(vals <= 0.0):
        bad = grid[np.argmin(vals)]
        raise DomainError(f"{label} is not positive on the ray at angle t={bad:.6f}")

    def r(t):
        return -tj.log(phi(tj.Taylor.stack([tj.cos(t), tj.sin(t)])))

    flip = np.asarray(phi(np.array([-np.cos(grid), -np.sin(grid)])), dtype=float)
    return PolarProfile(r, is_pi_periodic=bool(np.allclose(vals, flip, rtol=1e-12, atol=0.0)), label=label)


def profile_curvature(profile: PolarProfile, t) -> np.ndarray:
    """Curvature of the level curve, ``-exp(r)/sqrt(r'^2+1) * (r'' - r'^2 - 1)``."""
    r, rd, rdd = profile.derivatives(t, 2)
    return -np.exp(r) / np.sqrt(rd * rd + 1.0) * (rdd - rd * rd - 1.0)


@dataclass(frozen=True)
class ConvexityReport:
    verdict: str  # "strongly-convex" | "has-flat-point" | "inconclusive"
    min_abs_kappa: float
    max_abs_kappa: float
    t_star: float | None = None
    bracket: tuple[float, float] | None = None


def strong_convexity_check(
    profile: PolarProfile,
    grid_size: int = 512,
    interval: tuple[float, float] | None = None,
    flat_tol: float = 1e-8,
    margin: float = 1e-6,
) -> ConvexityReport:
    """Classify the profile curvature on a grid.

    A sign change of kappa between grid nodes counts as a flat point and is
    located by root bracketing.  Nodes with ``|kappa| <= flat_tol * max|kappa|``
    are flat points; a minimum between ``flat_tol`` and ``margin`` (relative)
    is reported as inconclusive.
    """
    if grid_size < 256:
        raise SamplingError(f"grid_size must be at least 256, got {grid_size}")
    if interval is None:
        t = np.linspace(0.0, TWO_PI, grid_size, endpoint=False)
        closed = True
    else:
        t = np.linspace(interval[0], interval[1], grid_size)
        closed = False
    kappa = profile_curvature(profile, t)
    abs_k = np.abs(kappa)
    kmax = float(abs_k.max())
    kmin = float(abs_k.min())
    if kmax == 0.0 or not np.isfinite(kmax):
        return ConvexityReport("has-flat-point", kmin, kmax, float(t[0]), (float(t[0]), float(t[-1])))

    i = int(np.argmin(abs_k))
    if kmin <= flat_tol * kmax:
        lo = t[i - 1] if i > 0 else t[i]
        hi = t[i + 1] if i + 1 < len(t) else t[i]
        return ConvexityReport("has-flat-point", kmin, kmax, float(t[i]), (float(lo), float(hi)))

    nxt = np.roll(kappa, -1) if closed else kappa[1:]
    cur = kappa if closed else kappa[:-1]
    flips = np.flatnonzero(np.sign(cur) != np.sign(nxt))
    if flips.size:
        j = int(flips[0])
        lo = float(t[j])
        hi = float(t[j + 1]) if j + 1 < len(t) else float(t[0] + TWO_PI)

        def k_at(s: float) -> float:
            return float(profile_curvature(profile, np.array([s]))[0])

        t_star = brentq(k_at, lo, hi, xtol=1e-14)
        return ConvexityReport("has-flat-point", kmin, kmax, float(t_star), (lo, hi))

    if kmin <= margin * kmax:
        return ConvexityReport("inconclusive", kmin, kmax, float(t[i]), None)
    return ConvexityReport("strongly-convex", kmin, kmax)


def lemma_expr_values(profile: PolarProfile, t, sign: str = "direct"):
    """Polar expressions for ``dP/dy1``, ``dP/dy2`` and ``P * d2P/dy1dy2``.

    ``P(y) = exp(-r(t))|y|`` evaluated at the angle(s) ``t``.  With
    ``sign="flipped"`` the third value uses ``(r'^2 + 1 - r'')``, the
    opposite sign, which disagrees with direct differentiation.
    """
    t = np.asarray(t, dtype=float)
    r, rd, rdd = profile.derivatives(t, 2)
    c, s = np.cos(t), np.sin(t)
    e = np.exp(-r)
    p1 = (c + rd * s) * e
    p2 = (s - rd * c) * e
    if sign == "direct":
        factor = rdd - rd * rd - 1.0
    elif sign == "flipped":
        factor = rd * rd + 1.0 - rdd
    else:
        raise ValueError(f"sign must be 'direct' or 'flipped', got {sign!r}")
    return p1, p2, factor * e * e * s * c
