"""Homogeneous (nonlinear) parallel transport and loop holonomy.

A vector field X(t) along c(t) is parallel when
``dX^i/dt + G^i_j(c, X) c'^j = 0``.  For projectively flat families
``G^i_j c'^j = (dP/dy^j c'^j) X^i + P c'^i``, so each right-hand side needs
only P and one directional derivative, taken with a one-variable jet.
Batches of vectors (shape ``(n, B)``) are transported as one ODE system.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import RK45

from . import taylor as tj
from .errors import CollapseError, SamplingError, StepFailureError
from .metrics import MetricSpec, check_point

log = logging.getLogger(__name__)

RTOL = 1e-10
ATOL = 1e-12
REPROJECTION_LIMIT = 1e-6


@dataclass(frozen=True)
class Piece:
    c: Callable[[float], np.ndarray]
    cdot: Callable[[float], np.ndarray]


@dataclass(frozen=True)
class Path:
    """Piecewise-smooth curve; each piece is parametrized on [0, 1]."""

    pieces: tuple[Piece, ...]

    @property
    def start(self) -> np.ndarray:
        return np.asarray(self.pieces[0].c(0.0), float)

    @property
    def end(self) -> np.ndarray:
        return np.asarray(self.pieces[-1].c(1.0), float)

    def sample(self, per_piece: int = 16) -> np.ndarray:
        pts = [np.asarray(p.c(s), float) for p in self.pieces for s in np.linspace(0.0, 1.0, per_piece)]
        return np.array(pts).T


def polygon(vertices: Sequence[Sequence[float]]) -> Path:
    verts = [np.asarray(v, float) for v in vertices]
    pieces = []
    for p, q in zip(verts[:-1], verts[1:]):
        d = q - p
        pieces.append(Piece(lambda s, p=p, d=d: p + s * d, lambda s, d=d: d))
    return Path(tuple(pieces))


def square_loop(x0, side: float, plane: tuple[int, int] = (0, 1)) -> Path:
    """Counter-clockwise square in a coordinate plane with one corner at x0."""
    x0 = np.asarray(x0, float)
    e1 = np.zeros_like(x0)
    e2 = np.zeros_like(x0)
    e1[plane[0]] = side
    e2[plane[1]] = side
    return polygon([x0, x0 + e1, x0 + e1 + e2, x0 + e2, x0])


def circle_loop(x0, radius: float, plane: tuple[int, int] = (0, 1)) -> Path:
    """Circle through x0, centred at x0 - radius * e_plane[0]."""
    x0 = np.asarray(x0, float)
    u = np.zeros_like(x0)
    v = np.zeros_like(x0)
    u[plane[0]] = 1.0
    v[plane[1]] = 1.0
    centre = x0 - radius * u
    w = 2.0 * np.pi

    def c(s):
        return centre + radius * (np.cos(w * s) * u + np.sin(w * s) * v)

    def cdot(s):
        return radius * w * (-np.sin(w * s) * u + np.cos(w * s) * v)

    return Path((Piece(c, cdot),))


def constant_loop(x0) -> Path:
    x0 = np.asarray(x0, float)
    return Path((Piece(lambda s: x0, lambda s: np.zeros_like(x0)),))


@dataclass(frozen=True)
class TransportResult:
    y_end: np.ndarray
    F_drift: float
    steps: int
    rejected_steps: int


def _rhs_factory(spec: MetricSpec, piece: Piece, shape):
    n = shape[0]
    counter = [0]

    def rhs(t, flat):
        counter[0] += 1
        X = flat.reshape(shape)
        c = np.asarray(piece.c(t), float).reshape((n,) + (1,) * (len(shape) - 1))
        cd = np.asarray(piece.cdot(t), float).reshape((n,) + (1,) * (len(shape) - 1))
        P = spec.P(c, tj.directional_seed(X, np.broadcast_to(cd, shape), 1))
        p0, p1 = P.coef[0], P.coef[1]
        return (-(p1 * X + p0 * cd)).ravel()

    return rhs, counter


def _F(spec: MetricSpec, x, Y):
    x = np.asarray(x, float).reshape((spec.n,) + (1,) * (Y.ndim - 1))
    return np.asarray(spec.F(x, Y), float)


def parallel_transport(spec: MetricSpec, path: Path, y0, rtol: float = RTOL, atol: float = ATOL) -> TransportResult:
    """Transport ``y0`` (shape (n,) or (n, B)) along ``path``."""
    y0 = np.asarray(y0, float)
    pts = path.sample()
    for k in range(pts.shape[1]):
        check_point(spec, pts[:, k], np.ones(spec.n))
    check_point(spec, path.start, y0)
    shape = y0.shape
    F0 = _F(spec, path.start, y0)
    ynorm0 = np.sqrt((y0 * y0).sum(axis=0))
    X = y0.copy()
    drift = 0.0
    steps = rejected = 0
    for piece in path.pieces:
        speed = np.linalg.norm(piece.cdot(0.0)) + np.linalg.norm(piece.cdot(0.5))
        if speed == 0.0:
            continue
        rhs, counter = _rhs_factory(spec, piece, shape)
        solver = RK45(rhs, 0.0, X.ravel(), 1.0, rtol=rtol, atol=atol)
        piece_steps = 0
        while solver.status == "running":
            msg = solver.step()
            if solver.status == "failed":
                raise StepFailureError(f"transport step failed: {msg}")
            piece_steps += 1
            Xs = solver.y.reshape(shape)
            norms = np.sqrt((Xs * Xs).sum(axis=0))
            if np.any(norms < 1e-12 * ynorm0):
                raise CollapseError(f"transported vector collapsed at t={solver.t:.6g}")
            Ft = _F(spec, piece.c(solver.t), Xs)
            drift = max(drift, float(np.max(np.abs(Ft / F0 - 1.0))))
        steps += piece_steps
        rejected += max(0, (counter[0] - 2) // 6 - piece_steps)
        X = solver.y.reshape(shape)
    return TransportResult(X, drift, steps, rejected)


def indicatrix_samples(spec: MetricSpec, x0, count: int = 64) -> np.ndarray:
    """Points on ``F(x0, .) = 1``: uniform angles for n = 2, a Fibonacci sphere otherwise."""
    n = spec.n
    if n == 2:
        t = 2.0 * np.pi * np.arange(count) / count
        u = np.array([np.cos(t), np.sin(t)])
    else:
        k = np.arange(count) + 0.5
        z = 1.0 - 2.0 * k / count
        phi = np.pi * (1.0 + 5**0.5) * k
        rho = np.sqrt(1.0 - z * z)
        u = np.zeros((n, count))
        u[0], u[1], u[2] = rho * np.cos(phi), rho * np.sin(phi), z
    return u / _F(spec, x0, u)


@dataclass(frozen=True)
class HolonomyMap:
    x0: np.ndarray
    inputs: np.ndarray  # (n, N) indicatrix points
    outputs: np.ndarray  # (n, N) their images, re-projected onto the indicatrix
    corrections: np.ndarray  # |F(x0, raw image) - 1| per sample
    valid: np.ndarray  # corrections within REPROJECTION_LIMIT
    F_drift: float


def loop_holonomy(spec: MetricSpec, loop: Path, samples=64, rtol: float = RTOL) -> HolonomyMap:
    """Transport indicatrix samples around a closed loop and re-project radially."""
    x0 = loop.start
    if np.max(np.abs(loop.end - x0)) > 1e-12:
        raise ValueError("loop is not closed")
    Y = indicatrix_samples(spec, x0, samples) if np.isscalar(samples) else np.asarray(samples, float)
    res = parallel_transport(spec, loop, Y, rtol=rtol)
    Fend = _F(spec, x0, res.y_end)
    corrections = np.abs(Fend - 1.0)
    out = res.y_end / Fend
    valid = corrections <= REPROJECTION_LIMIT
    log.info("holonomy re-projection: max correction %.3e", float(corrections.max()))
    if not np.all(valid):
        log.warning("%d samples exceed the re-projection limit", int((~valid).sum()))
    return HolonomyMap(x0, Y, out, corrections, valid, res.F_drift)


def nonlinearity_defect(hmap: HolonomyMap | tuple[np.ndarray, np.ndarray], min_samples: int = 32) -> float:
    """Max residual of the best least-squares linear fit, relative to max |y|."""
    if isinstance(hmap, HolonomyMap):
        Yin, Yout = hmap.inputs[:, hmap.valid], hmap.outputs[:, hmap.valid]
    else:
        Yin, Yout = (np.asarray(a, float) for a in hmap)
    if Yin.shape[1] < min_samples:
        raise SamplingError(f"need at least {min_samples} samples, got {Yin.shape[1]}")
    A, *_ = np.linalg.lstsq(Yin.T, Yout.T, rcond=None)
    resid = Yout - A.T @ Yin
    return float(np.max(np.linalg.norm(resid, axis=0)) / np.max(np.linalg.norm(Yin, axis=0)))
