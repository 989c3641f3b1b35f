"""Rank-4 independence certificates for surface holonomy.

At a point ``x0`` of a projectively flat surface of constant flag curvature
``lam`` the curvature field xi and its derivatives ``nabla_1 xi``,
``nabla_2 xi``, ``nabla_1 nabla_2 xi`` are multiples of xi by

    3,  9 P_1,  9 P_2,  3 (w P_1 P_2 - lam g_12)       (P_k = dP/dy^k at x0)

with ``w = 4`` (see :data:`PRODUCT_WEIGHT`).  Four such indicatrix fields are
linearly independent iff the functions ``1, P_1, P_2, w P_1 P_2 - lam g_12``
are, which is tested through the singular values of their Gram matrix on a
uniform angular grid.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

import numpy as np

from . import taylor as tj
from .errors import DomainError, FinslerError
from .profile import profile_from_function, strong_convexity_check

log = logging.getLogger(__name__)

# Differentiating nabla_W xi = 3 P_k W^k xi along Z yields
# 3 {P_{x^j y^k} - P P_{jk} + 3 P_j P_k} W^k Z^j xi; with the projective
# identity this is 3 (4 P_1 P_2 - lam g_12) xi for (W, Z) = (e_2, e_1).
PRODUCT_WEIGHT = 4.0
PRINTED_PRODUCT_WEIGHT = 2.0

DEFAULT_GRID = 256
MIN_GRID = 64
RANK_TOL = 1e-8
CERTIFY_GAP = 1e-6
HYPOTHESIS_TOL = 1e-8

VERDICT_CERTIFIED = "infinite-dimensional holonomy certified (numerically)"
VERDICT_VIOLATION = "hypothesis violation"
VERDICT_INCONCLUSIVE = "inconclusive"
VERDICT_DEGENERATE = "rank deficient: not certified"


@dataclass(frozen=True)
class PointwiseData:
    """``F(x0, .)`` and ``P(x0, .)`` as programs on (batched) vectors or jets."""

    F0: Callable
    P0: Callable
    lam: float | None = None
    n: int = 2
    source: Any = field(default=None, compare=False)
    x0: tuple[float, ...] | None = None


@dataclass(frozen=True)
class IndicatrixFunctionSample:
    grid: np.ndarray
    values: np.ndarray
    label: str = "f"

    def __post_init__(self):
        N = len(self.grid)
        if N < MIN_GRID:
            raise ValueError(f"indicatrix samples need at least {MIN_GRID} points, got {N}")
        if self.values.shape != (N,):
            raise ValueError("values must match the grid")
        if not np.allclose(self.grid, uniform_grid(N), rtol=0.0, atol=1e-12):
            raise ValueError("grid is not uniform on [0, 2pi)")


def uniform_grid(N: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(N) / N


def sample(fn: Callable[[np.ndarray], np.ndarray], N: int = DEFAULT_GRID, label: str = "f") -> IndicatrixFunctionSample:
    t = uniform_grid(N)
    return IndicatrixFunctionSample(t, np.broadcast_to(np.asarray(fn(t), float), t.shape).copy(), label)


@dataclass(frozen=True)
class GramCertificate:
    singular_values: np.ndarray
    rank: int
    rel_gap: float
    grid_size: int
    tolerance: float
    verdict: str  # certified-independent | degenerate | inconclusive


def gram_rank(samples, tolerance: float = RANK_TOL, certify_gap: float = CERTIFY_GAP) -> GramCertificate:
    """Singular values of ``M_ij = (1/N) sum_k f_i(t_k) f_j(t_k)``."""
    samples = list(samples)
    grid = samples[0].grid
    for s in samples[1:]:
        if s.grid.shape != grid.shape or np.any(s.grid != grid):
            raise ValueError("samples are on different grids")
    A = np.array([s.values for s in samples])
    M = A @ A.T / len(grid)
    sv = np.linalg.svd(M, compute_uv=False)
    top = sv[0]
    if top == 0.0:
        return GramCertificate(sv, 0, 0.0, len(grid), tolerance, "degenerate")
    rel = float(sv[-1] / top)
    rank = int(np.sum(sv > tolerance * top))
    if rel > certify_gap:
        verdict = "certified-independent"
    elif rel <= tolerance:
        verdict = "degenerate"
    else:
        verdict = "inconclusive"
    return GramCertificate(sv, rank, rel, len(grid), tolerance, verdict)


def _unit_jets(N: int, order: int = 2):
    t = uniform_grid(N)
    return t, tj.seed(np.array([np.cos(t), np.sin(t)]), order)


def _pointwise_derivatives(data: PointwiseData, N: int):
    """P, P_1, P_2, g_12 and F-derivatives on the unit circle."""
    t, Y = _unit_jets(N)
    P = data.P0(Y)
    F = data.F0(Y)
    F2 = F * F
    if not isinstance(P, tj.Taylor):  # constant programs
        P = tj.Taylor.constant(np.broadcast_to(P, t.shape), 2, 2)
    out = {
        "t": t,
        "P": P.value,
        "P1": P.partial((1, 0)),
        "P2": P.partial((0, 1)),
        "F": F.value,
        "F1": F.partial((1, 0)),
        "F2": F.partial((0, 1)),
        "F12": F.partial((1, 1)),
        "g11": 0.5 * F2.partial((2, 0)),
        "g12": 0.5 * F2.partial((1, 1)),
        "g22": 0.5 * F2.partial((0, 2)),
    }
    return {k: np.broadcast_to(v, t.shape).astype(float) for k, v in out.items()}


def independence_quadruple(
    data: PointwiseData, condition: str = "general", lam: float | None = None, N: int = DEFAULT_GRID,
    product_weight: float = PRODUCT_WEIGHT,
) -> list[IndicatrixFunctionSample]:
    """The four functions whose independence certifies the four holonomy fields.

    ``A`` uses ``{1, P_1, P_2, P_1 P_2}`` (g_12 is constant for a scalar
    product).  ``B`` writes ``P = c F`` with c fitted by least squares, giving
    ``(w c^2 - lam) F_1 F_2 - lam F F_12`` in the last slot.
    """
    if data.n != 2:
        raise ValueError("independence quadruples live on surfaces; restrict to a plane first")
    lam = data.lam if lam is None else lam
    d = _pointwise_derivatives(data, N)
    t = d["t"]
    one = np.ones_like(t)
    cond = condition.upper() if condition != "general" else condition
    if cond == "A":
        fourth = d["P1"] * d["P2"]
        funcs = [one, d["P1"], d["P2"], fourth]
    elif cond == "B":
        if lam is None:
            raise ValueError("condition B needs lambda")
        c = _fit_proportionality(d["P"], d["F"])[0]
        fourth = (product_weight * c * c - lam) * d["F1"] * d["F2"] - lam * d["F"] * d["F12"]
        funcs = [one, c * d["F1"], c * d["F2"], fourth]
    elif cond in ("general", "C"):
        if lam is None:
            raise ValueError("the general quadruple needs lambda")
        fourth = product_weight * d["P1"] * d["P2"] - lam * d["g12"]
        funcs = [one, d["P1"], d["P2"], fourth]
    else:
        raise ValueError(f"unknown condition {condition!r}")
    labels = ["1", "P_1", "P_2", "fourth"]
    return [IndicatrixFunctionSample(t, f, lab) for f, lab in zip(funcs, labels)]


def independence_quadruple_C(a, lam: float, sign: int = 1, N: int = DEFAULT_GRID) -> list[IndicatrixFunctionSample]:
    """Trigonometric quadruple ``{1, cos, sin, (1-lam) cs -/+ (a1 c + a2 s) cs}``."""
    a = np.asarray(a, float)
    if a @ a >= 1.0:
        raise DomainError("|a| must be below 1")
    t = uniform_grid(N)
    c, s = np.cos(t), np.sin(t)
    fourth = (1.0 - lam) * c * s - sign * (a[0] * c + a[1] * s) * c * s
    return [
        IndicatrixFunctionSample(t, np.ones_like(t), "1"),
        IndicatrixFunctionSample(t, c, "cos"),
        IndicatrixFunctionSample(t, s, "sin"),
        IndicatrixFunctionSample(t, fourth, "fourth"),
    ]


# hypotheses ---------------------------------------------------------------


@dataclass(frozen=True)
class Hypothesis:
    name: str
    passed: bool
    residual: float | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "pass": bool(self.passed), "residual": self.residual, "detail": self.detail}


def _fit_proportionality(P: np.ndarray, F: np.ndarray) -> tuple[float, float]:
    c = float(P @ F / (F @ F))
    return c, float(np.max(np.abs(P - c * F)) / np.max(np.abs(F)))


def _values(fn, N: int, flip: bool = False, scale: float = 1.0) -> np.ndarray:
    t = uniform_grid(N)
    u = np.array([np.cos(t), np.sin(t)]) * scale
    if flip:
        u = -u
    return np.broadcast_to(np.asarray(fn(u), float), t.shape).astype(float)


def _homogeneity(fn, N: int, name: str) -> Hypothesis:
    v1 = _values(fn, N)
    v2 = _values(fn, N, scale=2.5)
    res = float(np.max(np.abs(v2 - 2.5 * v1)) / max(np.max(np.abs(v1)), 1e-300))
    return Hypothesis(f"{name} positively 1-homogeneous", res <= 1e-10, res)


def _lambda_nonzero(lam) -> Hypothesis:
    if lam is None:
        return Hypothesis("constant curvature lambda != 0", False, None, "lambda not supplied")
    return Hypothesis("constant curvature lambda != 0", abs(lam) > 0.0, float(abs(lam)))


def _strongly_convex(fn, name: str) -> Hypothesis:
    try:
        rep = strong_convexity_check(profile_from_function(fn, name))
    except DomainError as exc:
        return Hypothesis(f"{name} strongly convex", False, None, str(exc))
    return Hypothesis(f"{name} strongly convex", rep.verdict == "strongly-convex", rep.min_abs_kappa / rep.max_abs_kappa, rep.verdict)


def _hypotheses_A(data: PointwiseData, lam, N: int) -> list[Hypothesis]:
    d = _pointwise_derivatives(data, N)
    g = np.array([d["g11"], d["g12"], d["g22"]])
    res = float(np.max(np.abs(g - g[:, :1])) / np.max(np.abs(g)))
    return [
        _lambda_nonzero(lam),
        _homogeneity(data.F0, N, "F(x0,.)"),
        _homogeneity(data.P0, N, "P(x0,.)"),
        Hypothesis("F(x0,.) induces a scalar product", res <= HYPOTHESIS_TOL, res),
        _strongly_convex(data.P0, "P(x0,.)"),
    ]


def _hypotheses_B(data: PointwiseData, lam, N: int) -> list[Hypothesis]:
    F = _values(data.F0, N)
    P = _values(data.P0, N)
    Fm = _values(data.F0, N, flip=True)
    sym = float(np.max(np.abs(F - Fm)) / np.max(np.abs(F)))
    c, res = _fit_proportionality(P, F)
    return [
        _lambda_nonzero(lam),
        _homogeneity(data.F0, N, "F(x0,.)"),
        _homogeneity(data.P0, N, "P(x0,.)"),
        _strongly_convex(data.F0, "F(x0,.)"),
        Hypothesis("F(x0,.) absolutely homogeneous", sym <= 1e-10, sym),
        Hypothesis("P(x0,.) = c F(x0,.)", res <= HYPOTHESIS_TOL, res, f"c = {c:.17g}"),
        Hypothesis("c != 0", abs(c) > HYPOTHESIS_TOL, abs(c)),
    ]


def fit_randers_form(data: PointwiseData, N: int = DEFAULT_GRID) -> tuple[np.ndarray, int, float]:
    """Recover ``(a, sign)`` with ``F0 = |y| +/- <a,y>``, ``P0 = (+/-|y| - <a,y>)/2``.

    Returns ``(a, sign, residual)`` where the residual is the worse of the two fits.
    """
    t = uniform_grid(N)
    u = np.array([np.cos(t), np.sin(t)])
    F = _values(data.F0, N)
    P = _values(data.P0, N)
    b, *_ = np.linalg.lstsq(u.T, F - 1.0, rcond=None)  # b = sign * a
    resF = float(np.max(np.abs(1.0 + b @ u - F)))
    best = None
    for sign in (1, -1):
        a = sign * b
        resP = float(np.max(np.abs(0.5 * (sign - a @ u) - P)))
        if best is None or resP < best[2]:
            best = (a, sign, resP)
    a, sign, resP = best
    return a, sign, max(resF, resP)


def _hypotheses_C(data: PointwiseData, lam, N: int):
    a, sign, res = fit_randers_form(data, N)
    return [
        _lambda_nonzero(lam),
        Hypothesis("F(0,y) = |y| +/- <a,y>, P(0,y) = (+/-|y| - <a,y>)/2", res <= HYPOTHESIS_TOL, res,
                   f"a = {a.tolist()}, sign = {sign:+d}"),
        Hypothesis("|a| < 1", float(np.linalg.norm(a)) < 1.0, float(np.linalg.norm(a))),
    ], a, sign


# certification -------------------------------------------------------------


@dataclass
class CertificationReport:
    condition: str
    hypotheses: list[Hypothesis]
    singular_values: list[float]
    rank: int | None
    rel_gap: float | None
    grid: dict
    verdict: str
    product_weight: float
    tolerance: float
    notes: list[str] = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.verdict == VERDICT_CERTIFIED

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hypotheses"] = [h.to_dict() for h in self.hypotheses]
        return d


def _as_data(obj, x0=None) -> PointwiseData:
    if isinstance(obj, PointwiseData):
        return obj
    from .metrics import pointwise_data

    return pointwise_data(obj, x0)


def certify(
    obj, condition: str, lam: float | None = None, N: int = DEFAULT_GRID, tolerance: float = RANK_TOL,
    product_weight: float = PRODUCT_WEIGHT, x0=None,
) -> CertificationReport:
    """Check the hypotheses of ``condition`` and run the rank-4 test at N and 2N."""
    condition = condition.upper()
    if condition not in ("A", "B", "C"):
        raise ValueError(f"condition must be A, B or C, got {condition!r}")
    data = _as_data(obj, x0)
    lam = data.lam if lam is None else lam
    notes = []
    if data.n != 2:
        h = [Hypothesis("surface (n = 2)", False, None, "restrict to a 2-plane first")]
        return CertificationReport(condition, h, [], None, None, {"N": N, "doubled_N_consistent": None},
                                   VERDICT_VIOLATION, product_weight, tolerance)
    try:
        if condition == "A":
            hyps = _hypotheses_A(data, lam, N)
        elif condition == "B":
            hyps = _hypotheses_B(data, lam, N)
        else:
            hyps, a, sign = _hypotheses_C(data, lam, N)
            notes.append(f"fitted a = {[float(v) for v in a]}, sign = {sign:+d}")
    except (FinslerError, FloatingPointError, ZeroDivisionError) as exc:
        hyps = [Hypothesis("evaluation", False, None, str(exc))]

    if lam is None:
        lam_q = 0.0
    else:
        lam_q = lam
    try:
        cert = gram_rank(independence_quadruple(data, condition, lam_q, N, product_weight), tolerance)
        cert2 = gram_rank(independence_quadruple(data, condition, lam_q, 2 * N, product_weight), tolerance)
    except (FinslerError, ValueError) as exc:
        hyps.append(Hypothesis("quadruple evaluation", False, None, str(exc)))
        return CertificationReport(condition, hyps, [], None, None, {"N": N, "doubled_N_consistent": None},
                                   VERDICT_VIOLATION, product_weight, tolerance, notes)
    stable = cert.verdict == cert2.verdict
    grid = {"N": N, "doubled_N_consistent": bool(stable)}
    if not all(h.passed for h in hyps):
        verdict = VERDICT_VIOLATION
    elif not stable or cert.verdict == "inconclusive":
        verdict = VERDICT_INCONCLUSIVE
    elif cert.verdict == "certified-independent" and cert.rank == 4:
        verdict = VERDICT_CERTIFIED
    else:
        verdict = VERDICT_DEGENERATE
    log.info("certify %s: rel_gap %.3e verdict %s", condition, cert.rel_gap, verdict)
    return CertificationReport(
        condition, hyps, [float(v) for v in cert.singular_values], cert.rank, cert.rel_gap, grid, verdict,
        product_weight, tolerance, notes,
    )
