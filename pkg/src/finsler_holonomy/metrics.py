"""Catalog of Finsler metric families.

Every family exposes the Finsler function ``F(x, y)`` and, where it is
projectively flat in the given chart, the projective factor ``P(x, y)`` with
geodesic coefficients ``G^i = P y^i``.  Programs are written once and run on
floats, batched arrays of shape ``(n, ...)`` and :class:`~.taylor.Taylor` jets.

Pointwise families only carry data on ``T_0 M`` and reject ``x != 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable

import numpy as np

from . import taylor as tj
from .errors import DegenerateInputError, DomainError, MetricDegeneracyError, PointwiseFamilyError
from .profile import PolarProfile, fourier_profile

FAMILIES = (
    "Euclidean",
    "Klein",
    "RandersShen",
    "BryantShenPointwise",
    "PolarProfilePointwise",
    "CustomPointwise",
)
GLOBAL_FAMILIES = frozenset({"Euclidean", "Klein", "RandersShen"})
BALL_FAMILIES = frozenset({"Klein", "RandersShen"})

CHART_MARGIN = 1e-6
Y_EPS = 1e-12


# -- pointwise building blocks ---------------------------------------------


@dataclass(frozen=True)
class NormLinear:
    """``y -> scale * sqrt(y^T A y) + <linear, y>`` (``A`` defaults to identity)."""

    scale: float = 1.0
    linear: tuple[float, ...] = ()
    matrix: tuple[tuple[float, ...], ...] | None = None

    def __call__(self, y):
        n = len(y)
        if self.matrix is None:
            quad = tj.dot(y, y)
        else:
            A = np.asarray(self.matrix, dtype=float)
            quad = sum(A[i, j] * y[i] * y[j] for i in range(n) for j in range(n))
        out = self.scale * tj.sqrt(quad)
        if self.linear:
            b = np.asarray(self.linear, dtype=float)
            out = out + sum(b[i] * y[i] for i in range(n))
        return out

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"type": "norm_linear", "scale": self.scale, "linear": list(self.linear)}
        if self.matrix is not None:
            d["matrix"] = [list(r) for r in self.matrix]
        return d


@dataclass(frozen=True)
class ProfileFunction:
    """``y -> exp(-r(t)) |y|`` on R^2."""

    profile: PolarProfile

    def __call__(self, y):
        return self.profile.function()(y)

    def to_dict(self) -> dict:
        return {"type": "profile", "fourier": self.profile.spec}


def pointwise_function_from_dict(d: dict, n: int):
    kind = d.get("type", "norm_linear")
    if kind == "norm_linear":
        linear = tuple(float(v) for v in d.get("linear", [0.0] * n))
        if len(linear) != n:
            raise ValueError(f"linear part has length {len(linear)}, expected {n}")
        matrix = d.get("matrix")
        if matrix is not None:
            matrix = tuple(tuple(float(v) for v in row) for row in matrix)
        return NormLinear(float(d.get("scale", 1.0)), linear, matrix)
    if kind == "profile":
        if n != 2:
            raise ValueError("profile functions are only defined for n = 2")
        return ProfileFunction(profile_from_dict(d["fourier"]))
    raise ValueError(f"unknown pointwise function type {kind!r}")


def profile_from_dict(d: dict) -> PolarProfile:
    return fourier_profile(float(d.get("c0", 0.0)), d.get("cos", ()), d.get("sin", ()))


# -- the spec ----------------------------------------------------------------


@dataclass(frozen=True)
class MetricSpec:
    family: str
    n: int = 2
    a: tuple[float, ...] = ()
    sign: int = 1
    alpha: float = 0.0
    c: float | None = None
    lam: float | None = None
    profile_F: PolarProfile | None = None
    profile_P: PolarProfile | None = None
    F0: Callable | None = None
    P0: Callable | None = None
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.n < 2:
            raise ValueError(f"dimension must be at least 2, got {self.n}")
        if self.family == "RandersShen":
            if len(self.a) != self.n:
                raise ValueError(f"RandersShen needs a vector a of length {self.n}")
            if math.hypot(*self.a) >= 1.0:
                raise ValueError("RandersShen needs |a| < 1")
            if self.sign not in (1, -1):
                raise ValueError("sign must be +1 or -1")
        if self.family == "BryantShenPointwise" and not abs(self.alpha) < math.pi / 2:
            raise ValueError("BryantShenPointwise needs |alpha| < pi/2")
        if self.family == "PolarProfilePointwise":
            if self.n != 2:
                raise ValueError("PolarProfilePointwise is only defined for n = 2")
            if self.profile_F is None or self.profile_P is None:
                raise ValueError("PolarProfilePointwise needs profile_F and profile_P")
        if self.family == "CustomPointwise" and (self.F0 is None or self.P0 is None):
            raise ValueError("CustomPointwise needs F0 and P0")

    @property
    def is_pointwise(self) -> bool:
        return self.family not in GLOBAL_FAMILIES

    @property
    def flag_curvature(self) -> float | None:
        """The known constant flag curvature, if any."""
        if self.lam is not None:
            return self.lam
        return {"Euclidean": 0.0, "Klein": -1.0, "RandersShen": -0.25, "BryantShenPointwise": 1.0}.get(self.family)

    # programs; no chart checks here, they run on jets as well
    def F(self, x, y):
        fam = self.family
        if fam == "Euclidean":
            return tj.norm(y)
        if fam == "Klein":
            return _klein_F(x, y)
        if fam == "RandersShen":
            return _randers_F(x, y, np.asarray(self.a), self.sign)
        if fam == "BryantShenPointwise":
            return math.cos(self.alpha) * tj.norm(y)
        if fam == "PolarProfilePointwise":
            return self.profile_F.function()(y)
        return self.F0(y)

    def P(self, x, y):
        fam = self.family
        if fam == "Euclidean":
            return 0.0 * y[0]
        if fam == "Klein":
            xx = tj.dot(x, x)
            return tj.dot(x, y) / (1.0 - xx)
        if fam == "RandersShen":
            return _randers_P(x, y, np.asarray(self.a), self.sign)
        if fam == "BryantShenPointwise":
            return math.sin(self.alpha) * tj.norm(y)
        if fam == "PolarProfilePointwise":
            return self.profile_P.function()(y)
        return self.P0(y)

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"family": self.family, "n": self.n}
        if self.family == "RandersShen":
            d.update(a=list(self.a), sign=self.sign)
        if self.family == "BryantShenPointwise":
            d["alpha"] = self.alpha
        if self.family == "PolarProfilePointwise":
            d["profile"] = {"F": self.profile_F.spec, "P": self.profile_P.spec}
        if self.family == "CustomPointwise":
            d["F0"] = self.F0.to_dict()
            d["P0"] = self.P0.to_dict()
        if self.c is not None:
            d["c"] = self.c
        if self.lam is not None:
            d["lambda"] = self.lam
        return d


def _klein_F(x, y):
    xx = tj.dot(x, x)
    yy = tj.dot(y, y)
    xy = tj.dot(x, y)
    return tj.sqrt(yy - (xx * yy - xy * xy)) / (1.0 - xx)


def _randers_F(x, y, a, sign):
    xx = tj.dot(x, x)
    yy = tj.dot(y, y)
    xy = tj.dot(x, y)
    ay = sum(a[i] * y[i] for i in range(len(a)))
    ax = sum(a[i] * x[i] for i in range(len(a)))
    root = tj.sqrt(yy - (xx * yy - xy * xy))
    return root / (1.0 - xx) + sign * (xy / (1.0 - xx) + ay / (1.0 + ax))


def _randers_P(x, y, a, sign):
    xx = tj.dot(x, x)
    yy = tj.dot(y, y)
    xy = tj.dot(x, y)
    ay = sum(a[i] * y[i] for i in range(len(a)))
    ax = sum(a[i] * x[i] for i in range(len(a)))
    root = tj.sqrt(yy - (xx * yy - xy * xy))
    return 0.5 * ((sign * root + xy) / (1.0 - xx) - ay / (1.0 + ax))


# -- constructors ------------------------------------------------------------


def euclidean(n: int = 2) -> MetricSpec:
    return MetricSpec("Euclidean", n)


def klein(n: int = 2) -> MetricSpec:
    return MetricSpec("Klein", n)


def randers_shen(a, sign: int = 1) -> MetricSpec:
    a = tuple(float(v) for v in a)
    return MetricSpec("RandersShen", len(a), a=a, sign=int(sign))


def bryant_shen(alpha: float, n: int = 2, lam: float = 1.0) -> MetricSpec:
    return MetricSpec("BryantShenPointwise", n, alpha=float(alpha), c=math.tan(alpha), lam=lam)


def polar_profile_metric(profile_F: PolarProfile, profile_P: PolarProfile, lam: float) -> MetricSpec:
    return MetricSpec("PolarProfilePointwise", 2, profile_F=profile_F, profile_P=profile_P, lam=lam)


def custom_pointwise(F0: Callable, P0: Callable, n: int = 2, lam: float | None = None) -> MetricSpec:
    return MetricSpec("CustomPointwise", n, F0=F0, P0=P0, lam=lam)


def spec_from_dict(d: dict) -> MetricSpec:
    """Build a spec from the JSON metric-file schema."""
    if not isinstance(d, dict) or "family" not in d:
        raise ValueError("metric spec must be an object with a 'family' field")
    fam = d["family"]
    lam = d.get("lambda")
    lam = None if lam is None else float(lam)
    c = d.get("c")
    c = None if c is None else float(c)
    if fam == "RandersShen":
        a = tuple(float(v) for v in d["a"])
        n = int(d.get("n", len(a)))
        if n != len(a):
            raise ValueError(f"n={n} does not match len(a)={len(a)}")
        return MetricSpec(fam, n, a=a, sign=int(d.get("sign", 1)), lam=lam, c=c)
    n = int(d.get("n", 2))
    if fam in ("Euclidean", "Klein"):
        return MetricSpec(fam, n, lam=lam, c=c)
    if fam == "BryantShenPointwise":
        alpha = float(d["alpha"])
        return MetricSpec(fam, n, alpha=alpha, c=math.tan(alpha) if c is None else c, lam=1.0 if lam is None else lam)
    if fam == "PolarProfilePointwise":
        prof = d["profile"]
        return MetricSpec(
            fam, 2, profile_F=profile_from_dict(prof["F"]), profile_P=profile_from_dict(prof["P"]), lam=lam, c=c
        )
    if fam == "CustomPointwise":
        return MetricSpec(
            fam, n, F0=pointwise_function_from_dict(d["F0"], n), P0=pointwise_function_from_dict(d["P0"], n), lam=lam, c=c
        )
    raise ValueError(f"unknown family {fam!r}")


# -- checks ------------------------------------------------------------------


def check_point(spec: MetricSpec, x, y) -> tuple[np.ndarray, np.ndarray]:
    """Validate a chart point; returns float arrays of shape (n, ...)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[0] != spec.n or y.shape[0] != spec.n:
        raise ValueError(f"expected vectors of length {spec.n}")
    ynorm = np.sqrt((y * y).sum(axis=0))
    if np.any(ynorm <= Y_EPS):
        raise DegenerateInputError(f"|y| must exceed {Y_EPS}")
    if spec.is_pointwise and np.any(x != 0.0):
        raise PointwiseFamilyError(f"{spec.family} is only defined at x = 0")
    if spec.family in BALL_FAMILIES:
        xnorm = np.sqrt((x * x).sum(axis=0))
        if np.any(xnorm > 1.0 - CHART_MARGIN):
            raise DomainError(f"{spec.family} requires |x| <= 1 - {CHART_MARGIN}, got |x| = {np.max(xnorm)}")
    if x.ndim < y.ndim:
        x = x.reshape(x.shape + (1,) * (y.ndim - x.ndim))
    return x, y


def finsler_value(spec: MetricSpec, x, y):
    x, y = check_point(spec, x, y)
    value = np.asarray(spec.F(x, y), dtype=float)
    if np.any(value <= 0.0):
        raise DomainError("Finsler function is not positive at the given point")
    return value[()] if value.ndim == 0 else value


def metric_tensor(spec: MetricSpec, x, y, check: bool = True) -> np.ndarray:
    """``g_ij = 1/2 d^2 F^2 / dy^i dy^j``."""
    x, y = check_point(spec, x, y)
    jet = tj.seed(y, 2)
    F = spec.F(x, jet)
    g = np.empty((spec.n, spec.n) + y.shape[1:])
    F2 = F * F
    for i in range(spec.n):
        for j in range(spec.n):
            alpha = np.zeros(spec.n, dtype=int)
            alpha[i] += 1
            alpha[j] += 1
            g[i, j] = 0.5 * F2.partial(alpha)
    if check:
        gm = np.moveaxis(g, (0, 1), (-2, -1))
        eig = np.linalg.eigvalsh(gm)
        if np.any(eig <= 0.0):
            raise MetricDegeneracyError(f"metric tensor not positive definite (min eigenvalue {eig.min():.3e})")
    return g


def projective_factor(spec: MetricSpec, x, y, method: str = "auto"):
    """``P(x, y)``: closed form, or ``(1/2F) dF/dx^i y^i`` by jets.

    ``method`` is ``"closed"``, ``"derived"`` or ``"auto"`` (closed when the
    family has one).  Pointwise families return their ``P0`` data.
    """
    x, y = check_point(spec, x, y)
    if spec.is_pointwise:
        return np.asarray(spec.P(x, y), dtype=float)[()]
    if method in ("closed", "auto"):
        return np.asarray(spec.P(x, y), dtype=float)[()]
    if method != "derived":
        raise ValueError(f"unknown method {method!r}")
    n = spec.n
    z = tj.seed(np.concatenate([x, y]), 1)
    F = spec.F(z[:n], y)
    Fx_y = sum(F.partial(np.eye(n, dtype=int)[i]) * y[i] for i in range(n))
    return (Fx_y / (2.0 * F.value))[()]


@dataclass(frozen=True)
class HomogeneityReport:
    max_euler_residual: float
    max_scaling_residual: float
    reversible: bool
    max_reversal_gap: float


def check_homogeneity(spec: MetricSpec, samples) -> HomogeneityReport:
    """Euler-relation and scaling residuals of F over ``samples`` of (x, y).

    Also reports whether F is absolutely homogeneous (``F(x,-y) = F(x,y)``).
    """
    euler = scaling = gap = 0.0
    for x, y in samples:
        x, y = check_point(spec, x, y)
        jet = spec.F(x, tj.seed(y, 1))
        value = float(jet.value)
        grad = jet.coef[1 : spec.n + 1]
        euler = max(euler, abs(float(grad @ y) - value) / abs(value))
        scaling = max(scaling, abs(float(spec.F(x, 2.5 * y)) - 2.5 * value) / abs(value))
        gap = max(gap, abs(float(spec.F(x, -y)) - value) / abs(value))
    return HomogeneityReport(euler, scaling, gap <= 1e-12, gap)


def pointwise_data(spec: MetricSpec, x0=None):
    """The functions ``F(x0, .)`` and ``P(x0, .)`` as 1-homogeneous programs."""
    from .independence import PointwiseData

    x0 = np.zeros(spec.n) if x0 is None else np.asarray(x0, dtype=float)
    if spec.is_pointwise and np.any(x0 != 0.0):
        raise PointwiseFamilyError(f"{spec.family} is only defined at x = 0")

    def xb(y):
        # broadcast x0 against batched y
        nd = y.ndim if not isinstance(y, tj.Taylor) else y.ndim
        return x0.reshape((spec.n,) + (1,) * (nd - 1))

    return PointwiseData(
        F0=lambda y: spec.F(xb(y), y),
        P0=lambda y: spec.P(xb(y), y),
        lam=spec.flag_curvature,
        n=spec.n,
        source=spec,
        x0=tuple(float(v) for v in x0),
    )


def with_lambda(spec: MetricSpec, lam: float) -> MetricSpec:
    return replace(spec, lam=lam)
