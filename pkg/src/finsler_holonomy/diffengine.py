"""Derivative slots of scalar programs ``f(x, y)`` and a finite-difference oracle.

:func:`lift_eval` runs the program once on a truncated Taylor jet in the 2n
variables ``(x, y)``; the slots are read off its coefficients.
:func:`fd_oracle` is independent of the jet code and only meant for testing.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import taylor as tj
from .errors import DegenerateInputError, DomainError
from .metrics import Y_EPS, MetricSpec, check_point


@dataclass(frozen=True)
class Jet:
    value: float
    dy: np.ndarray | None = None
    dyy: np.ndarray | None = None
    dyyy: np.ndarray | None = None
    dx: np.ndarray | None = None
    dxdy: np.ndarray | None = None  # dxdy[i, j] = d^2 f / dx^i dy^j
    dxdydy: np.ndarray | None = None  # dxdydy[i, j, k] = d^3 f / dx^i dy^j dy^k


@dataclass(frozen=True)
class OrderProfile:
    y: int = 3  # pure y-derivatives up to this order
    x: int = 1  # 0 or 1
    xy: int = 2  # y-order accompanying the single x-derivative


FULL = OrderProfile()


def _validate(x, y, spec: MetricSpec | None):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if spec is not None:
        return check_point(spec, x, y)
    if np.linalg.norm(y) <= Y_EPS:
        raise DegenerateInputError(f"|y| = {np.linalg.norm(y):.3e} is below {Y_EPS}")
    return x, y


def _multi(n: int, xs=(), ys=()) -> np.ndarray:
    alpha = np.zeros(2 * n, dtype=int)
    for i in xs:
        alpha[i] += 1
    for j in ys:
        alpha[n + j] += 1
    return alpha


def lift_eval(program: Callable, x, y, order: OrderProfile = FULL, spec: MetricSpec | None = None) -> Jet:
    """All requested derivative slots of ``program(x, y)`` at one point.

    ``spec`` (optional) validates the chart; otherwise only ``|y|`` is checked.
    """
    x, y = _validate(x, y, spec)
    n = len(x)
    top = max(order.y, order.x + order.xy if order.x else 0)
    z = tj.seed(np.concatenate([x, y]), top)
    f = program(z[:n], z[n:])
    if not isinstance(f, tj.Taylor):
        f = tj.Taylor.constant(f, 2 * n, top)
    if not np.isfinite(f.value).all():
        raise DomainError("program is not finite at this point")

    def slot(xs_count: int, ys_count: int):
        shape = (n,) * (xs_count + ys_count)
        out = np.empty(shape)
        for idx in itertools.product(range(n), repeat=xs_count + ys_count):
            out[idx] = f.partial(_multi(n, idx[:xs_count], idx[xs_count:]))
        return out

    return Jet(
        value=float(f.value),
        dy=slot(0, 1) if order.y >= 1 else None,
        dyy=slot(0, 2) if order.y >= 2 else None,
        dyyy=slot(0, 3) if order.y >= 3 else None,
        dx=slot(1, 0) if order.x >= 1 else None,
        dxdy=slot(1, 1) if order.x >= 1 and order.xy >= 1 else None,
        dxdydy=slot(1, 2) if order.x >= 1 and order.xy >= 2 else None,
    )


_STENCILS = {
    0: ((0,), (1.0,)),
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
}
_STEP = {1: 1e-4, 2: 1e-3, 3: 5e-3}


def _central(program, z0: np.ndarray, n: int, alpha: np.ndarray, h: float) -> float:
    grids = [_STENCILS[int(a)] for a in alpha]
    total = 0.0
    for combo in itertools.product(*[range(len(g[0])) for g in grids]):
        w = 1.0
        z = z0.copy()
        for var, pick in enumerate(combo):
            off, weights = grids[var]
            z[var] += off[pick] * h
            w *= weights[pick]
        if w:
            total += w * float(program(z[:n], z[n:]))
    return total / h ** int(alpha.sum())


def fd_oracle(program: Callable, x, y, multi_index, h: float | None = None, spec: MetricSpec | None = None) -> float:
    """Central-difference estimate of ``d^alpha f`` with one Richardson level.

    ``multi_index`` has length 2n (x-orders then y-orders).  The default step
    grows with the derivative order: 1e-4, 1e-3, 5e-3 times ``|y|``
    (derivatives of homogeneous programs scale with powers of ``|y|``).
    """
    x, y = _validate(x, y, spec)
    n = len(x)
    alpha = np.asarray(multi_index, dtype=int)
    if alpha.shape != (2 * n,) or alpha.min() < 0 or alpha.max() > 3:
        raise ValueError("multi_index must have length 2n with entries in 0..3")
    k = int(alpha.sum())
    z0 = np.concatenate([x, y])
    if k == 0:
        return float(program(x, y))
    if h is None:
        h = _STEP[min(k, 3)] * float(np.linalg.norm(y))
    d1 = _central(program, z0, n, alpha, h)
    d2 = _central(program, z0, n, alpha, h / 2)
    return (4.0 * d2 - d1) / 3.0
