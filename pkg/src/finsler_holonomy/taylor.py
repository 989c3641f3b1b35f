"""Truncated multivariate Taylor arithmetic.

A :class:`Taylor` holds the Taylor coefficients of a (tensor-valued) function
in ``nvars`` variables up to total degree ``order``.  Coefficients are stored
in a graded monomial ordering, so the coefficients of a lower-order jet are a
prefix of those of a higher-order one.  Arithmetic is exact up to rounding;
differentiating a jet with :meth:`Taylor.diff` drops one order.

Trailing tensor dimensions broadcast elementwise, which is how vectors of
jets, tensors of jets and batches of sample points are represented.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

__all__ = [
    "Taylor",
    "seed",
    "directional_seed",
    "sqrt",
    "exp",
    "log",
    "sin",
    "cos",
    "atan",
    "atan2",
    "power",
    "dot",
    "norm",
    "einsum",
]


# -- monomial tables -------------------------------------------------------


def _exponents(nvars: int, degree: int):
    for combo in itertools.combinations_with_replacement(range(nvars), degree):
        e = [0] * nvars
        for k in combo:
            e[k] += 1
        yield tuple(e)


@lru_cache(maxsize=None)
def monomials(nvars: int, order: int) -> np.ndarray:
    """Exponent table, graded by degree, descending lexicographic within a degree."""
    rows: list[tuple[int, ...]] = []
    for deg in range(order + 1):
        rows.extend(sorted(set(_exponents(nvars, deg)), reverse=True))
    return np.array(rows, dtype=np.int64).reshape(-1, nvars)


@lru_cache(maxsize=None)
def _size(nvars: int, order: int) -> int:
    return math.comb(nvars + order, order)


def _keys(exps: np.ndarray, base: int) -> np.ndarray:
    weights = base ** np.arange(exps.shape[-1], dtype=np.int64)
    return exps @ weights


@lru_cache(maxsize=None)
def _lookup(nvars: int, order: int):
    exps = monomials(nvars, order)
    keys = _keys(exps, order + 1)
    perm = np.argsort(keys)
    return keys[perm], perm


def _index_of(nvars: int, order: int, exps: np.ndarray) -> np.ndarray:
    sorted_keys, perm = _lookup(nvars, order)
    pos = np.searchsorted(sorted_keys, _keys(exps, order + 1))
    return perm[pos]


@lru_cache(maxsize=None)
def _mul_table(nvars: int, order: int):
    exps = monomials(nvars, order)
    deg = exps.sum(axis=1)
    a, b = np.nonzero(deg[:, None] + deg[None, :] <= order)
    c = _index_of(nvars, order, exps[a] + exps[b])
    perm = np.argsort(c, kind="stable")
    a, b, c = a[perm], b[perm], c[perm]
    starts = np.flatnonzero(np.r_[True, c[1:] != c[:-1]])
    return a, b, starts


@lru_cache(maxsize=None)
def _diff_table(nvars: int, order: int, var: int):
    low = monomials(nvars, order - 1)
    shifted = low.copy()
    shifted[:, var] += 1
    src = _index_of(nvars, order, shifted)
    factor = (low[:, var] + 1).astype(float)
    return src, factor


@lru_cache(maxsize=None)
def _factorials(nvars: int, order: int) -> np.ndarray:
    exps = monomials(nvars, order)
    f = np.array([math.prod(math.factorial(int(k)) for k in row) for row in exps], dtype=float)
    return f


# -- the jet type ----------------------------------------------------------


def _align(coef: np.ndarray, ndim: int) -> np.ndarray:
    """Insert unit axes after the coefficient axis so tensor parts right-align."""
    missing = ndim - (coef.ndim - 1)
    if missing <= 0:
        return coef
    return coef.reshape(coef.shape[:1] + (1,) * missing + coef.shape[1:])


class Taylor:
    __slots__ = ("coef", "nvars", "order")
    __array_ufunc__ = None  # make ndarray (op) Taylor defer to our reflected methods

    def __init__(self, coef, nvars: int, order: int):
        coef = np.asarray(coef, dtype=float)
        if coef.shape[0] != _size(nvars, order):
            raise ValueError(
                f"expected {_size(nvars, order)} coefficients for nvars={nvars}, "
                f"order={order}, got {coef.shape[0]}"
            )
        self.coef = coef
        self.nvars = nvars
        self.order = order

    # construction
    @classmethod
    def constant(cls, value, nvars: int, order: int) -> "Taylor":
        value = np.asarray(value, dtype=float)
        coef = np.zeros((_size(nvars, order),) + value.shape)
        coef[0] = value
        return cls(coef, nvars, order)

    @staticmethod
    def stack(items, axis: int = 0) -> "Taylor":
        items = list(items)
        jets = [t for t in items if isinstance(t, Taylor)]
        if not jets:
            return np.stack([np.asarray(t, dtype=float) for t in items], axis=axis)
        nvars = jets[0].nvars
        order = min(t.order for t in jets)
        items = [t if isinstance(t, Taylor) else Taylor.constant(t, nvars, order) for t in items]
        m = _size(nvars, order)
        return Taylor(np.stack([t.coef[:m] for t in items], axis=axis + 1), nvars, order)

    # tensor-part access
    @property
    def shape(self) -> tuple[int, ...]:
        return self.coef.shape[1:]

    @property
    def ndim(self) -> int:
        return self.coef.ndim - 1

    @property
    def value(self) -> np.ndarray:
        return self.coef[0]

    def __len__(self) -> int:
        return self.coef.shape[1]

    def __getitem__(self, key) -> "Taylor":
        if not isinstance(key, tuple):
            key = (key,)
        return Taylor(self.coef[(slice(None),) + key], self.nvars, self.order)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def sum(self, axis=None) -> "Taylor":
        if axis is None:
            axis = tuple(range(self.ndim))
        elif isinstance(axis, int):
            axis = (axis,)
        axis = tuple(a % self.ndim + 1 for a in axis)
        return Taylor(self.coef.sum(axis=axis), self.nvars, self.order)

    def reshape(self, *shape) -> "Taylor":
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return Taylor(self.coef.reshape(self.coef.shape[:1] + tuple(shape)), self.nvars, self.order)

    def transpose(self, *axes) -> "Taylor":
        return Taylor(np.transpose(self.coef, (0,) + tuple(a + 1 for a in axes)), self.nvars, self.order)

    def truncate(self, order: int) -> "Taylor":
        if order > self.order:
            raise ValueError("cannot raise the order of a jet")
        return Taylor(self.coef[: _size(self.nvars, order)], self.nvars, order)

    def __repr__(self) -> str:
        return f"Taylor(nvars={self.nvars}, order={self.order}, shape={self.shape}, value={self.value!r})"

    # derivatives
    def diff(self, var: int) -> "Taylor":
        """Partial derivative in variable ``var``; the result has one order less."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        src, factor = _diff_table(self.nvars, self.order, var)
        coef = self.coef[src] * factor.reshape((-1,) + (1,) * self.ndim)
        return Taylor(coef, self.nvars, self.order - 1)

    def partial(self, alpha) -> np.ndarray:
        """The partial derivative ``d^alpha f`` at the expansion point."""
        alpha = np.asarray(alpha, dtype=np.int64).reshape(1, -1)
        if alpha.sum() > self.order:
            raise ValueError(f"derivative of order {alpha.sum()} exceeds jet order {self.order}")
        idx = _index_of(self.nvars, self.order, alpha)[0]
        return self.coef[idx] * _factorials(self.nvars, self.order)[idx]

    # arithmetic
    def _coerce(self, other):
        if isinstance(other, Taylor):
            if other.nvars != self.nvars:
                raise ValueError("jets in different variable sets")
            order = min(self.order, other.order)
            return self.truncate(order), other.truncate(order)
        return self, np.asarray(other, dtype=float)

    def __add__(self, other):
        a, b = self._coerce(other)
        if isinstance(b, Taylor):
            nd = max(a.ndim, b.ndim)
            return Taylor(_align(a.coef, nd) + _align(b.coef, nd), a.nvars, a.order)
        nd = max(a.ndim, b.ndim)
        coef = np.array(np.broadcast_to(_align(a.coef, nd), (a.coef.shape[0],) + np.broadcast_shapes(a.shape, b.shape)))
        coef[0] = coef[0] + b
        return Taylor(coef, a.nvars, a.order)

    __radd__ = __add__

    def __neg__(self):
        return Taylor(-self.coef, self.nvars, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._coerce(other)
        if isinstance(b, Taylor):
            return _mul(a, b)
        nd = max(a.ndim, b.ndim)
        return Taylor(_align(a.coef, nd) * b, a.nvars, a.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Taylor):
            return self * reciprocal(other)
        return self * (1.0 / np.asarray(other, dtype=float))

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, p):
        if isinstance(p, int) and p >= 0:
            result = Taylor.constant(np.ones(self.shape), self.nvars, self.order)
            for _ in range(p):
                result = result * self
            return result
        return power(self, p)


def _mul(a: Taylor, b: Taylor) -> Taylor:
    nd = max(a.ndim, b.ndim)
    ai, bi, starts = _mul_table(a.nvars, a.order)
    prod = _align(a.coef, nd)[ai] * _align(b.coef, nd)[bi]
    return Taylor(np.add.reduceat(prod, starts, axis=0), a.nvars, a.order)


def _compose(u: Taylor, series) -> Taylor:
    """Evaluate sum_k series[k] * (u - u0)**k by Horner's rule."""
    h = Taylor(u.coef.copy(), u.nvars, u.order)
    h.coef[0] = 0.0
    result = Taylor.constant(series[u.order], u.nvars, u.order)
    for k in range(u.order - 1, -1, -1):
        result = result * h
        result.coef[0] = result.coef[0] + series[k]
    return result


def reciprocal(u: Taylor) -> Taylor:
    u0 = u.value
    if np.any(u0 == 0.0):
        raise ZeroDivisionError("jet division by a zero constant term")
    inv = 1.0 / u0
    return _compose(u, [(-1.0) ** k * inv ** (k + 1) for k in range(u.order + 1)])


def power(u, p: float):
    if not isinstance(u, Taylor):
        return np.power(u, p)
    u0 = u.value
    if np.any(u0 <= 0.0):
        raise ValueError("non-integer power of a jet needs a positive constant term")
    series = []
    binom = 1.0
    for k in range(u.order + 1):
        series.append(binom * u0 ** (p - k))
        binom *= (p - k) / (k + 1)
    return _compose(u, series)


def sqrt(u):
    if not isinstance(u, Taylor):
        return np.sqrt(u)
    return power(u, 0.5)


def exp(u):
    if not isinstance(u, Taylor):
        return np.exp(u)
    e = np.exp(u.value)
    return _compose(u, [e / math.factorial(k) for k in range(u.order + 1)])


def log(u):
    if not isinstance(u, Taylor):
        return np.log(u)
    u0 = u.value
    if np.any(u0 <= 0.0):
        raise ValueError("log of a jet needs a positive constant term")
    series = [np.log(u0)] + [(-1.0) ** (k + 1) / (k * u0**k) for k in range(1, u.order + 1)]
    return _compose(u, series)


def _sincos_series(u0, order, phase):
    # k-th derivative of sin is sin(u0 + k*pi/2); cos adds a quarter turn
    return [np.sin(u0 + (k + phase) * np.pi / 2) / math.factorial(k) for k in range(order + 1)]


def sin(u):
    if not isinstance(u, Taylor):
        return np.sin(u)
    return _compose(u, _sincos_series(u.value, u.order, 0))


def cos(u):
    if not isinstance(u, Taylor):
        return np.cos(u)
    return _compose(u, _sincos_series(u.value, u.order, 1))


def _atan_nilpotent(h: Taylor) -> Taylor:
    # h has zero constant term: atan h = h - h^3/3 + h^5/5 - ...
    series = [0.0] + [((-1.0) ** ((k - 1) // 2) / k if k % 2 else 0.0) for k in range(1, h.order + 1)]
    return _compose(h, [np.zeros(h.shape) + s for s in series])


def atan(u):
    if not isinstance(u, Taylor):
        return np.arctan(u)
    u0 = u.value
    # tan(A - B) = (u - u0) / (1 + u u0)
    h = (u - u0) / (1.0 + u * u0)
    h.coef[0] = 0.0
    out = _atan_nilpotent(h)
    out.coef[0] = out.coef[0] + np.arctan(u0)
    return out


def atan2(y, x):
    """Angle of the point (x, y); jets are expanded around the base angle."""
    if not isinstance(y, Taylor) and not isinstance(x, Taylor):
        return np.arctan2(y, x)
    ref = y if isinstance(y, Taylor) else x
    y0 = y.value if isinstance(y, Taylor) else np.asarray(y, dtype=float)
    x0 = x.value if isinstance(x, Taylor) else np.asarray(x, dtype=float)
    if np.any((x0 == 0.0) & (y0 == 0.0)):
        raise ValueError("atan2 of a jet at the origin")
    h = (x0 * y - y0 * x) / (x0 * x + y0 * y)
    if not isinstance(h, Taylor):
        h = Taylor.constant(h, ref.nvars, ref.order)
    h.coef[0] = 0.0
    out = _atan_nilpotent(h)
    out.coef[0] = out.coef[0] + np.arctan2(y0, x0)
    return out


def dot(u, v):
    """Inner product over the leading (component) axis."""
    return (u * v).sum(axis=0)


def norm(u):
    return sqrt(dot(u, u))


def einsum(subscripts: str, a, b) -> Taylor:
    """Two-operand einsum on the tensor parts of jets (or a jet and an array)."""
    ins, out = subscripts.replace(" ", "").split("->")
    sa, sb = ins.split(",")
    if isinstance(a, Taylor) and isinstance(b, Taylor):
        a, b = a._coerce(b)
        ai, bi, starts = _mul_table(a.nvars, a.order)
        prod = np.einsum(f"z{sa},z{sb}->z{out}", a.coef[ai], b.coef[bi])
        return Taylor(np.add.reduceat(prod, starts, axis=0), a.nvars, a.order)
    if isinstance(a, Taylor):
        return Taylor(np.einsum(f"z{sa},{sb}->z{out}", a.coef, np.asarray(b, float)), a.nvars, a.order)
    return Taylor(np.einsum(f"{sa},z{sb}->z{out}", np.asarray(a, float), b.coef), b.nvars, b.order)


# -- seeding ---------------------------------------------------------------


def seed(values, order: int) -> Taylor:
    """Independent variables z_k = values[k] + dz_k.

    ``values`` has shape (m,) or (m, *batch); the jet lives in m variables and
    every batch entry is expanded around its own point.
    """
    values = np.asarray(values, dtype=float)
    m = values.shape[0]
    coef = np.zeros((_size(m, order),) + values.shape)
    coef[0] = values
    if order >= 1:
        for k in range(m):
            coef[1 + k, k] = 1.0
    return Taylor(coef, m, order)


def directional_seed(base, direction, order: int = 1) -> Taylor:
    """One-variable jet ``base + s * direction``."""
    base = np.asarray(base, dtype=float)
    coef = np.zeros((order + 1,) + base.shape)
    coef[0] = base
    if order >= 1:
        coef[1] = np.broadcast_to(direction, base.shape)
    return Taylor(coef, 1, order)
