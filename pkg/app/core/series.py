"""
Truncated Taylor series algebra at r = 0

A TruncatedSeries of order M stores c_0..c_M with f(r) = sum c_j r^j
(monomial form, c_j = f^(j)(0)/j!). Every operation truncates to the
order of its operands.
"""
import logging
import math
from typing import Iterable, Sequence, Union

import numpy as np

from app.core.errors import (
    DegenerateProfileError,
    InputError,
    OrderMismatchError,
    SeriesDomainError,
    SingularReciprocalError,
)

logger = logging.getLogger(__name__)

RECIPROCAL_FLOOR = 1e-300

Number = Union[int, float]


class TruncatedSeries:
    """Power series c_0 + c_1 r + ... + c_M r^M with value semantics"""

    __slots__ = ("_c",)
    __array_priority__ = 100.0

    def __init__(self, coeffs: Iterable[Number], order: int = None):
        c = np.array(list(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise InputError("series needs a non-empty 1-D coefficient list")
        if order is not None:
            if order < 0:
                raise InputError(f"order cannot be negative: {order}")
            if c.size > order + 1:
                c = c[: order + 1]
            elif c.size < order + 1:
                c = np.concatenate([c, np.zeros(order + 1 - c.size)])
        if not np.all(np.isfinite(c)):
            raise InputError("series coefficients must be finite")
        c.setflags(write=False)
        self._c = c

    @classmethod
    def constant(cls, value: Number, order: int) -> "TruncatedSeries":
        return cls([value], order=order)

    @classmethod
    def from_derivatives(cls, a: Sequence[Number]) -> "TruncatedSeries":
        """Build from derivative form a_j = f^(j)(0)"""
        return cls([aj / math.factorial(j) for j, aj in enumerate(a)])

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def order(self) -> int:
        return self._c.size - 1

    def derivatives(self) -> np.ndarray:
        """Derivative form a_j = j! c_j"""
        return np.array([math.factorial(j) * cj for j, cj in enumerate(self._c)])

    def __getitem__(self, j: int) -> float:
        return float(self._c[j])

    def __len__(self) -> int:
        return self._c.size

    def __iter__(self):
        return iter(self._c.tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.order == other.order and bool(np.array_equal(self._c, other._c))

    def __hash__(self):
        return hash(self._c.tobytes())

    def __repr__(self) -> str:
        return f"TruncatedSeries({self._c.tolist()})"

    def __add__(self, other):
        if isinstance(other, TruncatedSeries):
            return series_add(self, other)
        return TruncatedSeries(self._c + np.eye(1, self._c.size)[0] * other)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(-self._c)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return series_mul(self, other)
        return TruncatedSeries(self._c * other)

    __rmul__ = __mul__

    def __pow__(self, p: Number):
        return series_real_power(self, p)

    def __call__(self, r):
        """Evaluate by Horner's rule; accepts scalars or arrays"""
        r = np.asarray(r, dtype=float)
        acc = np.zeros_like(r)
        for cj in self._c[::-1]:
            acc = acc * r + cj
        return acc if acc.ndim else float(acc)

    def derivative(self) -> "TruncatedSeries":
        """Term-wise derivative, order M-1 (a constant stays order 0)"""
        if self.order == 0:
            return TruncatedSeries([0.0])
        return TruncatedSeries(self._c[1:] * np.arange(1, self._c.size))

    def integrate(self, constant: Number = 0.0) -> "TruncatedSeries":
        """Term-wise antiderivative, order M+1"""
        tail = self._c / np.arange(1, self._c.size + 1)
        return TruncatedSeries(np.concatenate([[float(constant)], tail]))

    def truncate(self, order: int) -> "TruncatedSeries":
        return TruncatedSeries(self._c, order=order)

    def is_even(self) -> bool:
        return bool(np.all(self._c[1::2] == 0.0))


def _check_orders(f: TruncatedSeries, g: TruncatedSeries) -> None:
    if f.order != g.order:
        raise OrderMismatchError(f"series orders differ: {f.order} vs {g.order}")


def series_add(f: TruncatedSeries, g: TruncatedSeries) -> TruncatedSeries:
    """Coefficient-wise sum of equal-order series"""
    _check_orders(f, g)
    return TruncatedSeries(f.coeffs + g.coeffs)


def series_mul(f: TruncatedSeries, g: TruncatedSeries) -> TruncatedSeries:
    """Cauchy product truncated at the common order"""
    _check_orders(f, g)
    return TruncatedSeries(np.convolve(f.coeffs, g.coeffs)[: f.order + 1])


def series_reciprocal(f: TruncatedSeries) -> TruncatedSeries:
    """
    Series g with f*g = 1 + O(r^(M+1)).

    Triangular recurrence g_k = -(sum_{j=1..k} c_j g_{k-j}) / c_0; odd
    coefficients of an even input come out as exact zeros.
    """
    c = f.coeffs
    if abs(c[0]) <= RECIPROCAL_FLOOR:
        raise SingularReciprocalError(f"constant term {c[0]!r} too small to invert")
    g = np.zeros_like(c)
    g[0] = 1.0 / c[0]
    for k in range(1, c.size):
        g[k] = -np.dot(c[1 : k + 1], g[k - 1 :: -1][:k]) / c[0]
    return TruncatedSeries(g)


def series_real_power(f: TruncatedSeries, p: Number) -> TruncatedSeries:
    """
    g = f^p for c_0 > 0 by the J.C.P. Miller recurrence

        g_0 = c_0^p,  g_k = sum_{j=1..k} ((p+1) j - k) c_j g_{k-j} / (k c_0)

    valid for every real p, negative integers included. Odd coefficients of
    an even input come out as exact zeros.
    """
    c = f.coeffs
    if not c[0] > 0.0:
        raise SeriesDomainError(f"real power needs a positive constant term, got {c[0]!r}")
    p = float(p)
    g = np.zeros_like(c)
    g[0] = c[0] ** p
    for k in range(1, c.size):
        j = np.arange(1, k + 1)
        g[k] = np.dot(((p + 1.0) * j - k) * c[1 : k + 1], g[k - 1 :: -1][:k]) / (k * c[0])
    return TruncatedSeries(g)


def series_r_over_deriv(f: TruncatedSeries) -> TruncatedSeries:
    """
    h(r) = r / f'(r) for a profile with f'(0) = 0 and f''(0) != 0.

    Computed as the reciprocal of f'(r)/r = sum_{j>=2} j c_j r^(j-2); an
    order-M input fixes that quotient through r^(M-2), which is the order
    of the result. h(0) = 1/(2 c_2) = 1/f''(0).
    """
    c = f.coeffs
    if f.order < 2:
        raise DegenerateProfileError("r/f' needs a series of order at least 2")
    if c[1] != 0.0:
        raise DegenerateProfileError(f"f'(0) must vanish exactly, got c_1 = {c[1]!r}")
    if c[2] == 0.0:
        raise DegenerateProfileError("f''(0) vanishes; r/f' is unbounded at 0")
    quotient = TruncatedSeries(c[2:] * np.arange(2, c.size))
    return series_reciprocal(quotient)
