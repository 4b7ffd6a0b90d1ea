"""Instrumented arithmetic for auditing the accurate pipeline.

:class:`CountingFloat` wraps a 53-bit ``mpfr`` value (IEEE double rounding,
unbounded exponent) and records every operation in the active
:class:`Tally`.  Object grids holding these numbers run through the same
plain-Python kernels as exact Fractions, so a counted run exercises the
production code.  A subtraction is *cancelling* when both operands are
nonzero and of the same sign (this includes adding operands of opposite
signs); an accurate run records none and produces no negative value.

Typical use::

    with counting() as tally:
        sigma = instrumented_singular_values(product)
    assert tally.cancelling == 0
"""
from __future__ import annotations

import contextlib
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
import numpy as np
from gmpy2 import mpfr, mpq

from .assembly import split_at_min
from .bsvd import _qr_iterate
from .deflation import periodic_deflate
from .representation import BDRepr, BidiagonalFactor, BidiagonalProduct


@dataclass
class Tally:
    """Operation counts of one instrumented run."""

    ops: dict = field(default_factory=lambda: {"+": 0, "-": 0, "*": 0, "/": 0, "sqrt": 0})
    cancelling: int = 0
    negatives: int = 0
    examples: list = field(default_factory=list)

    @property
    def total(self) -> int:
        return sum(self.ops.values())

    def _bad(self, what: str, a, b) -> None:
        if len(self.examples) < 10:
            self.examples.append((what, float(a), float(b)))


_TALLY: Tally | None = None


def _ctx():
    return gmpy2.context(gmpy2.get_context(), precision=53, round=gmpy2.RoundToNearest,
                         subnormalize=False, emin=-(1 << 30), emax=1 << 30)


@contextlib.contextmanager
def counting():
    """Activate a fresh :class:`Tally` (and the 53-bit unbounded context)."""
    global _TALLY
    outer = _TALLY
    _TALLY = Tally()
    try:
        with _ctx():
            yield _TALLY
    finally:
        _TALLY = outer


def _raw(x):
    if isinstance(x, CountingFloat):
        return x.v
    if isinstance(x, Fraction):
        return mpfr(mpq(x.numerator, x.denominator))
    return mpfr(x)


def _sign(v) -> int:
    return (v > 0) - (v < 0)


class CountingFloat:
    """Counted number; deliberately not a ``float`` subclass."""

    __slots__ = ("v",)

    def __init__(self, value=0.0):
        self.v = _raw(value)

    @staticmethod
    def _out(v) -> "CountingFloat":
        out = CountingFloat.__new__(CountingFloat)
        out.v = v
        if v < 0 and _TALLY is not None:
            _TALLY.negatives += 1
        return out

    def _count(self, op: str) -> None:
        if _TALLY is not None:
            _TALLY.ops[op] += 1

    def _check(self, a, b, subtract: bool) -> None:
        # a - b (or a + b when subtract is false) cancels for equal
        # (opposite) signs of nonzero operands
        sa, sb = _sign(a), _sign(b)
        if sa and sb and ((sa == sb) == subtract) and _TALLY is not None:
            _TALLY.cancelling += 1
            _TALLY._bad("-" if subtract else "+", a, b)

    def __add__(self, other):
        b = _raw(other)
        self._count("+")
        self._check(self.v, b, False)
        return self._out(self.v + b)

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        b = _raw(other)
        self._count("-")
        self._check(self.v, b, True)
        return self._out(self.v - b)

    def __rsub__(self, other):
        a = _raw(other)
        self._count("-")
        self._check(a, self.v, True)
        return self._out(a - self.v)

    def __mul__(self, other):
        self._count("*")
        return self._out(self.v * _raw(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        self._count("/")
        return self._out(self.v / _raw(other))

    def __rtruediv__(self, other):
        self._count("/")
        return self._out(_raw(other) / self.v)

    def __pow__(self, k):
        if k != 2:
            return NotImplemented
        return self * self

    def __neg__(self):
        return self._out(-self.v)

    def __abs__(self):
        out = CountingFloat.__new__(CountingFloat)
        out.v = abs(self.v)
        return out

    def sqrt(self) -> "CountingFloat":
        self._count("sqrt")
        return self._out(gmpy2.sqrt(self.v))

    def __float__(self) -> float:
        return float(self.v)

    def __bool__(self) -> bool:
        return bool(self.v)

    def __eq__(self, other):
        return self.v == _raw(other)

    def __ne__(self, other):
        return self.v != _raw(other)

    def __lt__(self, other):
        return self.v < _raw(other)

    def __le__(self, other):
        return self.v <= _raw(other)

    def __gt__(self, other):
        return self.v > _raw(other)

    def __ge__(self, other):
        return self.v >= _raw(other)

    def __hash__(self):
        return hash(self.v)

    def __repr__(self) -> str:
        return f"CountingFloat({float(self.v)!r})"


def counted_array(values) -> np.ndarray:
    """Object array of :class:`CountingFloat` with the shape of ``values``."""
    arr = np.asarray(values, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = CountingFloat(v)
    return out


def counted_factor(F: BidiagonalFactor) -> BidiagonalFactor:
    return BidiagonalFactor(F.orientation, F.nrows, F.ncols, F.index,
                            counted_array(F.bar_values), counted_array(F.off_values))


def counted_product(product: BidiagonalProduct) -> BidiagonalProduct:
    """The chain with every stored value wrapped in :class:`CountingFloat`."""
    return BidiagonalProduct([counted_factor(F) for F in product.factors])


def counted_repr(rep: BDRepr) -> BDRepr:
    return BDRepr(counted_array(rep.bar), counted_array(rep.off))


def instrumented_singular_values(product: BidiagonalProduct, max_sweeps: int | None = None):
    """Split, deflate and run zero-shift QR with counted arithmetic.

    Must be called inside :func:`counting`.  Returns the descending
    singular values as ``mpfr`` numbers (53-bit, unbounded exponent) and
    the deflation result.
    """
    if _TALLY is None:
        raise RuntimeError("instrumented runs need an active counting() block")
    split = split_at_min(counted_product(product), exact=True)
    defl = periodic_deflate(split)
    d = [CountingFloat(v) for v in defl.bbar_diag]
    e = [CountingFloat(v) for v in defl.bbar_super]
    if d:
        _qr_iterate(d, e, None, None, "zero", max_sweeps)
    sigma = sorted((abs(v).v for v in d), reverse=True)
    return sigma, defl


__all__ = ["Tally", "CountingFloat", "counting", "counted_array", "counted_factor",
           "counted_product", "counted_repr", "instrumented_singular_values"]
