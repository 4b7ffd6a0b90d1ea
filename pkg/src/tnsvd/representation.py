"""Element-pair representation of a nonnegative bidiagonal product.

A representation ``BD(A)`` of an ``n x m`` matrix stores one pair
``(bar, off)`` per grid cell.  The matrix it encodes is

    A = L_{n-1} ... L_1 D U_1 ... U_{m-1}

where ``D`` holds ``off[i, i]`` on its diagonal, the lower factor ``L_k``
takes the pairs of the k-th sub-diagonal of the grid and the upper factor
``U_l`` takes the pairs of the l-th super-diagonal.  Indices are 0-based
throughout the package: the pair at grid cell ``(p + 1, p + 1 - k)`` is
the elementary position ``p`` of ``L_k`` (entry ``(p, p)`` is ``bar`` and
entry ``(p + 1, p)`` is ``off``), and symmetrically for ``U_l``.

Values are stored in two numpy arrays.  ``float64`` arrays are used by the
accurate pipeline, ``object`` arrays holding :class:`fractions.Fraction`
(or instrumented numbers) are used by the exact test oracles.  The same
routines serve both.
"""
from __future__ import annotations

import warnings
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np


class DimensionError(ValueError):
    """Raised when sizes or indices are incompatible."""


class DomainError(ValueError):
    """Raised when a value is negative, infinite or NaN."""


class ElementPair(NamedTuple):
    """One ``(bar, off)`` element pair."""

    bar: float
    off: float


def _check_values(arr: np.ndarray, what: str) -> None:
    if arr.dtype == object:
        for v in arr.flat:
            if v < 0:
                raise DomainError(f"{what}: negative value {v!r}")
            if isinstance(v, float) and not np.isfinite(v):
                raise DomainError(f"{what}: non-finite value {v!r}")
    else:
        if not np.all(np.isfinite(arr)):
            raise DomainError(f"{what}: non-finite value")
        if np.any(arr < 0):
            raise DomainError(f"{what}: negative value")


def as_value_array(values, dtype=None) -> np.ndarray:
    """Convert ``values`` to a float64 or object array.

    Parameters
    ----------
    values : array_like
        Numbers.  Fractions or integers inside an object array stay exact.
    dtype : {None, float, object}
        Forced storage type.  ``None`` keeps object arrays as they are and
        converts everything else to float64.
    """
    arr = np.asarray(values)
    if dtype is object or (dtype is None and arr.dtype == object):
        out = np.empty(arr.shape, dtype=object)
        out.flat[:] = list(arr.flat)
        return out
    return np.array(arr, dtype=np.float64)


class BDRepr:
    """Grid of element pairs encoding an ``n x m`` matrix.

    Parameters
    ----------
    bar, off : array_like, shape (n, m)
        The pair values.  Diagonal ``bar`` entries are ignored and stored
        as 1.
    normalize : bool
        When true (default) every off-diagonal ``bar`` outside ``{0, 1}`` is
        rescaled to 1 by moving its value into ``off`` entries and ``D``.
        The encoded matrix does not change.  All pass operations rely on
        this gauge.
    copy : bool
        Copy the input arrays (default).  Internal callers that already own
        fresh arrays pass ``False``.
    """

    __slots__ = ("bar", "off")

    def __init__(self, bar, off, normalize: bool = True, copy: bool = True,
                 check: bool = True):
        bar_a = as_value_array(bar) if copy else bar
        off_a = as_value_array(off) if copy else off
        if (bar_a.dtype == object) != (off_a.dtype == object):
            bar_a = as_value_array(bar_a, object)
            off_a = as_value_array(off_a, object)
        if bar_a.ndim != 2 or bar_a.shape != off_a.shape:
            raise DimensionError("bar and off must be 2-d arrays of one shape")
        if bar_a.shape[0] < 1 or bar_a.shape[1] < 1:
            raise DimensionError("a representation needs at least one row and column")
        if check:
            _check_values(bar_a, "bar")
            _check_values(off_a, "off")
        k = min(bar_a.shape)
        diag = np.arange(k)
        if check and any(bar_a[i, i] != 1 for i in range(k)):
            warnings.warn("diagonal bar entries are ignored and reset to 1",
                          stacklevel=2)
        one = Fraction(1) if bar_a.dtype == object else 1.0
        bar_a[diag, diag] = one
        self.bar = bar_a
        self.off = off_a
        if normalize:
            normalize_gauge(self)

    # ------------------------------------------------------------------
    @classmethod
    def identity(cls, n: int, m: int | None = None, exact: bool = False) -> "BDRepr":
        """Representation of the ``n x m`` rectangular identity."""
        m = n if m is None else m
        if exact:
            bar = np.empty((n, m), dtype=object)
            bar.fill(Fraction(1))
            off = np.empty((n, m), dtype=object)
            off.fill(Fraction(0))
            for i in range(min(n, m)):
                off[i, i] = Fraction(1)
        else:
            bar = np.ones((n, m))
            off = np.zeros((n, m))
            np.fill_diagonal(off, 1.0)
        return cls(bar, off, normalize=False, copy=False, check=False)

    @property
    def nrows(self) -> int:
        return self.bar.shape[0]

    @property
    def ncols(self) -> int:
        return self.bar.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.bar.shape

    @property
    def exact(self) -> bool:
        """True when the values live in an object array."""
        return self.bar.dtype == object

    @property
    def canonical(self) -> bool:
        """True when ``off[i, i] != 0`` for every ``i < min(n, m) - 1``."""
        k = min(self.shape)
        return all(self.off[i, i] != 0 for i in range(k - 1))

    def pair(self, i: int, j: int) -> ElementPair:
        return ElementPair(self.bar[i, j], self.off[i, j])

    def copy(self) -> "BDRepr":
        return BDRepr(self.bar.copy(), self.off.copy(), normalize=False,
                      copy=False, check=False)

    def astype(self, kind) -> "BDRepr":
        """Return a copy stored as float64 (``float``) or exact objects.

        ``kind`` may be ``float``, ``Fraction`` or any callable converting
        one number (for example an instrumented number type).
        """
        if kind is float:
            return BDRepr(np.array(self.bar, dtype=np.float64),
                          np.array(self.off, dtype=np.float64),
                          normalize=False, copy=False, check=False)
        conv = np.frompyfunc(kind, 1, 1)
        return BDRepr(conv(self.bar).astype(object), conv(self.off).astype(object),
                      normalize=False, copy=False, check=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BDRepr) or other.shape != self.shape:
            return False
        return bool(np.all(self.bar == other.bar) and np.all(self.off == other.off))

    def __repr__(self) -> str:
        return f"BDRepr({self.nrows}x{self.ncols}, {'exact' if self.exact else 'float'})"

    # ------------------------------------------------------------------
    def lower_factor_dense(self, k: int) -> np.ndarray:
        """Dense ``L_k`` (``1 <= k <= n-1``)."""
        n, m = self.shape
        out = _eye(n, self.exact)
        for p in range(k - 1, min(n - 2, m + k - 2) + 1):
            out[p, p] = self.bar[p + 1, p + 1 - k]
            out[p + 1, p] = self.off[p + 1, p + 1 - k]
        return out

    def upper_factor_dense(self, l: int) -> np.ndarray:
        """Dense ``U_l`` (``1 <= l <= m-1``)."""
        n, m = self.shape
        out = _eye(m, self.exact)
        for p in range(l - 1, min(m - 2, n + l - 2) + 1):
            out[p, p] = self.bar[p + 1 - l, p + 1]
            out[p, p + 1] = self.off[p + 1 - l, p + 1]
        return out

    def diag_dense(self) -> np.ndarray:
        n, m = self.shape
        out = _zeros((n, m), self.exact)
        for i in range(min(n, m)):
            out[i, i] = self.off[i, i]
        return out


def _eye(n: int, exact: bool) -> np.ndarray:
    if exact:
        out = np.empty((n, n), dtype=object)
        out.fill(Fraction(0))
        for i in range(n):
            out[i, i] = Fraction(1)
        return out
    return np.eye(n)


def _zeros(shape, exact: bool) -> np.ndarray:
    if exact:
        out = np.empty(shape, dtype=object)
        out.fill(Fraction(0))
        return out
    return np.zeros(shape)


def expand_dense(repr_: BDRepr) -> np.ndarray:
    """Multiply out ``L_{n-1} ... L_1 D U_1 ... U_{m-1}``.

    Exact (object) representations give an exact object matrix.  This is a
    test and oracle helper; the accurate pipeline never calls it.
    """
    n, m = repr_.shape
    a = repr_.diag_dense()
    for k in range(1, n):
        a = repr_.lower_factor_dense(k).dot(a)
    for l in range(1, m):
        a = a.dot(repr_.upper_factor_dense(l))
    return a


def transpose(repr_: BDRepr) -> BDRepr:
    """Representation of the transposed matrix (the transposed grid)."""
    return BDRepr(repr_.bar.T.copy(), repr_.off.T.copy(), normalize=False,
                  copy=False, check=False)


def append_trailing_rows(repr_: BDRepr, t: int) -> BDRepr:
    """Attach ``t - n`` zero rows below the matrix.

    New grid rows are filled with the pair ``(1, 0)``.
    """
    n, m = repr_.shape
    if t <= n:
        raise DimensionError(f"t={t} must exceed the row count {n}")
    bar = _ones((t, m), repr_.exact)
    off = _zeros((t, m), repr_.exact)
    bar[:n] = repr_.bar
    off[:n] = repr_.off
    return BDRepr(bar, off, normalize=False, copy=False, check=False)


def drop_trailing_rows(repr_: BDRepr, t: int) -> BDRepr:
    """Keep the first ``t`` rows of the matrix.

    Row ``t`` of the new grid (1-based) receives
    ``off[t, j] * prod_{k <= j} bar[t + 1, k]`` for ``j <= min(t, m)``;
    the leading rows are otherwise unchanged.
    """
    n, m = repr_.shape
    if not 1 <= t < n:
        raise DimensionError(f"t={t} must satisfy 1 <= t < {n}")
    bar = repr_.bar[:t].copy()
    off = repr_.off[:t].copy()
    below = repr_.bar[t]
    r = t - 1
    acc = None
    for j in range(min(t, m)):
        acc = below[j] if acc is None else acc * below[j]
        off[r, j] = off[r, j] * acc
    return BDRepr(bar, off, normalize=False, copy=False, check=False)


def append_trailing_cols(repr_: BDRepr, t: int) -> BDRepr:
    """Column version of :func:`append_trailing_rows`."""
    return transpose(append_trailing_rows(transpose(repr_), t))


def drop_trailing_cols(repr_: BDRepr, t: int) -> BDRepr:
    """Column version of :func:`drop_trailing_rows`."""
    return transpose(drop_trailing_rows(transpose(repr_), t))


def _ones(shape, exact: bool) -> np.ndarray:
    if exact:
        out = np.empty(shape, dtype=object)
        out.fill(Fraction(1))
        return out
    return np.ones(shape)


def normalize_gauge(repr_: BDRepr) -> BDRepr:
    """Rescale every off-diagonal ``bar`` outside ``{0, 1}`` to 1 in place.

    ``E_p(a, b) = E_p(1, b / a) diag_p(a)`` for a lower elementary factor;
    ``diag_p(a)`` commutes with the rest of its factor and is pushed right
    through the remaining lower factors into ``D`` (and mirrored for the
    upper factors).  Only products and quotients are formed.
    """
    bar, off = repr_.bar, repr_.off
    _normalize_lower(bar, off)
    _normalize_lower(bar.T, off.T)
    return repr_


def _normalize_lower(bar: np.ndarray, off: np.ndarray) -> None:
    n, m = bar.shape
    for k in range(n - 1, 0, -1):
        for p in range(k - 1, min(n - 2, m + k - 2) + 1):
            r, c = p + 1, p + 1 - k
            a = bar[r, c]
            if a == 0 or a == 1:
                continue
            bar[r, c] = a / a
            off[r, c] = off[r, c] / a
            _push_row_scale(bar, off, p, a, k - 1)


def _push_row_scale(bar: np.ndarray, off: np.ndarray, p: int, a, kmax: int) -> None:
    """Move ``diag_p(a)`` (a > 0) right through ``L_kmax ... L_1`` into D."""
    n, m = bar.shape
    for k in range(kmax, 0, -1):
        # entry (p, p - 1) of L_k lives at grid (p, p - k)
        c = p - k
        if 0 <= c < m and p - 1 >= k - 1:
            off[p, c] = off[p, c] * a
        # entry (p + 1, p) of L_k lives at grid (p + 1, p + 1 - k)
        c = p + 1 - k
        if p <= n - 2 and p >= k - 1 and 0 <= c < m:
            off[p + 1, c] = off[p + 1, c] / a
    if p < m:
        off[p, p] = off[p, p] * a


class BidiagonalFactor:
    """One nonnegative lower or upper bidiagonal factor.

    Parameters
    ----------
    orientation : {"lower", "upper"}
    nrows, ncols : int
    index : sequence of int
        0-based positions ``i`` of the nontrivial pairs.  For a lower factor
        ``bar`` sits at ``(i, i)`` and ``off`` at ``(i + 1, i)``; for an upper
        one ``off`` sits at ``(i, i + 1)``.
    bar, off : sequence of numbers
        Values of the pairs.  Positions not listed hold ``(1, 0)``.
    """

    __slots__ = ("orientation", "nrows", "ncols", "index", "bar_values", "off_values")

    def __init__(self, orientation: str, nrows: int, ncols: int,
                 index: Sequence[int] = (), bar: Sequence = (), off: Sequence = ()):
        if orientation not in ("lower", "upper"):
            raise ValueError("orientation must be 'lower' or 'upper'")
        if nrows < 1 or ncols < 1:
            raise DimensionError("factor dimensions must be positive")
        idx = np.asarray(index, dtype=np.int64).reshape(-1)
        bar_a = as_value_array(list(bar) if not isinstance(bar, np.ndarray) else bar)
        off_a = as_value_array(list(off) if not isinstance(off, np.ndarray) else off)
        if (bar_a.dtype == object) != (off_a.dtype == object):
            bar_a = as_value_array(bar_a, object)
            off_a = as_value_array(off_a, object)
        bar_a = bar_a.reshape(-1)
        off_a = off_a.reshape(-1)
        if not len(idx) == len(bar_a) == len(off_a):
            raise DimensionError("index, bar and off must have equal length")
        _check_values(bar_a, "bar")
        _check_values(off_a, "off")
        k = min(nrows, ncols)
        span = nrows if orientation == "lower" else ncols
        if len(idx):
            if idx.min() < 0 or idx.max() >= k:
                raise DimensionError("pair index outside the bidiagonal band")
            if len(np.unique(idx)) != len(idx):
                raise DimensionError("duplicate pair index")
            for i, o in zip(idx, off_a):
                if i + 1 >= span and o != 0:
                    raise DimensionError(f"pair {i} has no off-diagonal slot")
        order = np.argsort(idx, kind="stable")
        self.orientation = orientation
        self.nrows = int(nrows)
        self.ncols = int(ncols)
        self.index = idx[order]
        self.bar_values = bar_a[order]
        self.off_values = off_a[order]

    @property
    def exact(self) -> bool:
        return self.bar_values.dtype == object

    @property
    def npairs(self) -> int:
        return len(self.index)

    def transpose(self) -> "BidiagonalFactor":
        other = "upper" if self.orientation == "lower" else "lower"
        return BidiagonalFactor(other, self.ncols, self.nrows, self.index,
                                self.bar_values, self.off_values)

    def dense(self, exact: bool | None = None) -> np.ndarray:
        """Dense matrix of the factor (exact objects if ``exact``)."""
        exact = self.exact if exact is None else exact
        n, m = self.nrows, self.ncols
        if exact:
            out = np.empty((n, m), dtype=object)
            out.fill(Fraction(0))
            one = Fraction(1)
        else:
            out = np.zeros((n, m))
            one = 1.0
        for i in range(min(n, m)):
            out[i, i] = one
        for i, b, o in zip(self.index, self.bar_values, self.off_values):
            b = Fraction(b) if exact else float(b)
            o = Fraction(o) if exact else float(o)
            out[i, i] = b
            if self.orientation == "lower":
                if i + 1 < n:
                    out[i + 1, i] = o
            elif i + 1 < m:
                out[i, i + 1] = o
        return out

    def __repr__(self) -> str:
        return (f"BidiagonalFactor({self.orientation}, {self.nrows}x{self.ncols}, "
                f"{self.npairs} pairs)")


class BidiagonalProduct:
    """Ordered chain ``B_1 B_2 ... B_K`` of bidiagonal factors."""

    __slots__ = ("factors",)

    def __init__(self, factors: Sequence[BidiagonalFactor]):
        factors = list(factors)
        if not factors:
            raise DimensionError("a product needs at least one factor")
        for a, b in zip(factors, factors[1:]):
            if a.ncols != b.nrows:
                raise DimensionError(
                    f"incompatible factors {a.nrows}x{a.ncols} and {b.nrows}x{b.ncols}")
        self.factors = factors

    @property
    def dims(self) -> list[int]:
        """``[n_0, n_1, ..., n_K]``."""
        return [self.factors[0].nrows] + [f.ncols for f in self.factors]

    @property
    def shape(self) -> tuple[int, int]:
        return self.factors[0].nrows, self.factors[-1].ncols

    @property
    def total_pairs(self) -> int:
        """The count ``S`` of nontrivial element pairs."""
        return sum(f.npairs for f in self.factors)

    def transpose(self) -> "BidiagonalProduct":
        return BidiagonalProduct([f.transpose() for f in reversed(self.factors)])

    def __add__(self, other: "BidiagonalProduct") -> "BidiagonalProduct":
        return BidiagonalProduct(self.factors + other.factors)

    def __len__(self) -> int:
        return len(self.factors)

    def __repr__(self) -> str:
        return f"BidiagonalProduct(dims={self.dims}, S={self.total_pairs})"


def factor_from_repr_lower(repr_: BDRepr, k: int) -> BidiagonalFactor:
    """``L_k`` of a representation as a :class:`BidiagonalFactor`."""
    n, m = repr_.shape
    ps = list(range(k - 1, min(n - 2, m + k - 2) + 1))
    return BidiagonalFactor("lower", n, n, ps,
                            [repr_.bar[p + 1, p + 1 - k] for p in ps],
                            [repr_.off[p + 1, p + 1 - k] for p in ps])


def factor_from_repr_upper(repr_: BDRepr, l: int) -> BidiagonalFactor:
    """``U_l`` of a representation as a :class:`BidiagonalFactor`."""
    n, m = repr_.shape
    ps = list(range(l - 1, min(m - 2, n + l - 2) + 1))
    return BidiagonalFactor("upper", m, m, ps,
                            [repr_.bar[p + 1 - l, p + 1] for p in ps],
                            [repr_.off[p + 1 - l, p + 1] for p in ps])


def repr_to_product(repr_: BDRepr) -> BidiagonalProduct:
    """Chain ``L_{n-1} ... L_1 D U_1 ... U_{m-1}`` of a representation.

    ``D`` is emitted as a diagonal lower factor of shape ``n x m``.
    """
    n, m = repr_.shape
    k = min(n, m)
    factors = [factor_from_repr_lower(repr_, kk) for kk in range(n - 1, 0, -1)]
    factors.append(BidiagonalFactor("lower", n, m, list(range(k)),
                                    [repr_.off[i, i] for i in range(k)],
                                    [repr_.off[i, i] * 0 for i in range(k)]))
    factors += [factor_from_repr_upper(repr_, l) for l in range(1, m)]
    return BidiagonalProduct(factors)
