"""Subtraction-free passing-through identities and factor application.

The three standalone identities work on pair arrays (0-based):

* ``pass_upper_through_lower``: ``U L = Lbar Ubar`` for square ``n x n``
  bidiagonal factors.
* ``pass_upper_through_diag``: ``U D = Dbar Ubar`` with ``D`` of shape
  ``n x m``.
* ``pass_upper_through_upper``: ``U U' = Ubar' Ubar_{2:m}``.

An upper pair array ``(ybar, y)`` of length ``n`` describes
``biupp``: ``ybar[i]`` on the diagonal and ``y[i]`` at ``(i, i + 1)``
(``y[n - 1]`` is ignored).  Lower pair arrays use ``(i + 1, i)`` instead.

:func:`apply_factor` multiplies a representation by a square nonnegative
bidiagonal factor.  Its schedule (in the compiled kernels):

* upper factor on the left: pass it right through ``L_{n-1}, ..., L_1``
  with the first identity, through ``D`` with the second and then merge it
  into ``U_1, ..., U_{m-1}`` with the third, one factor at a time;
* lower factor on the left: split it into elementary factors and merge
  each into the lower chain by a local chase along two sub-diagonals;
* factors on the right: the same on the transposed grid.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from . import _kernels
from .representation import (BDRepr, BidiagonalFactor, DimensionError, DomainError,
                             as_value_array)


class GivensRotation(NamedTuple):
    """Rotation acting on indices ``index - 1`` and ``index``.

    As a matrix its ``[index-1, index]`` block is ``[[c, -s], [s, c]]``.
    """

    index: int
    c: float
    s: float

    def dense(self, n: int) -> np.ndarray:
        g = np.eye(n)
        i, j = self.index - 1, self.index
        g[i, i] = self.c
        g[j, j] = self.c
        g[i, j] = -self.s
        g[j, i] = self.s
        return g


def _nonneg(arr: np.ndarray, what: str) -> np.ndarray:
    arr = as_value_array(arr)
    if arr.dtype == object:
        if any(v < 0 for v in arr.flat):
            raise DomainError(f"{what}: negative value")
    elif np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise DomainError(f"{what}: negative or non-finite value")
    return arr


# ----------------------------------------------------------------------
# the three identities on pair arrays
# ----------------------------------------------------------------------
def pass_upper_through_lower(ybar, y, xbar, x):
    """Rewrite ``U L`` as ``Lbar Ubar``.

    Parameters
    ----------
    ybar, y : array_like, length n
        Pairs of the upper factor ``U``.
    xbar, x : array_like, length n
        Pairs of the lower factor ``L``.

    Returns
    -------
    (xbar_new, x_new), (ybar_new, y_new) : tuple of tuple of ndarray
        Pairs of ``Lbar`` and ``Ubar``.
    """
    ybar, y = _nonneg(ybar, "ybar"), _nonneg(y, "y")
    xbar, x = _nonneg(xbar, "xbar"), _nonneg(x, "x")
    n = len(ybar)
    if not len(y) == len(xbar) == len(x) == n:
        raise DimensionError("all pair arrays must have one length")
    kind = object if ybar.dtype == object or xbar.dtype == object else None
    xb_o, xo_o, yb_o, yo_o = (as_value_array(np.zeros(n), kind) for _ in range(4))
    if kind is object:
        for arr in (xb_o, xo_o, yb_o, yo_o):
            arr.fill(Fraction(0))
    z = ybar[0] * xbar[0]
    for i in range(n):
        last = i == n - 1
        yb_n = ybar[i + 1] if not last else 1
        xb_n = xbar[i + 1] if not last else 1
        xi = x[i] if not last else 0
        yi = y[i] if not last else 0
        w = z + xi * yi
        if w != 0:
            xb_o[i] = 1
            yb_o[i] = w
            xo_o[i] = yb_n * xi / w
            yo_o[i] = yi * xb_n
            z = yb_n * xb_n * (z / w)
        elif yi == 0:
            xb_o[i] = 0
            yb_o[i] = 1
            xo_o[i] = yb_n * xi
            yo_o[i] = 0
            z = yb_n * xb_n
        else:
            xb_o[i] = 1
            yb_o[i] = 0
            xo_o[i] = 0
            yo_o[i] = yi * xb_n
            z = yb_n * xb_n
    return (xb_o, xo_o), (yb_o, yo_o)


def pass_upper_through_diag(ybar, y, d, shape):
    """Rewrite ``U D`` as ``Dbar Ubar`` for ``D`` of shape ``(n, m)``.

    Returns
    -------
    dbar : ndarray, length min(n, m)
    (ybar_new, y_new) : pairs of ``Ubar`` (length m)
    """
    n, m = shape
    ybar, y, d = _nonneg(ybar, "ybar"), _nonneg(y, "y"), _nonneg(d, "d")
    k = min(n, m)
    if len(ybar) != n or len(y) != n or len(d) != k:
        raise DimensionError("pair arrays must have length n and d length min(n, m)")
    exact = ybar.dtype == object or d.dtype == object
    one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
    dbar = np.empty(k, dtype=object if exact else float)
    yb_o = np.empty(m, dtype=object if exact else float)
    yo_o = np.empty(m, dtype=object if exact else float)
    yb_o.fill(one)
    yo_o.fill(zero)
    for i in range(k):
        dn = d[i + 1] if i + 1 < k else zero
        yi = y[i] if i + 1 < n else zero
        t = d[i] * ybar[i]
        if t != 0:
            dbar[i] = t
            yb_o[i] = one
            yo_o[i] = dn * yi / t
        else:
            dbar[i] = one
            yb_o[i] = zero
            yo_o[i] = dn * yi
    return dbar, (yb_o, yo_o)


def pass_upper_through_upper(ybar, y, xbar, x):
    """Rewrite ``U U'`` as ``Ubar' Ubar_{2:m}``.

    Parameters
    ----------
    ybar, y : pairs of ``U`` (length m)
    xbar, x : pairs of ``U'`` (length m)

    Returns
    -------
    (xbar_new, x_new) : pairs of ``Ubar'`` (length m)
    (ybar_new, y_new) : pairs of ``Ubar_{2:m}`` (length m, position 0 is
        the trivial pair ``(1, 0)``)
    """
    ybar, y = _nonneg(ybar, "ybar"), _nonneg(y, "y")
    xbar, x = _nonneg(xbar, "xbar"), _nonneg(x, "x")
    m = len(ybar)
    if not len(y) == len(xbar) == len(x) == m:
        raise DimensionError("all pair arrays must have one length")
    exact = ybar.dtype == object or xbar.dtype == object
    one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
    xb_o = np.empty(m, dtype=object if exact else float)
    xo_o = np.empty(m, dtype=object if exact else float)
    yb_o = np.empty(m, dtype=object if exact else float)
    yo_o = np.empty(m, dtype=object if exact else float)
    xo_o.fill(zero)
    yb_o.fill(one)
    yo_o.fill(zero)
    xb_o[0] = xbar[0] * ybar[0]
    z = ybar[0] * (x[0] if m > 1 else zero)
    for i in range(m - 1):
        xn = x[i + 1] if i + 2 < m else zero
        w = z + xbar[i + 1] * y[i]
        if w != 0:
            yb_o[i + 1] = one
            xo_o[i] = w
            xb_o[i + 1] = xbar[i + 1] * ybar[i + 1]
            yo_o[i + 1] = xn * y[i] / w
            z = xn * ybar[i + 1] * (z / w)
        elif y[i] != 0:
            yb_o[i + 1] = zero
            xo_o[i] = one
            xb_o[i + 1] = zero
            yo_o[i + 1] = xn * y[i]
            z = xn * ybar[i + 1]
        else:
            yb_o[i + 1] = one
            xo_o[i] = zero
            xb_o[i + 1] = xbar[i + 1] * ybar[i + 1]
            yo_o[i + 1] = zero
            z = xn * ybar[i + 1]
    return (xb_o, xo_o), (yb_o, yo_o)


# ----------------------------------------------------------------------
# Givens factorization of a lower bidiagonal with a signed sub-diagonal
# ----------------------------------------------------------------------
def lower_inverse_to_orthogonal(xbar, x, k: int = 0, require_inverse: bool = False):
    """Rotate ``bilow({xbar_i, -x_i})`` into ``biupp({ybar_i, -y_i})``.

    ``L G_{n-1} ... G_{k+1} = U`` where ``L`` has ``xbar[i]`` at ``(i, i)``
    and ``-x[i]`` at ``(i + 1, i)`` for ``i >= k`` (identity above ``k``)
    and ``U`` has ``ybar[i]`` at ``(i, i)`` and ``-y[i]`` at ``(i, i + 1)``.
    Only magnitudes are handled; signs are implied.

    Parameters
    ----------
    xbar, x : array_like of float, length n (``x[n-1]`` ignored)
    k : int
        First active index.
    require_inverse : bool
        Raise :class:`ZeroDivisionError` if some ``xbar[i] == 0`` since the
        identity ``L^{-1} = G U^{-1}`` then has no meaning.

    Returns
    -------
    rotations : list of GivensRotation, ordered ``G_{n-1}, ..., G_{k+1}``
    ybar, y : ndarray
    """
    xbar = np.asarray(xbar, dtype=float)
    x = np.asarray(x, dtype=float)
    n = len(xbar)
    if require_inverse and np.any(xbar[k:] == 0):
        raise ZeroDivisionError("singular lower factor")
    ybar = np.ones(n)
    y = np.zeros(n)
    rots = []
    if n == 0 or k >= n:
        return rots, ybar, y
    z = xbar[n - 1]
    for i in range(n - 1, k, -1):
        xi = x[i - 1]
        if xi == 0:
            c, s, yb = 1.0, 0.0, z
        else:
            yb = math.hypot(z, xi)
            c, s = z / yb, xi / yb
        ybar[i] = yb
        rots.append(GivensRotation(i, c, s))
        y[i - 1] = s * xbar[i - 1]
        z = c * xbar[i - 1]
    ybar[k] = z
    return rots, ybar, y


class OrthogonalAccumulator:
    """Product ``Q`` of rotations and cyclic permutations, applied on the right.

    Parameters
    ----------
    dimension : int
    mode : {"log", "dense"}
        ``"log"`` keeps the ordered list of moves and materializes on
        demand; ``"dense"`` updates an explicit matrix after every move.
    """

    def __init__(self, dimension: int, mode: str = "log"):
        if mode not in ("log", "dense"):
            raise ValueError("mode must be 'log' or 'dense'")
        self.dimension = int(dimension)
        self.mode = mode
        self.log: list[tuple] = []
        self._q = np.eye(self.dimension) if mode == "dense" else None

    def rotate(self, i: int, j: int, c: float, s: float) -> None:
        """``Q <- Q R`` with ``R[[i, j], [i, j]] = [[c, -s], [s, c]]``."""
        if self.mode == "log":
            self.log.append(("rot", i, j, c, s))
        else:
            _rotate_cols(self._q, i, j, c, s)

    def cycle(self, i: int, j: int) -> None:
        """``Q <- Q P`` where ``P`` moves column ``i`` of ``Q`` to ``j`` (``i <= j``).

        Columns ``i + 1 .. j`` shift one place to the left.
        """
        if i == j:
            return
        if self.mode == "log":
            self.log.append(("cyc", i, j))
        else:
            _cycle_cols(self._q, i, j)

    def __len__(self) -> int:
        return len(self.log)

    def apply_to(self, mat: np.ndarray) -> np.ndarray:
        """Return ``mat @ Q`` without forming ``Q`` (log mode replays moves)."""
        out = np.array(mat, dtype=float, copy=True)
        if self.mode == "dense":
            return out @ self._q
        for mv in self.log:
            if mv[0] == "rot":
                _rotate_cols(out, mv[1], mv[2], mv[3], mv[4])
            else:
                _cycle_cols(out, mv[1], mv[2])
        return out

    def matrix(self) -> np.ndarray:
        """Materialize ``Q`` (cost ``O(dimension * moves)``)."""
        if self.mode == "dense":
            return self._q.copy()
        return self.apply_to(np.eye(self.dimension))


def _rotate_cols(q: np.ndarray, i: int, j: int, c: float, s: float) -> None:
    qi = q[:, i].copy()
    qj = q[:, j]
    q[:, i] = c * qi + s * qj
    q[:, j] = c * qj - s * qi


def _cycle_cols(q: np.ndarray, i: int, j: int) -> None:
    col = q[:, i].copy()
    q[:, i:j] = q[:, i + 1:j + 1]
    q[:, j] = col


# ----------------------------------------------------------------------
# applying factors to a representation
# ----------------------------------------------------------------------
def _work(size: int, like: np.ndarray):
    if like.dtype == object:
        ub = np.empty(size, dtype=object)
        ub.fill(Fraction(1))
        uo = np.empty(size, dtype=object)
        uo.fill(Fraction(0))
    else:
        ub = np.ones(size)
        uo = np.zeros(size)
    return ub, uo


def _factor_values(F: BidiagonalFactor, like: np.ndarray):
    if like.dtype == object:
        bars = np.empty(F.npairs, dtype=object)
        offs = np.empty(F.npairs, dtype=object)
        for t in range(F.npairs):
            bars[t] = _to_exact(F.bar_values[t])
            offs[t] = _to_exact(F.off_values[t])
        return bars, offs
    return (np.asarray(F.bar_values, dtype=float),
            np.asarray(F.off_values, dtype=float))


def _to_exact(v):
    if isinstance(v, float):
        return Fraction(v)
    return v


def left_upper_inplace(bar: np.ndarray, off: np.ndarray, index, ybar, y) -> None:
    """``A <- U A`` on grids, ``U`` given by pairs at positions ``index``."""
    n, m = bar.shape
    ub, uo = _work(max(n, m) + 1, bar)
    if len(index) == 0:
        return
    for p, b, o in zip(index, ybar, y):
        ub[p] = b
        uo[p] = o if p < n - 1 else uo[p]
    kern = _kernels.kernels_for(bar)
    kern.left_upper(bar, off, ub, uo, int(min(index)), int(max(index)))


def left_lower_inplace(bar: np.ndarray, off: np.ndarray, index, xbar, x) -> None:
    """``A <- L A`` on grids, ``L`` given by pairs at positions ``index``."""
    if len(index) == 0:
        return
    kern = _kernels.kernels_for(bar)
    idx = np.asarray(index, dtype=np.int64)
    if bar.dtype == object:
        av = np.empty(len(idx), dtype=object)
        bv = np.empty(len(idx), dtype=object)
        av[:] = list(xbar)
        bv[:] = list(x)
    else:
        av = np.asarray(xbar, dtype=float)
        bv = np.asarray(x, dtype=float)
    kern.left_lower_seq(bar, off, idx, av, bv)


def apply_factor(repr_: BDRepr, F: BidiagonalFactor, side: str = "left",
                 inplace: bool = False) -> BDRepr:
    """Multiply a representation by a square bidiagonal factor.

    Parameters
    ----------
    repr_ : BDRepr
    F : BidiagonalFactor
        Square factor, ``n x n`` for ``side="left"`` and ``m x m`` for
        ``side="right"``.
    side : {"left", "right"}
    inplace : bool
        Overwrite ``repr_`` instead of working on a copy.

    Returns
    -------
    BDRepr
        Representation of ``F A`` or ``A F``.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    if F.nrows != F.ncols:
        raise DimensionError("apply_factor needs a square factor")
    n, m = repr_.shape
    need = n if side == "left" else m
    if F.nrows != need:
        raise DimensionError(f"factor of size {F.nrows} does not fit {n}x{m} on the {side}")
    out = repr_ if inplace else repr_.copy()
    if F.exact and not out.exact:
        raise DomainError("exact factor applied to a floating representation")
    bar, off = out.bar, out.off
    if side == "right":
        bar, off = bar.T, off.T
    bars, offs = _factor_values(F, bar)
    lower = F.orientation == "lower"
    if side == "right":
        lower = not lower
    if lower:
        left_lower_inplace(bar, off, F.index, bars, offs)
    else:
        left_upper_inplace(bar, off, F.index, bars, offs)
    return out
