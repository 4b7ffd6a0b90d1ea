"""Representation of a bidiagonal product and the split at its minimum dimension."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .passthrough import left_lower_inplace, left_upper_inplace, _factor_values
from .representation import (BDRepr, BidiagonalFactor, BidiagonalProduct, DimensionError,
                             append_trailing_rows, drop_trailing_rows, transpose)


@dataclass
class SplitProduct:
    """``A = A2 A1`` split at the first minimum dimension ``r = n_T``."""

    a2: BDRepr
    a1: BDRepr
    split_index: int
    min_dim: int
    exp2: int = 0
    """``A = 2**exp2 * A2 A1``; nonzero only when assembly had to recenter ``D``."""


def _resize_rows(rep: BDRepr, t: int) -> BDRepr:
    n = rep.nrows
    if t > n:
        return append_trailing_rows(rep, t)
    if t < n:
        return drop_trailing_rows(rep, t)
    return rep


def _left_apply_pairs(rep: BDRepr, F: BidiagonalFactor, size: int) -> None:
    """Left-multiply by the square ``size x size`` version of ``F``."""
    if F.npairs == 0:
        return
    bars, offs = _factor_values(F, rep.bar)
    if F.orientation == "lower":
        left_lower_inplace(rep.bar, rep.off, F.index, bars, offs)
    else:
        left_upper_inplace(rep.bar, rep.off, F.index, bars, offs)


# D is recentered once an exponent leaves this window (doubles reach about 2**1023)
_EXP_WINDOW = 512


def _recenter(rep: BDRepr) -> int:
    """Scale ``D`` by a power of two so its exponents straddle zero.

    Returns ``k`` with ``old matrix = 2**k * new matrix``; ``0`` when the
    exponents stay inside the window (no change then).
    """
    if rep.exact:
        return 0
    k = min(rep.shape)
    idx = np.arange(k)
    d = rep.off[idx, idx]
    nz = d[d != 0]
    if nz.size == 0:
        return 0
    _, ex = np.frexp(nz)
    lo, hi = int(ex.min()), int(ex.max())
    if -_EXP_WINDOW < lo and hi < _EXP_WINDOW:
        return 0
    shift = -((lo + hi) // 2)
    rep.off[idx, idx] = np.ldexp(d, shift)
    return -shift


def assemble(product: BidiagonalProduct, exact: bool | None = None) -> BDRepr:
    """Representation of ``B_1 B_2 ... B_K``.

    The product is built from the right, ``A_{i-1} = B_i A_i`` starting at
    the identity, when ``n_0 >= n_K`` and from the left (through the
    transpose) otherwise.  A rectangular lower factor is written as
    ``B' I`` (rows of ``A_i`` adjusted first), a rectangular upper one as
    ``I B'`` (rows adjusted after applying ``B'``).

    Parameters
    ----------
    product : BidiagonalProduct
    exact : bool, optional
        Work with exact object arrays.  Defaults to true when any factor
        stores exact values.
    """
    rep, k = _assemble(product, exact, rescale=False)
    return rep


def assemble_scaled(product: BidiagonalProduct, exact: bool | None = None) -> tuple[BDRepr, int]:
    """Like :func:`assemble`, keeping ``D`` away from underflow and overflow.

    After every factor the diagonal ``D`` is rescaled by a power of two
    whenever its exponents drift beyond ``+-512``.  Only ``D`` changes;
    the multipliers are scale free.

    Returns
    -------
    (BDRepr, int)
        ``rep`` and ``k`` with ``B_1 ... B_K = 2**k * expand(rep)``.
    """
    return _assemble(product, exact, rescale=True)


def _assemble(product: BidiagonalProduct, exact: bool | None, rescale: bool):
    if exact is None:
        exact = any(f.exact for f in product.factors)
    dims = product.dims
    if dims[0] < dims[-1]:
        rep, k = _assemble(product.transpose(), exact, rescale)
        return transpose(rep), k
    rep = BDRepr.identity(dims[-1], exact=exact)
    k = 0
    for F in reversed(product.factors):
        rows, cols = F.nrows, F.ncols
        if rep.nrows != cols:
            raise DimensionError("factor chain is not compatible")
        if F.orientation == "lower":
            rep = _resize_rows(rep, rows)
            _left_apply_pairs(rep, F, rows)
        else:
            _left_apply_pairs(rep, F, cols)
            rep = _resize_rows(rep, rows)
        if rescale:
            k += _recenter(rep)
    return rep, k


def split_at_min(product: BidiagonalProduct, exact: bool | None = None) -> SplitProduct:
    """Split ``A = A2 A1`` at the smallest index ``T`` with ``n_T`` minimal.

    Both halves come from :func:`assemble_scaled`; the combined power of two
    is kept in ``exp2``.
    """
    dims = product.dims
    r = min(dims)
    T = dims.index(r)
    K = len(product)
    if exact is None:
        exact = any(f.exact for f in product.factors)
    k2 = k1 = 0
    if T == 0:
        a2 = BDRepr.identity(r, exact=exact)
    else:
        a2, k2 = assemble_scaled(BidiagonalProduct(product.factors[:T]), exact)
    if T == K:
        a1 = BDRepr.identity(r, exact=exact)
    else:
        a1, k1 = assemble_scaled(BidiagonalProduct(product.factors[T:]), exact)
    return SplitProduct(a2=a2, a1=a1, split_index=T, min_dim=r, exp2=k1 + k2)
