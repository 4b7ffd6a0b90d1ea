"""Representations of submatrices by single row and column deletions.

Indices in this module are 0-based.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .passthrough import _work
from . import _kernels
from .representation import BDRepr, DimensionError, drop_trailing_rows, transpose


def _delete_row_grids(bar: np.ndarray, off: np.ndarray, r: int) -> None:
    """``A <- U_r A`` where ``U_r`` moves rows ``r+1 ..`` up and zeroes the last.

    ``U_r`` has the pairs ``(0, 1)`` at positions ``r .. n-2`` and ``(0, .)``
    at ``n - 1``.
    """
    n, m = bar.shape
    ub, uo = _work(max(n, m) + 1, bar)
    kern = _kernels.kernels_for(bar)
    zero = ub[0] * 0
    one = ub[0]
    for i in range(r, n):
        ub[i] = zero
        uo[i] = one if i < n - 1 else zero
    kern.left_upper(bar, off, ub, uo, r, n - 1)


def delete_row(repr_: BDRepr, r: int) -> BDRepr:
    """Representation of ``A`` without row ``r`` (0-based)."""
    n, m = repr_.shape
    if n < 2:
        raise DimensionError("cannot delete the only row")
    if not 0 <= r < n:
        raise DimensionError(f"row index {r} outside 0..{n - 1}")
    work = repr_
    if r < n - 1:
        work = repr_.copy()
        _delete_row_grids(work.bar, work.off, r)
    return drop_trailing_rows(work, n - 1)


def delete_col(repr_: BDRepr, c: int) -> BDRepr:
    """Representation of ``A`` without column ``c`` (0-based)."""
    return transpose(delete_row(transpose(repr_), c))


def _check_indices(idx: Sequence[int], size: int, what: str) -> list[int]:
    idx = [int(i) for i in idx]
    if len(set(idx)) != len(idx):
        raise DimensionError(f"duplicate {what} index")
    if any(i < 0 or i >= size for i in idx):
        raise DimensionError(f"{what} index outside 0..{size - 1}")
    if len(idx) >= size:
        raise DimensionError(f"cannot delete every {what}")
    return sorted(idx)


def extract_submatrix(repr_: BDRepr, rows: Sequence[int] = (), cols: Sequence[int] = ()) -> BDRepr:
    """Representation of ``A`` with the listed rows and columns struck out.

    Rows are deleted from the largest index downward, then columns, so the
    remaining indices stay valid.
    """
    n, m = repr_.shape
    rows = _check_indices(rows, n, "row")
    cols = _check_indices(cols, m, "column")
    out = repr_
    for r in reversed(rows):
        out = delete_row(out, r)
    if cols:
        out = transpose(out)
        for c in reversed(cols):
            out = delete_row(out, c)
        out = transpose(out)
    if out is repr_:
        out = repr_.copy()
    return out


def kept_to_deleted(keep: Sequence[int], size: int) -> list[int]:
    """Complement of a kept-index list within ``0 .. size-1``."""
    keep_set = set(int(k) for k in keep)
    return [i for i in range(size) if i not in keep_set]
