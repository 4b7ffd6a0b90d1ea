"""Orthogonal deflation of the zero singular values of ``A = A2 A1``.

The driver works stage by stage on the trailing blocks ``W2`` (``n x r``)
and ``W1`` (``r x m``) of the two representations.  One stage:

1. delete the zero rows of ``W1`` revealed by column 0 of its grid together
   with the matching columns of ``W2``; then clear the column-0 ``off``
   entries of ``W1`` and multiply ``W2`` by the inverse factor on the right;
2. delete the zero rows of ``W2`` (cyclic row permutations logged in ``G``);
   clear its column-0 ``off`` entries and apply the upper factor obtained
   from the Givens factorization from the left (rotations logged in ``G``);
3. the column version of step 1 for ``W2`` row 0 and ``W1``;
4. the column version of step 2 for ``W1`` (``V``), keeping the entry
   ``(0, 1)`` which becomes the super-diagonal of ``Bbar``.

Afterwards ``W2 W1 = [[b a, b a c e_0^T], [0, W2' W1']]`` with
``W2' = W2[1:, 1:]`` and ``W1' = W1[1:, 1:]``; the stage records the pivot
``b a`` and the super-diagonal entry ``b a c`` and continues on the
trailing grids.  When ``T = 0`` (or ``T = K``) only one representation is
present and it plays both roles.

Zero tests are exact comparisons with zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .assembly import SplitProduct, split_at_min
from .extraction import delete_col, delete_row
from .passthrough import OrthogonalAccumulator, lower_inverse_to_orthogonal
from .representation import BDRepr, BidiagonalProduct


class DeflationError(RuntimeError):
    """Raised in strict mode when a pivot vanishes without a revealed zero."""


@dataclass
class PermutationMove:
    """Cyclic move of row (or column) ``index`` to the end of the active range."""

    kind: str
    index: int


@dataclass
class DeflationResult:
    """Data of ``G^T A V = diag(Bbar, 0)``."""

    bbar_diag: np.ndarray
    bbar_super: np.ndarray
    rank: int
    out_rows: int
    out_cols: int
    g_acc: OrthogonalAccumulator | None = None
    v_acc: OrthogonalAccumulator | None = None
    moves: list = field(default_factory=list)
    zero_pivots: int = 0
    chases: int = 0
    exp2: int = 0

    @property
    def scale(self) -> float:
        """``2**exp2``: the stored ``Bbar`` entries times this are the true ones."""
        return math.ldexp(1.0, self.exp2)

    def bbar_dense(self) -> np.ndarray:
        """Dense ``rank x rank`` upper bidiagonal ``Bbar`` (unscaled)."""
        b = np.diag(np.asarray(self.bbar_diag, dtype=float))
        for i, e in enumerate(self.bbar_super):
            b[i, i + 1] = e
        return np.ldexp(b, self.exp2)

    def b_dense(self) -> np.ndarray:
        """Dense ``diag(Bbar, 0)`` of shape ``(out_rows, out_cols)``."""
        out = np.zeros((self.out_rows, self.out_cols))
        r = self.rank
        out[:r, :r] = self.bbar_dense()
        return out


# ----------------------------------------------------------------------
# the building blocks
# ----------------------------------------------------------------------
def reveal_zeros(repr_: BDRepr, side: str = "rows", pivot: int = 0) -> list[int]:
    """Indices of rows (columns) proven zero by vanishing ``bar`` entries.

    ``bar[k, pivot] == 0`` with ``k > pivot`` means row ``k - 1`` is zero
    (``side="rows"``); ``bar[pivot, k] == 0`` means column ``k - 1`` is zero
    (``side="cols"``).  The indices are 0-based and ascending.
    """
    if side == "rows":
        col = repr_.bar[pivot + 1:, pivot]
    elif side == "cols":
        col = repr_.bar[pivot, pivot + 1:]
    else:
        raise ValueError("side must be 'rows' or 'cols'")
    return [int(k) + pivot for k in np.nonzero(col == 0)[0]]


def eliminate_column(repr_: BDRepr, pivot: int = 0, start: int | None = None):
    """Clear the ``off`` entries of column ``pivot`` below row ``start``.

    Returns the cleared magnitudes ``x`` with ``x[i]`` taken from grid row
    ``i + 1`` (zero for rows that were not cleared).  The matrix changes to
    ``L A`` with ``L = bilow({1, -x_i})``; no arithmetic is performed.
    """
    start = pivot + 1 if start is None else start
    n = repr_.nrows
    col = repr_.bar[start:, pivot]
    if np.any(col != 1):
        raise AssertionError("eliminate_column needs unit bars below the pivot")
    x = np.zeros(n, dtype=repr_.off.dtype)
    if repr_.exact:
        x[:] = repr_.off[0, 0] * 0
    x[start - 1:n - 1] = repr_.off[start:, pivot]
    repr_.off[start:, pivot] = repr_.off[start:, pivot] * 0
    return repr_, x


def _hypot(a, b):
    if isinstance(a, float) and isinstance(b, float):
        return math.hypot(a, b)
    return (a * a + b * b).sqrt()


def _seq_arrays(bar, values_b, values_o, idx):
    if bar.dtype == object:
        vb = np.empty(len(idx), dtype=object)
        vo = np.empty(len(idx), dtype=object)
        vb[:] = list(values_b)
        vo[:] = list(values_o)
    else:
        vb = np.asarray(values_b, dtype=float)
        vo = np.asarray(values_o, dtype=float)
    return vb, vo


def _apply_upper_seq(bar, off, idx, yb, yo) -> None:
    """``A <- F_{idx[0]} ... F_{idx[-1]} A`` (rightmost factor applied first)."""
    if len(idx) == 0:
        return
    n, m = bar.shape
    kern = _kernels.kernels_for(bar)
    if bar.dtype == object:
        ub = np.empty(max(n, m) + 1, dtype=object)
        uo = np.empty(max(n, m) + 1, dtype=object)
        one = yb[0] / yb[0] if yb[0] != 0 else yb[0] + 1
        ub.fill(one)
        uo.fill(one * 0)
    else:
        ub = np.ones(max(n, m) + 1)
        uo = np.zeros(max(n, m) + 1)
    vb, vo = _seq_arrays(bar, yb, yo, idx)
    kern.left_upper_seq(bar, off, np.asarray(idx, dtype=np.int64), vb, vo, ub, uo)


def orthogonalize_left(repr_: BDRepr, mags, acc: OrthogonalAccumulator | None = None,
                       offset: int = 0, start: int = 0) -> BDRepr:
    """Replace ``L^{-1} A`` (``L = bilow({1, -mags})``) by ``Q^T L^{-1} A``.

    ``repr_`` holds ``A`` (column ``start - 1`` already cleared by
    :func:`eliminate_column`).  The Givens factorization gives
    ``Q^T L^{-1} = U^{-1}``, a product of nonnegative elementary upper
    factors which is applied to ``repr_`` in place.  The rotations of ``Q``
    are logged into ``acc`` on indices shifted by ``offset``.
    """
    n = repr_.nrows
    mags = list(mags)
    if n - start <= 1 or all(v == 0 for v in mags[start:n - 1]):
        return repr_
    one = mags[0] * 0 + 1
    xbar = [one] * n
    rots, ybar, y = _q1(xbar, mags, start)
    if acc is not None:
        for g in rots:
            acc.rotate(offset + g.index - 1, offset + g.index, float(g.c), float(g.s))
    idx = list(range(start, n))
    yb = [one / ybar[i] for i in idx]
    yo = [y[i] / ybar[i] if i < n - 1 else one * 0 for i in idx]
    _apply_upper_seq(repr_.bar, repr_.off, idx, yb, yo)
    return repr_


def _q1(xbar, x, k):
    if all(isinstance(v, float) for v in x) or isinstance(xbar[0], float):
        rots, ybar, y = lower_inverse_to_orthogonal(np.asarray(xbar, float),
                                                    np.asarray(x, float), k)
        return rots, list(ybar), list(y)
    # generic number types (instrumented arithmetic)
    from .passthrough import GivensRotation
    n = len(xbar)
    zero = x[0] * 0
    ybar = [zero + 1] * n
    y = [zero] * n
    rots = []
    z = xbar[n - 1]
    for i in range(n - 1, k, -1):
        xi = x[i - 1]
        if xi == 0:
            c, s, yb = zero + 1, zero, z
        else:
            yb = _hypot(z, xi)
            c, s = z / yb, xi / yb
        ybar[i] = yb
        rots.append(GivensRotation(i, c, s))
        y[i - 1] = s * xbar[i - 1]
        z = c * xbar[i - 1]
    ybar[k] = z
    return rots, ybar, y


def _right_inverse_lower(repr_: BDRepr, mags) -> None:
    """``A <- A E_{r-2}(1, x_{r-2}) ... E_0(1, x_0)`` in place (``r = ncols``)."""
    m = repr_.ncols
    idx = [i for i in range(m - 1) if mags[i] != 0]
    if not idx:
        return
    one = mags[idx[0]] / mags[idx[0]]
    _apply_upper_seq(repr_.bar.T, repr_.off.T, idx, [one] * len(idx), [mags[i] for i in idx])


def _left_inverse_upper(repr_: BDRepr, mags) -> None:
    """``A <- F_0(1, x_0) ... F_{r-2}(1, x_{r-2}) A`` in place (``r = nrows``)."""
    n = repr_.nrows
    idx = [i for i in range(n - 1) if mags[i] != 0]
    if not idx:
        return
    one = mags[idx[0]] / mags[idx[0]]
    _apply_upper_seq(repr_.bar, repr_.off, idx, [one] * len(idx), [mags[i] for i in idx])


# ----------------------------------------------------------------------
# the driver
# ----------------------------------------------------------------------
class _State:
    def __init__(self, w2, w1, n0, nk, accumulate, strict):
        self.w2 = w2          # n x r (None when T = 0)
        self.w1 = w1          # r x m (None when T = K)
        self.diag: list = []
        self.sup: list = []
        self.g = OrthogonalAccumulator(n0) if accumulate else None
        self.v = OrthogonalAccumulator(nk) if accumulate else None
        self.moves: list = []
        self.strict = strict
        self.zero_pivots = 0
        self.chases = 0

    # left object: global rows; right object: global columns
    @property
    def left(self):
        return self.w2 if self.w2 is not None else self.w1

    @property
    def right(self):
        return self.w1 if self.w1 is not None else self.w2

    @property
    def two(self) -> bool:
        return self.w2 is not None and self.w1 is not None

    def set_left(self, rep):
        if self.w2 is not None:
            self.w2 = rep
        else:
            self.w1 = rep

    def set_right(self, rep):
        if self.w1 is not None:
            self.w1 = rep
        else:
            self.w2 = rep

    @property
    def t(self) -> int:
        return len(self.diag)

    def empty(self) -> bool:
        if self.left is None or self.right is None:
            return True
        return False


def _drop_row(rep, i):
    if rep is None or rep.nrows <= 1:
        return None
    return delete_row(rep, i)


def _drop_col(rep, j):
    if rep is None or rep.ncols <= 1:
        return None
    return delete_col(rep, j)


def _delete_global_row(st: _State, i: int) -> None:
    n = st.left.nrows
    if st.g is not None:
        st.g.cycle(st.t + i, st.t + n - 1)
    st.moves.append(PermutationMove("row", st.t + i))
    new = _drop_row(st.left, i)
    if new is None:
        st.w2 = st.w1 = None
    else:
        st.set_left(new)


def _delete_global_col(st: _State, j: int) -> None:
    m = st.right.ncols
    if j == 0 and st.t > 0 and st.sup and st.sup[-1] != 0:
        _chase_column(st)
    if st.v is not None:
        st.v.cycle(st.t + j, st.t + m - 1)
    st.moves.append(PermutationMove("col", st.t + j))
    new = _drop_col(st.right, j)
    if new is None:
        st.w2 = st.w1 = None
    else:
        st.set_right(new)


def _delete_inner(st: _State, k: int) -> None:
    """Delete row ``k`` of ``W1`` and column ``k`` of ``W2`` (both present)."""
    w1 = _drop_row(st.w1, k)
    w2 = _drop_col(st.w2, k)
    if w1 is None or w2 is None:
        st.w1 = st.w2 = None
    else:
        st.w1, st.w2 = w1, w2


def _chase_column(st: _State) -> None:
    """Rotate the last super-diagonal entry of ``Bbar`` out of column ``t``.

    Column ``t`` of ``G^T A V`` then vanishes.  Right rotations on the
    columns ``(j, t)``, ``j = t-1, ..., 0``, each zero the current entry
    with the diagonal ``d_j`` and move a multiple of ``e_{j-1}`` up; all
    updates are products, quotients and ``hypot``.  Signs of the moving
    entry are tracked separately so the stored entries stay nonnegative.
    """
    col = st.t
    phi = st.sup[-1]
    sign = 1.0
    st.sup[-1] = phi * 0
    st.chases += 1
    for j in range(col - 1, -1, -1):
        d = st.diag[j]
        r = _hypot(d, phi)
        c = d / r
        s = phi / r
        st.diag[j] = r
        if st.v is not None:
            st.v.rotate(j, col, float(c), sign * float(s))
        if j == 0:
            break
        e = st.sup[j - 1]
        st.sup[j - 1] = c * e
        phi = s * e
        sign = -sign
        if phi == 0:
            break


_OK, _RESTART, _EMPTY = 0, 1, 2


def _step_inner_rows(st: _State) -> bool:
    """Step 1.  Returns False when the problem became empty."""
    while True:
        zs = reveal_zeros(st.w1, "rows")
        if not zs:
            break
        for k in reversed(zs):
            _delete_inner(st, k)
            if st.empty():
                return False
    if st.w1.nrows > 1:
        _, mags = eliminate_column(st.w1, 0)
        _right_inverse_lower(st.w2, mags)
    return True


def _step_left(st: _State) -> bool:
    """Step 2 (rows of the left object)."""
    while True:
        zs = reveal_zeros(st.left, "rows")
        if not zs:
            break
        for k in reversed(zs):
            _delete_global_row(st, k)
            if st.empty():
                return False
    left = st.left
    if left.nrows > 1:
        _, mags = eliminate_column(left, 0)
        orthogonalize_left(left, mags, st.g, st.t, 0)
    return True


def _step_inner_cols(st: _State) -> int:
    """Step 3.  Deletions invalidate the earlier steps and force a restart."""
    zs = reveal_zeros(st.w2, "cols")
    if zs:
        for k in reversed(zs):
            _delete_inner(st, k)
            if st.empty():
                return _EMPTY
        return _RESTART
    if st.w2.ncols > 1:
        w2t = BDRepr(st.w2.bar.T, st.w2.off.T, normalize=False, copy=False, check=False)
        _, mags = eliminate_column(w2t, 0)
        _left_inverse_upper(st.w1, mags)
    return _OK


def _step_right(st: _State) -> int:
    """Step 4 (columns of the right object); restarts like step 3."""
    zs = reveal_zeros(st.right, "cols")
    if zs:
        for k in reversed(zs):
            _delete_global_col(st, k)
            if st.empty():
                return _EMPTY
        return _RESTART
    right = st.right
    if right.ncols > 2:
        rt = BDRepr(right.bar.T, right.off.T, normalize=False, copy=False, check=False)
        _, mags = eliminate_column(rt, 0, start=2)
        orthogonalize_left(rt, mags, st.v, st.t, 1)
    return _OK


def _pivot_failure(st: _State, what: str) -> None:
    st.zero_pivots += 1
    if st.strict:
        raise DeflationError(f"zero pivot ({what}) at stage {st.t} without a revealed zero")


def _run_stage(st: _State) -> bool:
    """One stage; returns False when the remaining block is empty."""
    while True:
        if st.two and not _step_inner_rows(st):
            return False
        if not _step_left(st):
            return False
        left = st.left
        if left.off[0, 0] == 0:
            # row 0 of the left object vanishes (zero pivot extension)
            _pivot_failure(st, "row")
            _delete_global_row(st, 0)
            if st.empty():
                return False
            continue
        if st.two:
            flag = _step_inner_cols(st)
            if flag == _EMPTY:
                return False
            if flag == _RESTART:
                continue
        flag = _step_right(st)
        if flag == _EMPTY:
            return False
        if flag == _RESTART:
            continue
        right = st.right
        if right.off[0, 0] == 0:
            _pivot_failure(st, "column")
            if st.two:
                _delete_inner(st, 0)
            else:
                _delete_global_row(st, 0)
            if st.empty():
                return False
            continue
        break
    # record the pivot row of Bbar
    if st.two:
        d = st.w2.off[0, 0] * st.w1.off[0, 0]
    else:
        d = st.left.off[0, 0]
    right = st.right
    c = right.off[0, 1] if right.ncols > 1 else d * 0
    st.diag.append(d)
    st.sup.append(d * c)
    # continue on the trailing grids
    nxt = []
    for rep in (st.w2, st.w1):
        if rep is None:
            nxt.append(None)
        elif rep.nrows <= 1 or rep.ncols <= 1:
            nxt.append("empty")
        else:
            nxt.append(BDRepr(rep.bar[1:, 1:].copy(), rep.off[1:, 1:].copy(),
                              normalize=False, copy=False, check=False))
    if "empty" in nxt:
        st.w2 = st.w1 = None
        return False
    st.w2, st.w1 = nxt
    return True


def periodic_deflate(split: SplitProduct | BidiagonalProduct, accumulate: bool = False,
                     strict: bool = False) -> DeflationResult:
    """Deflate every zero singular value of ``A = A2 A1``.

    Parameters
    ----------
    split : SplitProduct or BidiagonalProduct
        A product is split at its minimum dimension first.
    accumulate : bool
        Log the orthogonal factors ``G`` and ``V``.
    strict : bool
        Raise :class:`DeflationError` on a vanishing pivot instead of
        deflating the corresponding zero row or column.

    Returns
    -------
    DeflationResult
    """
    if isinstance(split, BidiagonalProduct):
        split = split_at_min(split)
    n0, nk = split.a2.nrows, split.a1.ncols
    T = split.split_index
    w2 = split.a2.copy()
    w1 = split.a1.copy()
    # an identity half is dropped; its partner carries both roles
    if T == 0:
        w2 = None
    elif w1.nrows == w1.ncols and _is_identity(w1):
        w1 = None
    st = _State(w2, w1, n0, nk, accumulate, strict)
    while not st.empty():
        if not _run_stage(st):
            break
    # a trailing super-diagonal entry beyond the last pivot is rotated away
    if st.sup and st.sup[-1] != 0:
        _chase_column(st)
    r = len(st.diag)
    diag = np.array(st.diag, dtype=object if _exact(st.diag) else float)
    sup = np.array(st.sup[:max(r - 1, 0)], dtype=object if _exact(st.sup) else float)
    return DeflationResult(bbar_diag=diag, bbar_super=sup, rank=r, out_rows=n0, out_cols=nk,
                           g_acc=st.g, v_acc=st.v, moves=st.moves,
                           zero_pivots=st.zero_pivots, chases=st.chases, exp2=split.exp2)


def _exact(vals) -> bool:
    return any(not isinstance(v, (float, np.floating)) for v in vals)


def _is_identity(rep: BDRepr) -> bool:
    n, m = rep.shape
    eye = np.eye(n, m) != 0
    return bool(np.all(rep.bar == 1) and np.all(rep.off[eye] == 1) and np.all(rep.off[~eye] == 0))
