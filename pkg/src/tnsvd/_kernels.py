"""Hot loops of the pass operations, written once and compiled twice.

Every routine here operates in place on the ``bar``/``off`` grids of a
representation (possibly transposed views) and only uses ``+``, ``*``,
``/`` and comparisons with zero on the stored values.  :func:`build`
returns a namespace of the routines wrapped by a decorator; the package
builds one plain-Python namespace (used for exact Fraction arithmetic and
instrumented numbers) and one numba-compiled namespace (used for float64
grids).  Both run the same source, so exact tests exercise the production
code path.

Index conventions (0-based, grid of shape ``n x m``):

* ``L_k`` (``1 <= k <= n-1``) holds positions ``p`` in
  ``[k-1, min(n-2, m+k-2)]`` at grid cell ``(p+1, p+1-k)``.
* ``U_l`` (``1 <= l <= m-1``) holds positions ``p`` in
  ``[l-1, min(m-2, n+l-2)]`` at grid cell ``(p+1-l, p+1)``.
* ``D`` is ``off[i, i]``.

Positions outside those ranges act on rows (columns) that are identically
zero in the encoded product, which is why pass results landing there may be
discarded.
"""
from __future__ import annotations

from fractions import Fraction
from types import SimpleNamespace


def build(decorate, ONE=1.0, ZERO=0.0):
    """Create the kernel namespace with every routine wrapped by ``decorate``.

    ``ONE`` and ``ZERO`` are the constants written into value slots; the
    exact namespace uses Fractions so that no float leaks into exact grids.
    """

    @decorate
    def pt1_window(bar, off, k, ub, uo, lo, hi):
        # U L_k = Lbar_k Ubar (pt1) restricted to the positions the carried
        # upper factor can influence.  Starts at ``lo`` in the neutral state
        # and stops once the carried state is neutral again beyond ``hi``.
        n = bar.shape[0]
        m = bar.shape[1]
        pmin = k - 1
        pmax = min(n - 2, m + k - 2)
        # the off entry at position lo-1 is scaled by the carried diagonal
        # at lo, so the sweep starts one position early in the neutral state
        i = lo - 1 if lo > 0 else 0
        if pmin <= i <= pmax:
            xb_i = bar[i + 1, i + 1 - k]
            xo_i = off[i + 1, i + 1 - k]
        else:
            xb_i = ONE
            xo_i = ZERO
        z = ub[i] * xb_i
        while True:
            yo_i = uo[i]
            last = i == n - 1
            if last:
                xb_n = ONE
                xo_n = ZERO
                yb_n = ONE
            else:
                if pmin <= i + 1 <= pmax:
                    xb_n = bar[i + 2, i + 2 - k]
                    xo_n = off[i + 2, i + 2 - k]
                else:
                    xb_n = ONE
                    xo_n = ZERO
                yb_n = ub[i + 1]
            w = z + xo_i * yo_i
            if w != 0:
                nxb = ONE
                nyb = w
                nxo = yb_n * xo_i / nyb
                nyo = yo_i * xb_n
                zn = yb_n * xb_n * (z / nyb)
            elif yo_i == 0:
                nxb = ZERO
                nyb = ONE
                nxo = yb_n * xo_i
                nyo = ZERO
                zn = yb_n * xb_n
            else:
                nxb = ONE
                nyb = ZERO
                nxo = ZERO
                nyo = yo_i * xb_n
                zn = yb_n * xb_n
            if i < pmin or last:
                # diagonal zero outside the factor's band: it commutes with
                # the factor and is folded into the carried upper factor
                if nxb == 0:
                    nyb = ZERO
                    nyo = ZERO
            elif i <= pmax:
                bar[i + 1, i + 1 - k] = nxb
                off[i + 1, i + 1 - k] = nxo
            ub[i] = nyb
            uo[i] = nyo
            if last:
                return max(hi, i)
            z = zn
            if i >= hi and zn == xb_n:
                return max(hi, i)
            i += 1
            xb_i = xb_n
            xo_i = xo_n

    @decorate
    def pt2_window(off, ub, uo, lo, hi):
        # U D = Dbar Ubar (pt2) on the carried window; positions where the
        # carried factor is trivial keep the copy choice.
        n = off.shape[0]
        m = off.shape[1]
        mn = min(n, m)
        top = hi
        for i in range(lo, hi + 1):
            if i >= mn:
                ub[i] = ONE
                uo[i] = ZERO
                continue
            if ub[i] == 1 and uo[i] == 0:
                continue
            d = off[i, i]
            t = d * ub[i]
            if i + 1 < mn:
                dn = off[i + 1, i + 1]
            else:
                dn = ZERO
            if t != 0:
                off[i, i] = t
                ub[i] = ONE
                uo[i] = dn * uo[i] / t
            else:
                off[i, i] = ONE
                ub[i] = ZERO
                uo[i] = dn * uo[i]
        if top > mn - 1:
            top = mn - 1
        return top

    @decorate
    def push_col_scale(bar, off, delta, lmax):
        # Ubar_1 ... Ubar_lmax diag(delta at column m-1) moved to the left
        # into D: scales entry (m-2, m-1) of each upper factor.
        n = off.shape[0]
        m = off.shape[1]
        c = m - 1
        for l in range(1, lmax + 1):
            p = m - 2
            if l - 1 <= p <= min(m - 2, n + l - 2):
                off[p + 1 - l, c] = off[p + 1 - l, c] * delta
        if c < n:
            off[c, c] = off[c, c] * delta

    @decorate
    def pt3_window(bar, off, l, ub, uo, lo, hi):
        # Ubar_{l:} U_l = U'_l Ubar_{l+1:} (pt3) restricted to the carried
        # window.  Returns (corner, new_hi): ``corner`` is the diagonal that
        # the new factor would need at position m-1.
        n = off.shape[0]
        m = off.shape[1]
        qmin = l - 1
        qmax = min(m - 2, n + l - 2)
        i = lo
        if qmin <= i <= qmax:
            xb_i = bar[i + 1 - l, i + 1]
            xo_i = off[i + 1 - l, i + 1]
        else:
            xb_i = ONE
            xo_i = ZERO
        yb_i = ub[i]
        yo_i = uo[i]
        corner = xb_i * yb_i
        if corner != 1 and qmin <= i <= qmax:
            bar[i + 1 - l, i + 1] = corner
            corner = ONE
        elif i != m - 1:
            corner = ONE
        z = yb_i * xo_i
        ub[i] = ONE
        uo[i] = ZERO
        while i <= m - 2:
            if qmin <= i + 1 <= qmax:
                xb_n = bar[i + 2 - l, i + 2]
                xo_n = off[i + 2 - l, i + 2]
            else:
                xb_n = ONE
                xo_n = ZERO
            yb_n = ub[i + 1]
            yo_n = uo[i + 1]
            w = z + xb_n * yo_i
            if w != 0:
                nyb = ONE
                nxo = w
                nxb = xb_n * yb_n / nyb
                nyo = xo_n * yo_i / nxo
                zn = xo_n * yb_n * (z / (nyb * nxo))
            elif yo_i != 0:
                nyb = ZERO
                nxo = ONE
                nxb = ZERO
                nyo = xo_n * yo_i
                zn = xo_n * yb_n
            else:
                nyb = ONE
                nxo = ZERO
                nxb = xb_n * yb_n
                nyo = ZERO
                zn = xo_n * yb_n
            if qmin <= i <= qmax:
                off[i + 1 - l, i + 1] = nxo
            if i + 1 <= qmax:
                bar[i + 2 - l, i + 2] = nxb
            elif i + 1 == m - 1:
                corner = nxb
            ub[i + 1] = nyb
            uo[i + 1] = nyo
            yo_i = yo_n
            z = zn
            i += 1
            if i > hi and z == xo_n:
                return corner, i
        return corner, i

    @decorate
    def left_upper(bar, off, ub, uo, lo, hi):
        # Replace the encoded A by U A for the upper bidiagonal U whose pairs
        # are (ub[i], uo[i]); U is trivial outside [lo, hi].  Schedule:
        # pt1 through L_{n-1}, ..., L_1, then pt2 through D, then a pt3
        # cascade through U_1, ..., U_{m-1}; leftover diagonal scalings at
        # the last index are pushed into the neighbouring factors.
        n = off.shape[0]
        m = off.shape[1]
        while lo <= hi and ub[lo] == 1 and uo[lo] == 0:
            lo += 1
        while hi >= lo and ub[hi] == 1 and uo[hi] == 0:
            hi -= 1
        if lo > hi:
            return
        for k in range(n - 1, 0, -1):
            if k - 1 > hi + 1 or lo > m + k - 1:
                continue
            hi = pt1_window(bar, off, k, ub, uo, lo, hi)
            while lo <= hi and ub[lo] == 1 and uo[lo] == 0:
                lo += 1
            if lo > hi:
                return
        hi = pt2_window(off, ub, uo, lo, hi)
        # the carried factor now lives on the column space (size m)
        while lo <= hi and ub[lo] == 1 and uo[lo] == 0:
            lo += 1
        while hi >= lo and ub[hi] == 1 and uo[hi] == 0:
            hi -= 1
        for i in range(max(lo, 0), n):
            if i >= m:
                ub[i] = ONE
                uo[i] = ZERO
        if lo > hi:
            return
        for l in range(1, m):
            res = pt3_window(bar, off, l, ub, uo, lo, hi)
            corner = res[0]
            hi = res[1]
            lo += 1
            if corner != 1:
                push_col_scale(bar, off, corner, l - 1)
            while lo <= hi and ub[lo] == 1 and uo[lo] == 0:
                lo += 1
            if lo > hi:
                return
        # leftover: only the diagonal at position m-1 can remain
        delta = ub[m - 1]
        ub[m - 1] = ONE
        uo[m - 1] = ZERO
        if delta != 1:
            push_col_scale(bar, off, delta, m - 1)

    @decorate
    def row_scale(bar, off, p, a):
        # diag_p(a) A with a > 0 (or p = n-1): pushed right through every
        # lower factor (entry (p, p-1) times a, entry (p+1, p) divided by a)
        # and absorbed into D.
        n = off.shape[0]
        m = off.shape[1]
        for k in range(n - 1, 0, -1):
            c = p - k
            if 0 <= c < m and p - 1 >= k - 1:
                off[p, c] = off[p, c] * a
            c = p + 1 - k
            if p <= n - 2 and p >= k - 1 and 0 <= c < m:
                off[p + 1, c] = off[p + 1, c] / a
        if p < m:
            off[p, p] = off[p, p] * a

    @decorate
    def left_lower_elem(bar, off, p, a1, b1):
        # E_p(a1, b1) A for a1 in {0, 1}.  E_p commutes with L_k for k >= p+3;
        # E_p L_{p+2} L_{p+1} is rewritten as L'_{p+2} L'_{p+1} by a chase:
        # at step j the braid E_q(a1,b1) E_{q+1}(a2,b2) E_q(a3,b3) =
        # E_{q+1}(c1,d1) E_q(c2,d2) E_{q+1}(c3,d3) (q = p+j) consumes the
        # pairs at grid (q+1, j) and (q+2, j) and emits E_{q+1}(c3, d3),
        # which continues down the two sub-diagonals until it is trivial.
        n = off.shape[0]
        m = off.shape[1]
        j = 0
        while True:
            rt = p + 1 + j
            if j >= m or rt >= n:
                return
            a3 = bar[rt, j]
            b3 = off[rt, j]
            rb = rt + 1
            if rb <= n - 1:
                a2 = bar[rb, j]
                b2 = off[rb, j]
            else:
                a2 = ONE
                b2 = ZERO
            c2 = a1 * a3
            if a2 != 0:
                s = b1 * a3 + a2 * b3
                c1 = a2
                c3 = ONE
                if s != 0:
                    d2 = s
                    d1 = b2 * b3 / s
                    d3 = b1 * b2 * a3 / s
                else:
                    d2 = ZERO
                    d1 = b2
                    d3 = ZERO
            else:
                t = b1 * a3
                if t == 0:
                    c1 = ZERO
                    d1 = b2
                    d2 = b3
                    c3 = ONE
                    d3 = ZERO
                else:
                    c1 = ONE
                    c3 = ZERO
                    d2 = t
                    d1 = b2 * b3 / t
                    d3 = b2
            bar[rt, j] = c2
            off[rt, j] = d2
            if rb <= n - 1:
                bar[rb, j] = c1
                off[rb, j] = d1
            if c3 == 1 and d3 == 0:
                return
            a1 = c3
            b1 = d3
            j += 1

    @decorate
    def left_lower_seq(bar, off, idx, av, bv):
        # Apply E_{idx[s]}(av[s], bv[s]) for s = len-1 down to 0, i.e. the
        # product E_{idx[0]} ... E_{idx[-1]} multiplied on the left.
        n = off.shape[0]
        for s in range(len(idx) - 1, -1, -1):
            p = idx[s]
            a = av[s]
            b = bv[s]
            if p == n - 1:
                if a != 1:
                    row_scale(bar, off, p, a)
                continue
            if a != 0 and a != 1:
                row_scale(bar, off, p, a)
                b = b / a
                a = a / a
            if a == 1 and b == 0:
                continue
            left_lower_elem(bar, off, p, a, b)

    @decorate
    def left_upper_seq(bar, off, idx, yb, yo, ub, uo):
        # Apply F_{idx[s]}(yb[s], yo[s]) for s = len-1 down to 0 on the left,
        # one elementary upper factor at a time.
        for s in range(len(idx) - 1, -1, -1):
            p = idx[s]
            if yb[s] == 1 and yo[s] == 0:
                continue
            ub[p] = yb[s]
            uo[p] = yo[s]
            left_upper(bar, off, ub, uo, p, p)

    return SimpleNamespace(
        pt1_window=pt1_window, pt2_window=pt2_window, pt3_window=pt3_window,
        push_col_scale=push_col_scale, left_upper=left_upper, row_scale=row_scale,
        left_lower_elem=left_lower_elem, left_lower_seq=left_lower_seq,
        left_upper_seq=left_upper_seq)


PY = build(lambda f: f, Fraction(1), Fraction(0))

_JIT = None


def jit():
    """Numba-compiled namespace (built lazily, cached on disk)."""
    global _JIT
    if _JIT is None:
        import numba

        _JIT = build(numba.njit(cache=False))
    return _JIT


def kernels_for(arr):
    """Pick the compiled kernels for float64 grids, plain Python otherwise."""
    if arr.dtype == object:
        return PY
    return jit()
