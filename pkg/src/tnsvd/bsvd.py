"""Singular values and vectors of the deflated bidiagonal and the top-level driver.

Two solvers work on an upper bidiagonal matrix with positive diagonal:

* :func:`bidiagonal_singular_values` runs the shifted differential qd
  algorithm (dqds) on the squared entries.  The qd arrays hold squares of
  entries that may be as small as ``1e-256``, so they are kept in 53-bit
  ``mpfr`` numbers, which round exactly like IEEE doubles but carry an
  unbounded exponent.
* :func:`bidiagonal_svd` with vectors runs the implicit zero-shift QR
  iteration in plain double precision and accumulates both rotation
  sequences.  Every update is a product, a quotient or a ``hypot``.

:func:`svd_product` chains the split, the deflation and one of the solvers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .assembly import split_at_min
from .deflation import DeflationResult, periodic_deflate
from .representation import BidiagonalProduct, DomainError

EPS = np.finfo(float).eps


class ConvergenceError(RuntimeError):
    """An iteration exceeded its documented sweep cap."""


@dataclass
class SVDResult:
    """Singular values (descending, positive), exact rank and optional vectors."""

    sigma: np.ndarray
    rank: int
    shape: tuple[int, int]
    u: np.ndarray | None = None
    v: np.ndarray | None = None
    deflation: DeflationResult | None = field(default=None, repr=False)
    sigma_scaled: np.ndarray | None = field(default=None, repr=False)
    exp2: int = 0

    def sigma_big(self) -> list:
        """Exact ``sigma_scaled * 2**exp2`` as ``mpfr`` numbers.

        ``sigma`` is the same data as doubles; values beyond the double
        range (below about ``5e-324``) survive only here.
        """
        scaled = self.sigma if self.sigma_scaled is None else self.sigma_scaled
        with _ctx():
            return [gmpy2.mul_2exp(mpfr(float(v)), self.exp2) for v in scaled]

    @property
    def zeros(self) -> int:
        """Number of exactly deflated zero singular values."""
        return min(self.shape) - self.rank

    def dense(self) -> np.ndarray:
        """``U diag(sigma, 0) V^T`` (vectors required)."""
        if self.u is None or self.v is None:
            raise ValueError("vectors were not computed")
        n, m = self.shape
        s = np.zeros((n, m))
        s[:self.rank, :self.rank] = np.diag(self.sigma)
        return self.u @ s @ self.v.T


def _check_bidiagonal(diag, sup) -> tuple[np.ndarray, np.ndarray]:
    d = np.asarray(diag, dtype=float).reshape(-1)
    e = np.asarray(sup, dtype=float).reshape(-1)
    if len(d) and len(e) != len(d) - 1:
        raise DomainError("super-diagonal must have one entry fewer than the diagonal")
    if np.any(~np.isfinite(d)) or np.any(~np.isfinite(e)):
        raise DomainError("bidiagonal entries must be finite")
    if np.any(d <= 0):
        raise DomainError("diagonal entries must be positive")
    if np.any(e < 0):
        raise DomainError("super-diagonal entries must be nonnegative")
    return d, e


def prescale(diag, sup) -> tuple[np.ndarray, np.ndarray, int]:
    """Scale by a power of two so the largest entry lies in ``[1/2, 1)``.

    Returns the scaled arrays and the exponent ``k`` with
    ``original = scaled * 2**k``.  The scaling is exact unless an entry
    drops below the normal range, in which case ``k`` is reduced.
    """
    d = np.asarray(diag, dtype=float)
    e = np.asarray(sup, dtype=float)
    big = max(float(np.max(d, initial=0.0)), float(np.max(e, initial=0.0)))
    if big == 0.0:
        return d.copy(), e.copy(), 0
    _, k = math.frexp(big)
    small = min(float(np.min(d[d > 0], initial=big)), float(np.min(e[e > 0], initial=big)))
    _, ks = math.frexp(small)
    # keep the smallest entry normal
    k = min(k, ks - np.finfo(float).minexp)
    return np.ldexp(d, -k), np.ldexp(e, -k), int(k)


# ----------------------------------------------------------------------
# dqds
# ----------------------------------------------------------------------
def _ctx():
    return gmpy2.context(gmpy2.get_context(), precision=53, round=gmpy2.RoundToNearest,
                         subnormalize=False, emin=-(1 << 30), emax=1 << 30)


def _dqds_block(q: list, e: list, sigma, out: list, max_sweeps: int) -> None:
    """Eigenvalues of one unreduced qd block; appends ``sigma + lambda``."""
    eps2 = mpfr(EPS) * mpfr(EPS)
    stack = [(q, e, sigma)]
    sweeps = 0
    while stack:
        q, e, sigma = stack.pop()
        dmin_prev = None
        while True:
            n = len(q)
            if n == 0:
                break
            if n == 1:
                out.append(sigma + q[0])
                break
            # bottom deflation
            if e[n - 2] <= eps2 * (sigma + q[n - 1]):
                out.append(sigma + q[n - 1])
                q = q[:n - 1]
                e = e[:n - 2]
                dmin_prev = None
                continue
            if n == 2:
                lo, hi = _qd2(q[0], e[0], q[1])
                out.append(sigma + lo)
                out.append(sigma + hi)
                break
            # interior split
            split = _split_point(q, e, eps2)
            if split is not None:
                stack.append((q[:split + 1], e[:split], sigma))
                q = q[split + 1:]
                e = e[split + 1:]
                dmin_prev = None
                continue
            # shift selection
            a0 = q[n - 2] + e[n - 3] if n >= 3 else q[n - 2]
            a1 = q[n - 1] + e[n - 2]
            b2 = q[n - 1] * e[n - 2]
            tau = _small_eig(a0, a1, b2, q[n - 2] * q[n - 1])
            if dmin_prev is not None:
                tau = min(tau, dmin_prev * mpfr("0.5"))
            tau = max(tau * mpfr("0.9"), mpfr(0))
            for attempt in range(6):
                res = _dqds_sweep(q, e, tau)
                sweeps += 1
                if res is not None:
                    break
                tau = mpfr(0) if attempt >= 3 else tau * mpfr("0.25")
            else:  # pragma: no cover - tau = 0 cannot fail on positive data
                raise ConvergenceError("dqds transform failed with zero shift")
            q, e, dmin_prev = res
            sigma = sigma + tau
            if sweeps > max_sweeps:
                raise ConvergenceError("dqds exceeded its sweep cap")


def _split_point(q: list, e: list, eps2):
    """Last index ``i`` whose ``e[i]`` is negligible by the forward recurrence.

    ``mu`` is the squared version of the recurrence used by the QR path; an
    entry below ``eps2 * mu`` changes every eigenvalue only relatively.
    """
    mu = q[0]
    split = None
    for i in range(len(e)):
        if e[i] <= eps2 * mu:
            split = i
            mu = q[i + 1]
        else:
            mu = q[i + 1] * (mu / (mu + e[i]))
    return split


def _small_eig(a0, a1, b2, det):
    """Smaller eigenvalue of ``[[a0, b], [b, a1]]`` with ``b*b = b2``.

    Uses ``det / larger`` so no cancellation occurs for the small root.
    """
    half = (a0 + a1) / 2
    diff = (a0 - a1) / 2
    big = half + gmpy2.sqrt(diff * diff + b2)
    if big <= 0:
        return mpfr(0)
    val = (a0 * a1 - b2) / big
    return val if val > 0 else mpfr(0)


def _qd2(q0, e0, q1):
    """Eigenvalues of the 2 x 2 qd array ``{q0, e0, q1}`` (ascending)."""
    # matrix [[q0, sqrt(q0 e0)], [sqrt(q0 e0), q1 + e0]]; determinant q0 q1
    t = q0 + e0 + q1
    disc = t * t - 4 * q0 * q1
    big = (t + gmpy2.sqrt(disc if disc > 0 else mpfr(0))) / 2
    small = (q0 * q1) / big
    return small, big


def _dqds_sweep(q: list, e: list, tau):
    """One dqds transform with shift ``tau``; ``None`` when it loses positivity."""
    n = len(q)
    qn = [None] * n
    en = [None] * (n - 1)
    d = q[0] - tau
    if d <= 0 and not (d == 0 and tau == 0):
        return None
    dmin = d
    for i in range(n - 1):
        qh = d + e[i]
        if qh <= 0:
            return None
        t = q[i + 1] / qh
        qn[i] = qh
        en[i] = e[i] * t
        d = d * t - tau
        if d < 0 or (d == 0 and tau != 0):
            return None
        if d < dmin:
            dmin = d
    qn[n - 1] = d
    if d == 0:
        return None
    return qn, en, dmin


def bidiagonal_singular_values(diag, sup, max_sweeps: int | None = None) -> np.ndarray:
    """Singular values of an upper bidiagonal matrix, descending.

    Parameters
    ----------
    diag : array_like, positive
    sup : array_like, nonnegative, length ``len(diag) - 1``

    Returns
    -------
    ndarray
        Descending singular values.

    Raises
    ------
    DomainError
        If a diagonal entry is not positive.
    """
    d, e = _check_bidiagonal(diag, sup)
    n = len(d)
    if n == 0:
        return np.zeros(0)
    cap = max_sweeps if max_sweeps is not None else 60 * n + 100
    with _ctx():
        q = [mpfr(float(v)) * mpfr(float(v)) for v in d]
        ee = [mpfr(float(v)) * mpfr(float(v)) for v in e]
        out: list = []
        _dqds_block(q, ee, mpfr(0), out, cap)
        vals = [float(gmpy2.sqrt(v)) for v in out]
    return np.array(sorted(vals, reverse=True))


# ----------------------------------------------------------------------
# zero-shift QR with vectors
# ----------------------------------------------------------------------
def _rot(f: float, g: float) -> tuple[float, float, float]:
    if g == 0.0:
        return 1.0, 0.0, f
    if f == 0.0:
        return 0.0, 1.0, g
    r = _hypot(f, g)
    return f / r, g / r, r


def _hypot(f, g):
    if isinstance(f, float) and isinstance(g, float):
        return math.hypot(f, g)
    return (f * f + g * g).sqrt()


def _zero_shift_sweep(d, e, lo, hi, u, v) -> None:
    """One implicit zero-shift QR sweep on ``d[lo..hi]``, ``e[lo..hi-1]``.

    Maintains ``B_original = U B V^T`` by rotating columns of ``u`` and
    ``v``.  Entries stay nonnegative.
    """
    cs = 1.0
    oldcs = 1.0
    oldsn = 0.0
    for i in range(lo, hi):
        cs, sn, r = _rot(d[i] * cs, e[i])
        if i > lo:
            e[i - 1] = oldsn * r
        if v is not None:
            _rot_cols(v, i, i + 1, cs, sn)
        oldcs, oldsn, d[i] = _rot(oldcs * r, d[i + 1] * sn)
        if u is not None:
            _rot_cols(u, i, i + 1, oldcs, oldsn)
    h = d[hi] * cs
    d[hi] = h * oldcs
    e[hi - 1] = h * oldsn


def _rot_cols(q: np.ndarray, i: int, j: int, c: float, s: float) -> None:
    qi = q[:, i].copy()
    qj = q[:, j]
    q[:, i] = c * qi + s * qj
    q[:, j] = c * qj - s * qi


# a shift is skipped when the block is this ill-conditioned relative to its size
_TOLMUL = 90.0


def _shifted_sweep(d, e, lo, hi, shift, u, v) -> None:
    """One implicit shifted QR sweep (top to bottom) on ``d[lo..hi]``."""
    f = (abs(d[lo]) - shift) * (math.copysign(1.0, d[lo]) + shift / d[lo])
    g = e[lo]
    for i in range(lo, hi):
        cosr, sinr, r = _rot(f, g)
        if i > lo:
            e[i - 1] = r
        f = cosr * d[i] + sinr * e[i]
        e[i] = cosr * e[i] - sinr * d[i]
        g = sinr * d[i + 1]
        d[i + 1] = cosr * d[i + 1]
        if v is not None:
            _rot_cols(v, i, i + 1, cosr, sinr)
        cosl, sinl, r = _rot(f, g)
        d[i] = r
        f = cosl * e[i] + sinl * d[i + 1]
        d[i + 1] = cosl * d[i + 1] - sinl * e[i]
        if i < hi - 1:
            g = sinl * e[i + 1]
            e[i + 1] = cosl * e[i + 1]
        if u is not None:
            _rot_cols(u, i, i + 1, cosl, sinl)
    e[hi - 1] = f


def _ssmin2(f: float, g: float, h: float) -> float:
    """Smaller singular value of ``[[f, g], [0, h]]``."""
    fa, ga, ha = abs(f), abs(g), abs(h)
    fhmn, fhmx = min(fa, ha), max(fa, ha)
    if fhmn == 0.0:
        return 0.0
    if ga < fhmx:
        as_ = 1.0 + fhmn / fhmx
        at = (fhmx - fhmn) / fhmx
        au = (ga / fhmx) ** 2
        return fhmn * (2.0 / (math.sqrt(as_ * as_ + au) + math.sqrt(at * at + au)))
    au = fhmx / ga
    if au == 0.0:
        return (fhmn * fhmx) / ga
    as_ = 1.0 + fhmn / fhmx
    at = (fhmx - fhmn) / fhmx
    c = 1.0 / (math.sqrt(1.0 + (as_ * au) ** 2) + math.sqrt(1.0 + (at * au) ** 2))
    return 2.0 * (fhmn * c) * au


def _negligible(d, e, lo, hi, tol) -> float:
    """Zero every ``e[j]`` below the relative threshold of the forward recurrence.

    Returns the smallest value of the recurrence, a lower estimate of the
    smallest singular value of the block.
    """
    mu = abs(d[lo])
    smin = mu
    for j in range(lo, hi):
        if abs(e[j]) <= tol * mu:
            e[j] = e[j] * 0
            mu = abs(d[j + 1])
        else:
            mu = abs(d[j + 1]) * (mu / (mu + abs(e[j])))
        smin = min(smin, mu)
    return smin


def _qr_iterate(d, e, u, v, shifts: str = "auto", max_sweeps: int | None = None) -> None:
    """Drive ``d``, ``e`` to diagonal form in place (QR sweeps plus splitting).

    Works on any sequence of numbers supporting ``+ * / abs sqrt`` and
    comparisons; ``u`` and ``v`` may be ``None``.  With ``shifts="zero"``
    only the zero-shift sweep runs, which never subtracts.
    """
    n = len(d)
    cap = max_sweeps if max_sweeps is not None else (6 if shifts == "auto" else 4000) * n * n + 100
    tol = EPS / 4
    sweeps = 0
    hi = n - 1
    while hi > 0:
        while hi > 0 and e[hi - 1] == 0:
            hi -= 1
        if hi == 0:
            break
        lo = hi - 1
        while lo > 0 and e[lo - 1] != 0:
            lo -= 1
        smin = _negligible(d, e, lo, hi, tol)
        if any(e[j] == 0 for j in range(lo, hi)):
            continue
        shift = 0.0
        if shifts == "auto":
            smax = max(np.max(np.abs(d[lo:hi + 1])), np.max(np.abs(e[lo:hi])))
            if (hi - lo + 1) * _TOLMUL * (smin / smax) > 1.0:
                shift = _ssmin2(d[hi - 1], e[hi - 1], d[hi])
                if (shift / abs(d[lo])) ** 2 < EPS:
                    shift = 0.0
        if shift == 0.0:
            _zero_shift_sweep(d, e, lo, hi, u, v)
        else:
            _shifted_sweep(d, e, lo, hi, shift, u, v)
        sweeps += 1
        if sweeps > cap:
            raise ConvergenceError("bidiagonal QR exceeded its sweep cap")


def bidiagonal_svd(diag, sup, want_vectors: bool = True, max_sweeps: int | None = None,
                   shifts: str = "auto"):
    """SVD ``B = U2 diag(sigma) V2^T`` of an upper bidiagonal matrix.

    Without vectors this is :func:`bidiagonal_singular_values`.  With vectors
    the implicit QR iteration is used: a sweep is zero-shift whenever a
    shift could spoil the relative accuracy of the smallest singular value
    (always, with ``shifts="zero"``), and shifted otherwise.

    Returns
    -------
    (u2, sigma, v2)
        ``u2`` and ``v2`` are ``None`` when ``want_vectors`` is false.
    """
    if shifts not in ("auto", "zero"):
        raise ValueError("shifts must be 'auto' or 'zero'")
    d, e = _check_bidiagonal(diag, sup)
    n = len(d)
    if not want_vectors:
        return None, bidiagonal_singular_values(d, e, max_sweeps), None
    d = d.copy()
    e = e.copy()
    u = np.eye(n)
    v = np.eye(n)
    _qr_iterate(d, e, u, v, shifts, max_sweeps)
    neg = d < 0
    d[neg] = -d[neg]
    v[:, neg] = -v[:, neg]
    order = np.argsort(-d, kind="stable")
    return u[:, order], d[order], v[:, order]


# ----------------------------------------------------------------------
# driver
# ----------------------------------------------------------------------
def svd_product(product: BidiagonalProduct, want_vectors: bool = False, strict: bool = False,
                scale: bool = True) -> SVDResult:
    """SVD of ``B_1 ... B_K`` with exact deflation of the zero singular values.

    Parameters
    ----------
    product : BidiagonalProduct
    want_vectors : bool
        Accumulate the orthogonal factors ``U`` and ``V``.
    strict : bool
        Passed to :func:`periodic_deflate`.
    scale : bool
        Power-of-two prescaling of ``Bbar`` (on by default).
    """
    n0, nk = product.shape
    split = split_at_min(product)
    defl = periodic_deflate(split, accumulate=want_vectors, strict=strict)
    r = defl.rank
    d = np.asarray(defl.bbar_diag, dtype=float)
    e = np.asarray(defl.bbar_super, dtype=float)
    k = 0
    if scale and r:
        d, e, k = prescale(d, e)
    if r == 0:
        sigma = np.zeros(0)
        u2 = v2 = np.zeros((0, 0))
    else:
        u2, sigma, v2 = bidiagonal_svd(d, e, want_vectors)
    scaled = np.asarray(sigma, dtype=float)
    exp2 = k + defl.exp2
    res = SVDResult(sigma=np.ldexp(scaled, exp2), rank=r, shape=(n0, nk), deflation=defl,
                    sigma_scaled=scaled, exp2=exp2)
    if want_vectors:
        gu = np.eye(n0)
        gu[:r, :r] = u2
        gv = np.eye(nk)
        gv[:r, :r] = v2
        res.u = defl.g_acc.apply_to(np.eye(n0)) @ gu
        res.v = defl.v_acc.apply_to(np.eye(nk)) @ gv
    return res
