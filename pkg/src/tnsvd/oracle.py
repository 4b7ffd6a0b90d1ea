"""Independent ground truth for the tests and the reproduction harness.

* exact rational products of factor chains (:func:`dense_product_exact`);
* exact ranks by fraction-free elimination (:func:`rank_exact`) and, for
  matrices whose entries carry tens of thousands of bits, ranks modulo
  random primes (:func:`rank_modular`);
* reference singular values (:func:`reference_singular_values`) from a
  rank-revealing Householder QR followed by one-sided Jacobi, all in
  ``mpfr`` arithmetic whose exponent range is effectively unbounded.  The
  precision is doubled until two runs agree to at least 30 significant
  digits.

Nothing here touches the bidiagonal representation: dense matrices are
evaluated from factor chains or from the entry formulas of the generators.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
import random
from dataclasses import dataclass
from typing import Callable, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpfr, mpq, mpz

from .generators import EXACT, Ring, mod_ring
from .representation import BidiagonalProduct

# two runs must agree to this many bits (about 30 decimal digits)
AGREE_BITS = 100
MAX_BITS = 1 << 15
JACOBI_SWEEPS = 80
_EXP = 1 << 40


class OracleError(RuntimeError):
    """Non-convergence or an inconsistent rank; never silently ignored."""


# ----------------------------------------------------------------------
# exact matrices
# ----------------------------------------------------------------------
class BigRationalMatrix:
    """Dense matrix of exact rationals (``mpq``)."""

    __slots__ = ("entries",)

    def __init__(self, rows):
        if isinstance(rows, BigRationalMatrix):
            rows = rows.entries
        arr = np.asarray(rows, dtype=object)
        if arr.ndim != 2:
            raise ValueError("a matrix needs two dimensions")
        out = np.empty(arr.shape, dtype=object)
        for idx, v in np.ndenumerate(arr):
            out[idx] = mpq(v)
        self.entries = out

    @property
    def nrows(self) -> int:
        return self.entries.shape[0]

    @property
    def ncols(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def __matmul__(self, other: "BigRationalMatrix") -> "BigRationalMatrix":
        return BigRationalMatrix(np.dot(self.entries, other.entries))

    def __eq__(self, other) -> bool:
        other = other if isinstance(other, BigRationalMatrix) else BigRationalMatrix(other)
        return self.shape == other.shape and bool(np.all(self.entries == other.entries))

    @property
    def T(self) -> "BigRationalMatrix":
        return BigRationalMatrix(self.entries.T)

    def evaluate(self, ring: Ring) -> np.ndarray:
        """The matrix in another :class:`Ring`."""
        return np.frompyfunc(ring.conv, 1, 1)(self.entries).astype(object)

    def to_float(self) -> np.ndarray:
        """Correctly rounded doubles."""
        return np.array([[float(v) for v in row] for row in self.entries], dtype=float)

    def digest(self) -> str:
        h = hashlib.sha256(f"{self.nrows}x{self.ncols}".encode())
        for v in self.entries.flat:
            h.update(f";{v.numerator}/{v.denominator}".encode())
        return h.hexdigest()


def dense_product(product: BidiagonalProduct, ring: Ring = EXACT) -> np.ndarray:
    """``B_1 ... B_K`` evaluated in ``ring``, one sparse factor at a time."""
    n0 = product.shape[0]
    one, zero = ring.conv(mpq(1)), ring.conv(mpq(0))
    acc = np.empty((n0, n0), dtype=object)
    acc.fill(zero)
    for i in range(n0):
        acc[i, i] = one
    for F in product.factors:
        n, m = F.nrows, F.ncols
        diag = [one] * min(n, m)
        offs = {}
        for i, b, o in zip(F.index, F.bar_values, F.off_values):
            diag[i] = ring.conv(mpq(b))
            if o != 0:
                offs[int(i)] = ring.conv(mpq(o))
        out = np.empty((acc.shape[0], m), dtype=object)
        out.fill(zero)
        for j in range(min(n, m)):
            out[:, j] = acc[:, j] * diag[j]
        for i, o in offs.items():
            if F.orientation == "lower":       # entry (i + 1, i)
                out[:, i] = out[:, i] + acc[:, i + 1] * o
            else:                              # entry (i, i + 1)
                out[:, i + 1] = out[:, i + 1] + acc[:, i] * o
        if ring.reduce is not None:
            out = np.frompyfunc(ring.reduce, 1, 1)(out).astype(object)
        acc = out
    return acc


def dense_product_exact(product: BidiagonalProduct) -> BigRationalMatrix:
    """Exact rational product of a factor chain."""
    return BigRationalMatrix(dense_product(product, EXACT))


# ----------------------------------------------------------------------
# ranks
# ----------------------------------------------------------------------
def rank_exact(m) -> int:
    """Exact rank by fraction-free (Bareiss) elimination with full pivoting.

    Rows are first scaled to integers by the lcm of their denominators; the
    pivot is the nonzero entry of fewest bits.
    """
    mat = BigRationalMatrix(m).entries
    rows = []
    for row in mat:
        den = mpz(1)
        for v in row:
            den = gmpy2.lcm(den, v.denominator)
        rows.append([v.numerator * (den // v.denominator) for v in row])
    n, mcols = mat.shape
    prev = mpz(1)
    rank = 0
    for k in range(min(n, mcols)):
        best = None
        for i in range(k, n):
            for j in range(k, mcols):
                v = rows[i][j]
                if v and (best is None or v.bit_length() < best[0]):
                    best = (v.bit_length(), i, j)
        if best is None:
            break
        _, pi, pj = best
        rows[k], rows[pi] = rows[pi], rows[k]
        for row in rows:
            row[k], row[pj] = row[pj], row[k]
        piv = rows[k][k]
        rk = rows[k]
        for i in range(k + 1, n):
            ri = rows[i]
            a = ri[k]
            for j in range(k + 1, mcols):
                ri[j] = (ri[j] * piv - a * rk[j]) // prev
            ri[k] = mpz(0)
        prev = piv
        rank += 1
    return rank


def _rank_mod(a: np.ndarray, p: int) -> int:
    a = np.array(a, dtype=np.int64) % p
    n, m = a.shape
    r = 0
    for c in range(m):
        if r == n:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            a[[r, k]] = a[[k, r]]
        a[r] = a[r] * pow(int(a[r, c]), -1, p) % p
        f = a[r + 1:, c].copy()
        a[r + 1:] = (a[r + 1:] - f[:, None] * a[r][None, :]) % p
        r += 1
    return r


def _random_prime(rng: random.Random) -> int:
    while True:
        p = rng.randrange(1 << 30, 1 << 31) | 1
        if gmpy2.is_prime(p):
            return p


def rank_modular(source, primes: int = 3, seed: int = 0) -> int:
    """Rank from elimination modulo ``primes`` random 31-bit primes.

    Each modular rank is a lower bound of the rational rank (a minor that is
    nonzero modulo ``p`` is nonzero); the maximum over the primes equals the
    rational rank unless every prime divides all maximal nonzero minors.

    Parameters
    ----------
    source : BigRationalMatrix or callable
        A matrix, or an evaluator ``f(ring) -> object array``.
    """
    evaluate = _evaluator(source)
    rng = random.Random(seed)
    best = 0
    done = 0
    while done < primes:
        p = _random_prime(rng)
        try:
            a = evaluate(mod_ring(p))
        except ZeroDivisionError:
            continue
        best = max(best, _rank_mod(a.astype(np.int64), p))
        done += 1
    return best


def _evaluator(source) -> Callable[[Ring], np.ndarray]:
    if isinstance(source, BigRationalMatrix):
        return source.evaluate
    if callable(source):
        return source
    return BigRationalMatrix(source).evaluate


# ----------------------------------------------------------------------
# reference singular values
# ----------------------------------------------------------------------
def _ctx(prec: int):
    return gmpy2.context(gmpy2.get_context(), precision=prec, emin=-_EXP, emax=_EXP,
                         round=gmpy2.RoundToNearest)


def _mpfr_ring() -> Ring:
    return Ring(lambda v: mpfr(v))


def _householder_r(a: np.ndarray, steps: int, pivot: bool) -> tuple[np.ndarray, object]:
    """First ``steps`` rows of ``R`` in ``A P = Q R`` and the remainder norm."""
    a = a.copy()
    n, m = a.shape
    zero = a[0, 0] * 0
    for j in range(steps):
        if pivot:
            norms = [np.dot(a[j:, c], a[j:, c]) for c in range(j, m)]
            k = j + int(max(range(len(norms)), key=norms.__getitem__))
            if k != j:
                a[:, [j, k]] = a[:, [k, j]]
        x = a[j:, j]
        alpha = gmpy2.sqrt(np.dot(x, x))
        if alpha == 0:
            continue
        if x[0] > 0:
            alpha = -alpha
        v = x.copy()
        v[0] = v[0] - alpha
        vv = np.dot(v, v)
        if vv == 0:
            continue
        w = np.dot(v, a[j:, j:]) * (2 / vv)
        a[j:, j:] = a[j:, j:] - np.outer(v, w)
        a[j, j] = alpha
        a[j + 1:, j] = zero
    rest = a[steps:, steps:]
    rem = gmpy2.sqrt(sum((v * v for v in rest.flat), zero)) if rest.size else zero
    return np.triu(a[:steps]), rem


def _jacobi_columns(x: np.ndarray, prec: int) -> list:
    """Column norms after one-sided Jacobi orthogonalization (descending)."""
    cols = [x[:, i].copy() for i in range(x.shape[1])]
    r = len(cols)
    tol = gmpy2.mul_2exp(mpfr(1), -prec + 8)
    for _ in range(JACOBI_SWEEPS):
        rotated = False
        for i in range(r - 1):
            for j in range(i + 1, r):
                ci, cj = cols[i], cols[j]
                g = np.dot(ci, cj)
                if g == 0:
                    continue
                a = np.dot(ci, ci)
                b = np.dot(cj, cj)
                if abs(g) <= tol * gmpy2.sqrt(a * b):
                    continue
                rotated = True
                zeta = (b - a) / (2 * g)
                t = 1 / (abs(zeta) + gmpy2.sqrt(1 + zeta * zeta))
                if zeta < 0:
                    t = -t
                c = 1 / gmpy2.sqrt(1 + t * t)
                s = c * t
                cols[i] = ci * c - cj * s
                cols[j] = ci * s + cj * c
        if not rotated:
            return sorted((gmpy2.sqrt(np.dot(c, c)) for c in cols), reverse=True)
    raise OracleError(f"one-sided Jacobi did not converge in {JACOBI_SWEEPS} sweeps")


def _svd_at(evaluate, rank: int, prec: int) -> list:
    with _ctx(prec):
        a = evaluate(_mpfr_ring())
        if a.shape[0] < a.shape[1]:
            a = a.T
        if rank == 0:
            return []
        fro = gmpy2.sqrt(sum((v * v for v in a.flat), mpfr(0)))
        r1, rem = _householder_r(a.T.copy(), rank, pivot=True)
        # the dropped block must be rounding noise for the given rank
        if rem > gmpy2.mul_2exp(fro, -prec // 2):
            raise OracleError("rank-revealing QR left a non-negligible remainder")
        t, _ = _householder_r(r1.T.copy(), rank, pivot=False)
        return _jacobi_columns(t.T.copy(), prec)


@dataclass
class OracleResult:
    """Reference singular values with the precision that confirmed them."""

    sigma: list
    rank: int
    precision: int
    shape: tuple[int, int]

    def as_float(self) -> np.ndarray:
        return np.array([float(v) for v in self.sigma])

    def to_json(self) -> dict:
        pairs = []
        for v in self.sigma:
            m, e = v.as_mantissa_exp()
            pairs.append([str(m), int(e)])
        return {"version": 1, "rank": self.rank, "precision": self.precision,
                "shape": list(self.shape), "sigma": pairs}

    @classmethod
    def from_json(cls, data: dict) -> "OracleResult":
        prec = int(data["precision"])
        with _ctx(prec):
            sig = [gmpy2.mul_2exp(mpfr(mpz(m)), int(e)) for m, e in data["sigma"]]
        return cls(sig, int(data["rank"]), prec, tuple(data["shape"]))


def _agree(s1: Sequence, s2: Sequence) -> bool:
    with _ctx(max(v.precision for v in list(s2) + [mpfr(0)]) + 16):
        tol = gmpy2.mul_2exp(mpfr(1), -AGREE_BITS)
        return all(abs(a - b) <= tol * abs(b) for a, b in zip(s1, s2))


def reference_svd(source, precision_bits: int = 256, rank: int | None = None,
                  max_bits: int = MAX_BITS) -> OracleResult:
    """Reference singular values, confirmed by a run at higher precision.

    Parameters
    ----------
    source : BigRationalMatrix, nested lists of rationals or callable
        A callable is an evaluator ``f(ring) -> object array``.
    precision_bits : int
        Starting precision (at least 128).
    rank : int, optional
        Exact rank; computed with :func:`rank_exact` (matrices) or
        :func:`rank_modular` (evaluators) when omitted.
    max_bits : int
        Largest precision tried before :class:`OracleError` is raised.
    """
    if precision_bits < 128:
        raise ValueError("precision_bits must be at least 128")
    evaluate = _evaluator(source)
    shape = evaluate(mod_ring(2147483647)).shape if rank is None and callable(source) \
        and not isinstance(source, BigRationalMatrix) else None
    if rank is None:
        rank = rank_exact(source) if not callable(source) or isinstance(
            source, BigRationalMatrix) else rank_modular(evaluate)
    prec = int(precision_bits)
    prev = _svd_at(evaluate, rank, prec)
    while True:
        need = prec
        if prev and prev[-1] > 0:
            need = int(math.ceil(float(gmpy2.log2(prev[0] / prev[-1])))) + 192
        nxt = max(2 * prec, need)
        if nxt > max_bits:
            raise OracleError(f"no agreement up to {prec} bits of precision")
        cur = _svd_at(evaluate, rank, nxt)
        if _agree(prev, cur):
            if shape is None:
                with _ctx(64):
                    shape = evaluate(_mpfr_ring()).shape
            return OracleResult(cur, rank, nxt, tuple(shape))
        prec, prev = nxt, cur


def reference_singular_values(m, precision_bits: int = 256) -> list:
    """Descending nonzero singular values of an exact matrix as ``mpfr`` numbers."""
    return reference_svd(m, precision_bits).sigma


# ----------------------------------------------------------------------
# disk cache
# ----------------------------------------------------------------------
CACHE_ENV = "TNSVD_ORACLE_CACHE"


def cache_dir() -> str | None:
    """Directory named by ``TNSVD_ORACLE_CACHE`` (``None`` disables caching)."""
    d = os.environ.get(CACHE_ENV)
    return d or None


def cached(key: str, compute: Callable[[], OracleResult]) -> OracleResult:
    """Return the cached result for ``key`` or compute and store it.

    Files are ``<sha256(key)>.json`` holding each value as an exact
    ``[mantissa, exponent]`` pair; writes go through a temporary file and a
    rename.
    """
    d = cache_dir()
    if d is None:
        return compute()
    os.makedirs(d, exist_ok=True)
    path = os.path.join(d, hashlib.sha256(key.encode()).hexdigest() + ".json")
    if os.path.exists(path):
        with open(path) as fh:
            return OracleResult.from_json(json.load(fh))
    res = compute()
    tmp = path + f".{os.getpid()}.tmp"
    with open(tmp, "w") as fh:
        json.dump(res.to_json(), fh)
    os.replace(tmp, path)
    return res


def example_reference(problem, precision_bits: int = 256) -> OracleResult:
    """Reference values of an :class:`~tnsvd.generators.ExampleProblem`.

    Problems with a ``root`` use ``sigma(F F^T F) = sigma(F)**3``.
    """
    if problem.root is not None:
        base = example_reference(problem.root, precision_bits)
        with _ctx(base.precision):
            sig = [v ** problem.power for v in base.sigma]
        return OracleResult(sig, base.rank, base.precision, problem.shape)
    key = f"example:{problem.name}:{problem.shape}:v1"
    return cached(key, lambda: reference_svd(problem.evaluate, precision_bits))


def matrix_reference(m, precision_bits: int = 256) -> OracleResult:
    """Cached :func:`reference_svd` of an exact matrix."""
    m = BigRationalMatrix(m)
    return cached(f"matrix:{m.digest()}:v1", lambda: reference_svd(m, precision_bits))


def relative_errors(computed: Sequence, reference: Sequence) -> list[float]:
    """``|computed - reference| / reference`` evaluated in ``mpfr``.

    ``computed`` may hold floats or ``mpfr`` values; lengths must match.
    """
    if len(computed) != len(reference):
        raise ValueError("length mismatch")
    with _ctx(128):
        return [float(abs(mpfr(c) - r) / r) for c, r in zip(computed, reference)]


__all__ = [
    "OracleError", "BigRationalMatrix", "OracleResult", "dense_product", "dense_product_exact",
    "rank_exact", "rank_modular", "reference_svd", "reference_singular_values",
    "example_reference", "matrix_reference", "relative_errors", "cached", "cache_dir",
    "CACHE_ENV",
]
