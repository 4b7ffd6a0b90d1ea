"""Bidiagonal product forms of structured totally nonnegative matrices.

Covers Cauchy, Vandermonde, Cauchy-Vandermonde and Bernstein-Vandermonde
matrices with repeated nodes and products of such matrices, plus product
forms of submatrices.  The representation of a matrix with distinct nodes is
obtained by exact rational Neville elimination; every parameter is rounded to
double precision once.

Indices are 0-based.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable, Sequence

import numpy as np
from gmpy2 import mpq

from .representation import (BDRepr, BidiagonalFactor, BidiagonalProduct, DimensionError,
                             DomainError, repr_to_product)

FAMILIES = ("cauchy", "vandermonde", "cauchy_vandermonde", "bernstein_vandermonde")


class GenerationError(DomainError):
    """Neville elimination met a zero pivot or a negative multiplier."""


def _q(v) -> mpq:
    if isinstance(v, str):
        return mpq(Fraction(v).numerator, Fraction(v).denominator)
    if isinstance(v, float):
        return mpq(Fraction(v).numerator, Fraction(v).denominator)
    return mpq(v)


def to_fraction(v) -> Fraction:
    """Exact conversion of an ``mpq``/int/float/Fraction to ``Fraction``."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        return Fraction(v)
    v = mpq(v)
    return Fraction(int(v.numerator), int(v.denominator))


def round_once(v) -> float:
    """Correctly rounded double of an exact rational."""
    v = mpq(v)
    return int(v.numerator) / int(v.denominator)


@dataclass(frozen=True)
class NodeSpec:
    """Structured matrix with (possibly) repeated nodes.

    Parameters
    ----------
    family : str
        One of ``cauchy``, ``vandermonde``, ``cauchy_vandermonde``,
        ``bernstein_vandermonde``.
    x_nodes : sequence of rationals
        Distinct row nodes, ascending.
    y_nodes : sequence of rationals
        Distinct column nodes (Cauchy columns), ascending.
    row_mult, col_mult : int or sequence of int
        Multiplicity of each distinct row (column) node.
    l : int
        Number of Cauchy columns of a Cauchy-Vandermonde matrix.
    ncols : int, optional
        Number of distinct columns; defaults to ``len(y_nodes)`` for Cauchy
        matrices and to ``len(x_nodes)`` otherwise.
    """

    family: str
    x_nodes: tuple
    y_nodes: tuple = ()
    row_mult: object = 1
    col_mult: object = 1
    l: int = 0
    ncols: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        object.__setattr__(self, "x_nodes", tuple(_q(v) for v in self.x_nodes))
        object.__setattr__(self, "y_nodes", tuple(_q(v) for v in self.y_nodes))
        xs = self.x_nodes
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise DomainError("row nodes must be distinct and ascending")
        ys = self.y_nodes
        if any(b <= a for a, b in zip(ys, ys[1:])):
            raise DomainError("column nodes must be distinct and ascending")
        if self.family == "bernstein_vandermonde" and any(not 0 < v < 1 for v in xs):
            raise DomainError("Bernstein nodes must lie in (0, 1)")
        if self.family in ("vandermonde", "cauchy_vandermonde") and any(v <= 0 for v in xs):
            raise DomainError("Vandermonde nodes must be positive")
        if self.family in ("cauchy", "cauchy_vandermonde"):
            if any(v < 0 for v in xs) or any(v < 0 for v in ys):
                raise DomainError("Cauchy nodes must be nonnegative")
        if self.family == "cauchy_vandermonde" and len(ys) != self.l:
            raise DomainError("a Cauchy-Vandermonde spec needs exactly l column nodes")
        if self.ncols is None:
            m = len(ys) if self.family == "cauchy" else len(xs)
            object.__setattr__(self, "ncols", m)
        if self.family == "cauchy" and self.ncols != len(ys):
            raise DomainError("a Cauchy spec has one column per column node")
        if self.family == "cauchy_vandermonde" and self.ncols < self.l:
            raise DomainError("ncols must be at least l")
        object.__setattr__(self, "row_mult", _mults(self.row_mult, len(xs)))
        object.__setattr__(self, "col_mult", _mults(self.col_mult, self.ncols))

    @property
    def n_distinct(self) -> int:
        return len(self.x_nodes)

    @property
    def m_distinct(self) -> int:
        return int(self.ncols)

    @property
    def shape(self) -> tuple[int, int]:
        return sum(self.row_mult), sum(self.col_mult)


def _mults(v, size: int) -> tuple:
    if isinstance(v, (int, np.integer)):
        out = (int(v),) * size
    else:
        out = tuple(int(s) for s in v)
    if len(out) != size or any(s < 1 for s in out):
        raise DomainError("inconsistent multiplicities")
    return out


# ----------------------------------------------------------------------
# exact matrices
# ----------------------------------------------------------------------
def core_entry(spec: NodeSpec, i: int, j: int) -> mpq:
    """Entry ``(i, j)`` of the distinct-node matrix."""
    x = spec.x_nodes[i]
    f = spec.family
    if f == "cauchy":
        return 1 / (x + spec.y_nodes[j])
    if f == "vandermonde":
        return x ** j
    if f == "cauchy_vandermonde":
        if j < spec.l:
            return 1 / (x + spec.y_nodes[j])
        return x ** (j - spec.l)
    m = spec.m_distinct
    return comb(m - 1, j) * (1 - x) ** (m - 1 - j) * x ** j


def core_matrix_exact(spec: NodeSpec) -> list[list[mpq]]:
    """Distinct-node matrix as nested lists of ``mpq``."""
    return [[mpq(core_entry(spec, i, j)) for j in range(spec.m_distinct)]
            for i in range(spec.n_distinct)]


def expansion_indices(mult: Sequence[int]) -> list[int]:
    """Distinct index of every expanded row (column)."""
    out = []
    for k, s in enumerate(mult):
        out.extend([k] * s)
    return out


def dense_exact(spec: NodeSpec) -> list[list[mpq]]:
    """Matrix with repeated nodes from the entry formulas."""
    core = core_matrix_exact(spec)
    ri = expansion_indices(spec.row_mult)
    ci = expansion_indices(spec.col_mult)
    return [[core[a][b] for b in ci] for a in ri]


# ----------------------------------------------------------------------
# Neville elimination
# ----------------------------------------------------------------------
def _neville_lower(a: list[list[mpq]]):
    """Neville elimination of the strictly lower part (in place).

    Returns the multipliers ``{(i, j): m_ij}``.
    """
    n = len(a)
    m = len(a[0])
    mult = {}
    for j in range(min(n - 1, m)):
        for i in range(n - 1, j, -1):
            piv = a[i - 1][j]
            v = a[i][j]
            if v == 0:
                mult[(i, j)] = mpq(0)
                continue
            if piv == 0:
                raise GenerationError(f"zero pivot at ({i - 1}, {j})")
            q = v / piv
            if q < 0:
                raise GenerationError(f"negative multiplier at ({i}, {j})")
            mult[(i, j)] = q
            ri, rp = a[i], a[i - 1]
            ri[j] = mpq(0)
            for c in range(j + 1, m):
                if rp[c]:
                    ri[c] = ri[c] - q * rp[c]
    return mult


def neville_pairs(mat: list[list]) -> tuple[np.ndarray, np.ndarray]:
    """Exact grid ``(bar, off)`` of a nonsingular totally nonnegative matrix.

    Lower multipliers come from Neville elimination of the rows, upper ones
    from Neville elimination of the columns of the remaining upper
    trapezoidal matrix, and the diagonal holds the pivots.  All bars are 1.

    Raises
    ------
    GenerationError
        On a zero pivot or a negative multiplier.
    """
    a = [[mpq(v) for v in row] for row in mat]
    n, m = len(a), len(a[0])
    lower = _neville_lower(a)
    k = min(n, m)
    ut = [[a[i][j] for i in range(k)] for j in range(m)]
    upper = _neville_lower(ut)
    bar = np.empty((n, m), dtype=object)
    off = np.empty((n, m), dtype=object)
    bar.fill(Fraction(1))
    off.fill(Fraction(0))
    for (i, j), v in lower.items():
        off[i, j] = to_fraction(v)
    for (j, i), v in upper.items():
        off[i, j] = to_fraction(v)
    for i in range(k):
        d = ut[i][i]
        if d <= 0:
            raise GenerationError(f"nonpositive pivot at ({i}, {i})")
        off[i, i] = to_fraction(d)
    return bar, off


def bd_distinct(spec: NodeSpec, exact: bool = False) -> BDRepr:
    """Representation of the distinct-node matrix of ``spec``.

    Parameters
    ----------
    exact : bool
        Keep exact ``Fraction`` pairs instead of rounding each once.
    """
    bar, off = neville_pairs(core_matrix_exact(spec))
    return _grid_to_repr(bar, off, exact)


def _grid_to_repr(bar, off, exact: bool) -> BDRepr:
    if exact:
        return BDRepr(bar, off, normalize=False)
    fb = np.array([[float(v) for v in row] for row in bar], dtype=float)
    fo = np.array([[_round_fraction(v) for v in row] for row in off], dtype=float)
    return BDRepr(fb, fo, normalize=False)


def _round_fraction(v: Fraction) -> float:
    val = v.numerator / v.denominator
    if v != 0 and val == 0.0:
        raise GenerationError("parameter underflows double precision")
    return val


# ----------------------------------------------------------------------
# repeated nodes
# ----------------------------------------------------------------------
def _placement_factors(mult: Sequence[int], exact: bool) -> list[BidiagonalFactor]:
    """Factors ``F`` with ``F_1 ... F_q I_{n, n1}`` expanding distinct rows.

    The list is ordered left to right.  The shift rounds move distinct row
    ``k`` from ``k`` to the first row of its block; the duplication rounds
    copy each row down its block.
    """
    n = sum(mult)
    starts = np.concatenate([[0], np.cumsum(mult)[:-1]]).astype(int)
    n1 = len(mult)
    one = Fraction(1) if exact else 1.0
    zero = Fraction(0) if exact else 0.0
    shifts = []
    dist = [int(starts[k]) - k for k in range(n1)]
    for j in range(1, max(dist, default=0) + 1):
        pos = [k + j - 1 for k in range(n1) if dist[k] >= j]
        shifts.append(BidiagonalFactor("lower", n, n, pos, [zero] * len(pos), [one] * len(pos)))
    dups = []
    for j in range(1, max(mult) if mult else 1):
        pos = [int(starts[k]) + j - 1 for k in range(n1) if mult[k] > j]
        dups.append(BidiagonalFactor("lower", n, n, pos, [one] * len(pos), [one] * len(pos)))
    ident = BidiagonalFactor("lower", n, n1)
    # applied order: identity, shifts (round 1 first), duplications (round 1 first)
    return list(reversed(dups)) + list(reversed(shifts)) + [ident]


def expand_repeated(spec: NodeSpec, exact: bool = False,
                    core: BDRepr | None = None) -> BidiagonalProduct:
    """Factor chain of the matrix with repeated nodes.

    The chain is ``P_rows * L_{n1-1} ... L_1 D U_1 ... U_{m1-1} * P_cols^T``
    where the placement products consist of shift factors ``E_t(0, 1)``,
    duplication factors ``E_t(1, 1)`` and rectangular identities.
    """
    if core is None:
        core = bd_distinct(spec, exact)
    left = _placement_factors(spec.row_mult, exact)
    right = [f.transpose() for f in reversed(_placement_factors(spec.col_mult, exact))]
    middle = repr_to_product(core).factors
    factors = [f for f in left + middle + right if not _is_trivial_square(f)]
    return BidiagonalProduct(factors)


def _is_trivial_square(f: BidiagonalFactor) -> bool:
    return f.nrows == f.ncols and f.npairs == 0


def product_chain(*chains: BidiagonalProduct) -> BidiagonalProduct:
    """Concatenate factor chains (matrix product of their matrices)."""
    out = []
    for c in chains:
        out.extend(c.factors)
    return BidiagonalProduct(out)


def submatrix_product_form(product: BidiagonalProduct, alpha: Sequence[int] = (),
                           beta: Sequence[int] = ()) -> BidiagonalProduct:
    """Chain of the submatrix with rows ``alpha`` and columns ``beta`` deleted.

    Row ``r`` of an ``n``-row matrix is removed by the ``(n-1) x n`` upper
    factor with pairs ``(0, 1)`` at positions ``r .. n-2``; columns use the
    transposed construction.  Deletions run from the largest index down.
    """
    n, m = product.shape
    alpha = _strict(alpha, n, "row")
    beta = _strict(beta, m, "column")
    exact = any(f.exact for f in product.factors)
    one = Fraction(1) if exact else 1.0
    zero = Fraction(0) if exact else 0.0
    left = []
    rows = n
    for r in reversed(alpha):
        pos = list(range(r, rows - 1))
        left.append(BidiagonalFactor("upper", rows - 1, rows, pos, [zero] * len(pos), [one] * len(pos)))
        rows -= 1
    right = []
    cols = m
    for c in reversed(beta):
        pos = list(range(c, cols - 1))
        right.append(BidiagonalFactor("lower", cols, cols - 1, pos, [zero] * len(pos), [one] * len(pos)))
        cols -= 1
    return BidiagonalProduct(list(reversed(left)) + list(product.factors) + right)


def _strict(idx, size, what) -> list[int]:
    idx = [int(i) for i in idx]
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise DimensionError(f"{what} deletion indices must be strictly increasing")
    if idx and (idx[0] < 0 or idx[-1] >= size):
        raise DimensionError(f"{what} deletion index out of range")
    if len(idx) >= size:
        raise DimensionError(f"cannot delete every {what}")
    return idx


# ----------------------------------------------------------------------
# example presets
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Ring:
    """Number system in which an example matrix is evaluated.

    ``conv`` maps an exact rational to the ring, ``reduce`` (optional) is
    applied elementwise after every matrix product.
    """

    conv: Callable
    reduce: Callable | None = None


EXACT = Ring(mpq)


def mod_ring(p: int) -> Ring:
    """Integers modulo the prime ``p``; denominators divisible by ``p`` raise."""
    def conv(v):
        v = mpq(v)
        den = int(v.denominator) % p
        if den == 0:
            raise ZeroDivisionError(f"denominator divisible by {p}")
        return int(v.numerator) * pow(den, -1, p) % p
    return Ring(conv, lambda x: x % p)


def _obj(rows, conv) -> np.ndarray:
    rows = list(rows)
    out = np.empty((len(rows), len(rows[0])), dtype=object)
    for i, row in enumerate(rows):
        for j, v in enumerate(row):
            out[i, j] = conv(v)
    return out


def _rdot(a: np.ndarray, b: np.ndarray, ring: Ring) -> np.ndarray:
    out = np.dot(a, b)
    if ring.reduce is not None:
        out = np.frompyfunc(ring.reduce, 1, 1)(out).astype(object)
    return out


@dataclass
class ExampleProblem:
    """A reproducible test problem: chain, kept indices and an exact evaluator.

    ``evaluate(ring)`` returns the kept submatrix as an object array in the
    given :class:`Ring`, computed from the entry formulas (never from the
    rounded chain).  When ``power`` is set, the whole matrix equals
    ``F F^T F`` for the square-free problem ``root`` and its singular values
    are the cubes of those of ``root``.
    """

    name: str
    product: BidiagonalProduct
    rows: list[int]
    cols: list[int]
    evaluate: Callable[[Ring], np.ndarray]
    expected_zeros: int | None = None
    notes: dict = field(default_factory=dict)
    root: "ExampleProblem | None" = None
    power: int = 1

    def dense(self) -> list[list[mpq]]:
        """Exact kept submatrix as nested lists of ``mpq``."""
        return self.evaluate(EXACT).tolist()

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.cols)

    @property
    def submatrix_product(self) -> BidiagonalProduct:
        n, m = self.product.shape
        keep_r, keep_c = set(self.rows), set(self.cols)
        if len(keep_r) == n and len(keep_c) == m:
            return self.product
        return submatrix_product_form(self.product, [i for i in range(n) if i not in keep_r],
                                      [j for j in range(m) if j not in keep_c])


def _frac(p, q) -> mpq:
    return mpq(p, q)


def _link(prev: NodeSpec, spec: NodeSpec) -> np.ndarray:
    """Integer matrix ``S_prev^T R_spec`` between consecutive cores."""
    ci = expansion_indices(prev.col_mult)
    ri = expansion_indices(spec.row_mult)
    if len(ci) != len(ri):
        raise DimensionError("incompatible factors")
    link = np.zeros((prev.m_distinct, spec.n_distinct), dtype=object)
    link.fill(0)
    for a, b in zip(ci, ri):
        link[a, b] += 1
    return link


def _chain_evaluator(specs: Sequence[NodeSpec], rows, cols):
    """Evaluator of the kept submatrix of a product of structured matrices.

    ``A_k = R_k C_k S_k^T`` with 0/1 expansion matrices; only the distinct
    cores ``C_k`` and the small integer links ``S_k^T R_{k+1}`` are multiplied.
    """
    cores = [core_matrix_exact(s) for s in specs]
    links = [_link(a, b) for a, b in zip(specs, specs[1:])]
    ri = expansion_indices(specs[0].row_mult)
    ci = expansion_indices(specs[-1].col_mult)

    def evaluate(ring: Ring) -> np.ndarray:
        acc = _obj(cores[0], ring.conv)
        for link, core in zip(links, cores[1:]):
            acc = _rdot(_rdot(acc, link, ring), _obj(core, ring.conv), ring)
        return acc[np.ix_([ri[i] for i in rows], [ci[j] for j in cols])]

    return evaluate


def example1() -> ExampleProblem:
    """Cauchy x Vandermonde x Bernstein-Vandermonde x Cauchy-Vandermonde product."""
    n1, n2, n3, n4, n5, l = 80, 70, 70, 50, 60, 10
    s1, s2, s3, s4, s5 = 2, 3, 2, 4, 3
    a1 = NodeSpec("cauchy_vandermonde", [_frac(i, n2) for i in range(1, n2 + 1)],
                  [_frac(j, n1) for j in range(1, l + 1)], row_mult=s2, col_mult=s1, l=l, ncols=n1)
    a2 = NodeSpec("bernstein_vandermonde", [_frac(1, n3 - i + 2) for i in range(1, n3 + 1)],
                  row_mult=s3, col_mult=s2, ncols=n2)
    a3 = NodeSpec("vandermonde", [_frac(1, n4 - i + 1) for i in range(1, n4 + 1)],
                  row_mult=s4, col_mult=s3, ncols=n3)
    a4 = NodeSpec("cauchy", [_frac(1, n5 - i + 1) for i in range(1, n5 + 1)],
                  [_frac(j + 1, n4) for j in range(1, n4 + 1)], row_mult=s5, col_mult=s4)
    specs = [a4, a3, a2, a1]
    chain = product_chain(*(expand_repeated(s) for s in specs))
    rows = [3 * i for i in range(60)]
    cols = [2 * j + 1 for j in range(80)]
    return ExampleProblem("example1", chain, rows, cols, _chain_evaluator(specs, rows, cols),
                          expected_zeros=10, notes={"specs": specs})


def _cv_example2() -> NodeSpec:
    n, m, l = 50, 50, 15
    return NodeSpec("cauchy_vandermonde", [_frac(i, 2 ** (n - i + 1)) for i in range(1, n + 1)],
                    [_frac(j * j, 2 ** (m - j + 1)) for j in range(1, l + 1)],
                    row_mult=3, col_mult=2, l=l, ncols=m)


def _triple(spec: NodeSpec, rows, cols, name, zeros) -> ExampleProblem:
    c = expand_repeated(spec)
    chain = product_chain(c, c.transpose(), c)
    core = core_matrix_exact(spec)
    ri = expansion_indices(spec.row_mult)
    ci = expansion_indices(spec.col_mult)
    rmul = np.zeros(spec.n_distinct, dtype=object)
    rmul.fill(0)
    for a in ri:
        rmul[a] += 1
    cmul = np.zeros(spec.m_distinct, dtype=object)
    cmul.fill(0)
    for b in ci:
        cmul[b] += 1

    def evaluate(ring: Ring) -> np.ndarray:
        # A = R C S^T S C^T R^T R C S^T with S^T S and R^T R diagonal
        c_ = _obj(core, ring.conv)
        g = _rdot(c_ * cmul[None, :], c_.T, ring)
        full = _rdot(g * rmul[None, :], c_, ring)
        return full[np.ix_([ri[i] for i in rows], [ci[j] for j in cols])]

    return ExampleProblem(name, chain, list(rows), list(cols), evaluate, expected_zeros=zeros,
                          notes={"spec": spec})


def example2() -> ExampleProblem:
    """``A1 A1^T A1`` for a Cauchy-Vandermonde ``A1`` with dyadic nodes."""
    spec = _cv_example2()
    rows = [3 * i + 1 for i in range(50)]
    cols = list(range(20, 80))
    return _triple(spec, rows, cols, "example2", 20)


def example3() -> ExampleProblem:
    """``A1 A1^T A1`` for a Vandermonde ``A1``."""
    n = 50
    spec = NodeSpec("vandermonde", [_frac(i + 1, n * n - 2 * i + 1) for i in range(1, n + 1)],
                    row_mult=2, col_mult=3, ncols=50)
    rows = list(range(10, 80))
    cols = [3 * i + 1 for i in range(50)]
    return _triple(spec, rows, cols, "example3", 15)


def random_bd_grid(seed: int, nrows: int = 90, ncols: int = 50) -> BDRepr:
    """Grid with ``off[i, j] = r_i / (j + 1)`` and random 0/1 bars."""
    rng = np.random.default_rng(seed)
    r = rng.random(nrows)
    off = r[:, None] / np.arange(1, ncols + 1)[None, :]
    bar = rng.integers(0, 2, size=(nrows, ncols)).astype(float)
    np.fill_diagonal(bar, 1.0)  # diagonal bars carry no information
    return BDRepr(bar, off)


def example4(seed: int = 7, nrows: int = 90, ncols: int = 50) -> ExampleProblem:
    """``A1 A1^T A1`` for a random grid ``A1``; seeded analogue."""
    from .oracle import dense_product

    rep = random_bd_grid(seed, nrows, ncols)
    c = repr_to_product(rep)
    chain = product_chain(c, c.transpose(), c)

    def evaluate_root(ring: Ring) -> np.ndarray:
        return dense_product(c, ring)

    def evaluate(ring: Ring) -> np.ndarray:
        a1 = evaluate_root(ring)
        return _rdot(_rdot(a1, a1.T, ring), a1, ring)

    root = ExampleProblem(f"example4-seed{seed}-root", c, list(range(nrows)),
                          list(range(ncols)), evaluate_root)
    return ExampleProblem(f"example4-seed{seed}", chain, list(range(nrows)), list(range(ncols)),
                          evaluate, expected_zeros=None, notes={"seed": seed, "grid": rep},
                          root=root, power=3)


PRESETS = {"example1": example1, "example2": example2, "example3": example3,
           "example4": example4}


def preset(name: str, **kwargs) -> ExampleProblem:
    """Look up an example preset by name."""
    try:
        fn = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}") from None
    return fn(**kwargs)


__all__ = [
    "FAMILIES", "GenerationError", "NodeSpec", "core_entry", "core_matrix_exact", "dense_exact",
    "neville_pairs", "bd_distinct", "expand_repeated", "product_chain", "submatrix_product_form",
    "ExampleProblem", "example1", "example2", "example3", "example4", "random_bd_grid", "preset",
    "expansion_indices", "round_once", "to_fraction", "Ring", "EXACT", "mod_ring",
]
