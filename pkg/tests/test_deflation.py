from fractions import Fraction

import numpy as np
import pytest

from tnsvd.assembly import split_at_min
from tnsvd.deflation import (DeflationError, eliminate_column, periodic_deflate,
                             reveal_zeros)
from tnsvd.oracle import rank_exact
from tnsvd.representation import BDRepr, BidiagonalFactor, BidiagonalProduct, expand_dense

from _util import EPS, dense_chain, exact_equal, frac_matrix, random_chain, random_grid

F = Fraction


def deficient_chain(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 5))
    dims = [int(v) for v in rng.integers(2, 8, size=k + 1)]
    return random_chain(rng, dims, zero_prob=0.35, exact=False, density=0.8)


def test_reveal_zero_row_from_bar():
    rep = random_grid(np.random.default_rng(0), 4, 3)
    rep.bar[2, 0] = F(0)
    assert reveal_zeros(rep, "rows") == [1]
    assert all(v == 0 for v in expand_dense(rep)[1])


def test_reveal_zero_col_from_bar():
    rep = random_grid(np.random.default_rng(1), 3, 4)
    rep.bar[0, 3] = F(0)
    assert reveal_zeros(rep, "cols") == [2]
    assert all(v == 0 for v in expand_dense(rep)[:, 2])


def test_eliminate_column_is_lower_factor():
    rep = random_grid(np.random.default_rng(2), 4, 3)
    before = frac_matrix(expand_dense(rep))
    out, x = eliminate_column(rep.copy())
    L = np.eye(4, dtype=int).astype(object) * F(1)
    for i in range(3):
        L[i + 1, i] = -x[i]
    assert exact_equal(expand_dense(out), L.dot(before))
    assert all(v == 0 for v in out.off[1:, 0])


@pytest.mark.parametrize("seed", range(30))
def test_rank_matches_exact_rank(seed):
    p = deficient_chain(seed)
    res = periodic_deflate(p)
    assert res.rank == rank_exact(dense_chain(p))


@pytest.mark.parametrize("seed", range(20))
def test_orthogonal_factors_and_residual(seed):
    p = deficient_chain(100 + seed)
    n0, nk = p.shape
    res = periodic_deflate(p, accumulate=True)
    G, V = res.g_acc.matrix(), res.v_acc.matrix()
    A = dense_chain(p).astype(float)
    assert np.linalg.norm(G.T @ G - np.eye(n0)) <= 4 * n0 * EPS
    assert np.linalg.norm(V.T @ V - np.eye(nk)) <= 4 * nk * EPS
    resid = np.linalg.norm(G.T @ A @ V - res.b_dense())
    assert resid <= 10 * (n0 + nk) ** 2 * EPS * max(np.linalg.norm(A), np.finfo(float).tiny)
    assert np.all(np.asarray(res.bbar_diag, dtype=float) > 0)
    assert np.all(np.asarray(res.bbar_super, dtype=float) >= 0)


def test_full_rank_upper_factor_needs_no_rotation():
    f = BidiagonalFactor("upper", 4, 4, [0, 1, 2, 3], [2.0, 3.0, 1.0, 5.0], [1.0, 0.5, 4.0, 0.0])
    res = periodic_deflate(BidiagonalProduct([f]), accumulate=True)
    assert res.rank == 4
    assert np.array_equal(res.g_acc.matrix(), np.eye(4))
    assert np.array_equal(res.v_acc.matrix(), np.eye(4))
    assert np.array_equal(res.bbar_dense(), f.dense())


def test_zero_matrix_has_rank_zero():
    f = BidiagonalFactor("lower", 3, 2, [0, 1], [0.0, 0.0], [0.0, 0.0])
    res = periodic_deflate(BidiagonalProduct([f]))
    assert res.rank == 0 and res.b_dense().shape == (3, 2)


def test_identity_pivots():
    rep = BDRepr.identity(3)
    s = split_at_min(BidiagonalProduct([BidiagonalFactor("upper", 3, 3, [], [], [])]))
    res = periodic_deflate(s)
    assert res.rank == 3
    assert np.allclose(res.bbar_dense(), np.eye(3))


@pytest.mark.parametrize("seed", range(15))
def test_strict_mode_raises_only_on_zero_pivots(seed):
    p = deficient_chain(200 + seed)
    loose = periodic_deflate(p)
    if loose.zero_pivots:
        with pytest.raises(DeflationError):
            periodic_deflate(p, strict=True)
        return
    strict = periodic_deflate(p, strict=True)
    assert strict.rank == loose.rank
    assert np.array_equal(strict.bbar_dense(), loose.bbar_dense())


def test_zero_leading_column_is_moved_out():
    f = BidiagonalFactor("upper", 3, 3, [0, 1, 2], [0.0, 1.0, 1.0], [0.0, 1.0, 0.0])
    res = periodic_deflate(BidiagonalProduct([f]), accumulate=True)
    assert res.rank == 2
    assert {m.kind for m in res.moves} == {"row", "col"}
