import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tnsvd.representation import (BDRepr, BidiagonalFactor, BidiagonalProduct, DimensionError,
                                  DomainError, append_trailing_cols, append_trailing_rows,
                                  drop_trailing_cols, drop_trailing_rows, expand_dense,
                                  repr_to_product, transpose)

from _util import dense_chain, exact_equal, frac_matrix, random_grid
from strategies import grids

F = Fraction


def gbf_dense(rep):
    """Independent expansion from the 1-based factor formulas of the product form."""
    n, m = rep.shape
    g = lambda i, j: F(rep.off[i - 1, j - 1])
    gb = lambda i, j: F(rep.bar[i - 1, j - 1])
    a = np.full((n, m), F(0), dtype=object)
    for i in range(1, min(n, m) + 1):
        a[i - 1, i - 1] = g(i, i)
    for k in range(1, n):
        L = np.eye(n, dtype=int).astype(object) * F(1)
        for i in range(k, min(n - 1, m + k - 1) + 1):
            L[i - 1, i - 1] = gb(i + 1, i + 1 - k)
            L[i, i - 1] = g(i + 1, i + 1 - k)
        a = L.dot(a)
    for l in range(1, m):
        U = np.eye(m, dtype=int).astype(object) * F(1)
        for i in range(l, min(m - 1, n + l - 1) + 1):
            U[i - 1, i - 1] = gb(i + 1 - l, i + 1)
            U[i - 1, i] = g(i + 1 - l, i + 1)
        a = a.dot(U)
    return a


def test_identity_grid_expands_to_identity():
    rep = BDRepr.identity(3, 4)
    assert np.array_equal(expand_dense(rep), np.eye(3, 4))


@given(grids(max_n=4, max_m=4))
def test_expand_matches_independent_formula(rep):
    assert exact_equal(expand_dense(rep), gbf_dense(rep))


def test_random_3x3_expansion_exact():
    rng = np.random.default_rng(1)
    rep = random_grid(rng, 3, 3, bar_zero_prob=0.3)
    assert exact_equal(expand_dense(rep), dense_chain(repr_to_product(rep)))


def test_transpose_is_involution_and_moves_pairs():
    rng = np.random.default_rng(2)
    rep = random_grid(rng, 3, 4)
    t = transpose(rep)
    assert t.shape == (4, 3)
    for i in range(3):
        for j in range(4):
            assert t.pair(j, i) == rep.pair(i, j)
    assert transpose(t) == rep


@given(grids(max_n=4, max_m=5))
def test_transpose_expands_to_transpose(rep):
    assert exact_equal(expand_dense(transpose(rep)), expand_dense(rep).T)


def test_append_rows_fills_neutral_pairs():
    rng = np.random.default_rng(3)
    rep = random_grid(rng, 2, 3)
    out = append_trailing_rows(rep, 4)
    assert out.shape == (4, 3)
    assert all(out.pair(i, j) == (1, 0) for i in (2, 3) for j in range(3))
    assert exact_equal(out.bar[:2], rep.bar) and exact_equal(out.off[:2], rep.off)


def test_append_one_row_to_identity():
    out = append_trailing_rows(BDRepr.identity(3), 4)
    assert np.array_equal(expand_dense(out), np.eye(4, 3))


def test_append_rows_adds_zero_rows():
    rng = np.random.default_rng(4)
    rep = random_grid(rng, 3, 3)
    dense = expand_dense(append_trailing_rows(rep, 5))
    assert exact_equal(dense[:3], expand_dense(rep))
    assert all(v == 0 for v in dense[3:].flat)


def test_append_rows_rejects_small_t():
    with pytest.raises(DimensionError):
        append_trailing_rows(BDRepr.identity(3), 3)


def _symbolic_grid(n, m):
    rng = np.random.default_rng(5)
    return random_grid(rng, n, m, bar_zero_prob=0.0)


def test_drop_rows_t5_of_7x4():
    rep = random_grid(np.random.default_rng(6), 7, 4)
    rep.bar[5, :] = [F(2), F(3), F(5), F(7)]  # row 6: distinguishable bars
    out = drop_trailing_rows(rep, 5)
    for j in range(4):
        prod = np.prod([rep.bar[5, k] for k in range(j + 1)])
        assert out.pair(4, j) == (rep.bar[4, j], rep.off[4, j] * prod)
    assert exact_equal(out.off[:4], rep.off[:4])


def test_drop_rows_t2_of_7x4():
    rep = random_grid(np.random.default_rng(7), 7, 4)
    rep.bar[2, :] = [F(2), F(3), F(5), F(7)]
    out = drop_trailing_rows(rep, 2)
    assert out.pair(1, 0) == (rep.bar[1, 0], rep.off[1, 0] * F(2))
    assert out.pair(1, 1) == (rep.bar[1, 1], rep.off[1, 1] * F(2) * F(3))
    # columns beyond t are untouched
    assert out.pair(1, 2) == rep.pair(1, 2) and out.pair(1, 3) == rep.pair(1, 3)


def test_drop_rows_t2_expands_to_leading_rows():
    rep = random_grid(np.random.default_rng(8), 7, 4, bar_zero_prob=0.3)
    assert exact_equal(expand_dense(drop_trailing_rows(rep, 2)), expand_dense(rep)[:2])


def test_drop_rows_neutral_bars_leave_row_unchanged():
    rep = random_grid(np.random.default_rng(9), 5, 3)
    out = drop_trailing_rows(rep, 3)
    assert exact_equal(out.off, rep.off[:3]) and exact_equal(out.bar, rep.bar[:3])


def test_drop_cols_mirror_t5():
    rep = random_grid(np.random.default_rng(10), 4, 7)
    rep.bar[:, 5] = [F(2), F(3), F(5), F(7)]
    out = drop_trailing_cols(rep, 5)
    for i in range(4):
        prod = np.prod([rep.bar[k, 5] for k in range(i + 1)])
        assert out.pair(i, 4) == (rep.bar[i, 4], rep.off[i, 4] * prod)


def test_append_cols_fills_neutral_pairs():
    rep = random_grid(np.random.default_rng(11), 3, 2)
    out = append_trailing_cols(rep, 4)
    assert out.shape == (3, 4)
    assert all(out.pair(i, j) == (1, 0) for i in range(3) for j in (2, 3))


def test_drop_cols_expands_to_leading_block():
    rep = random_grid(np.random.default_rng(12), 3, 4, bar_zero_prob=0.3)
    assert exact_equal(expand_dense(drop_trailing_cols(rep, 2)), expand_dense(rep)[:, :2])


@given(grids(max_n=5, max_m=4, min_n=2), st.data())
def test_drop_rows_is_leading_block(rep, data):
    t = data.draw(st.integers(1, rep.nrows - 1))
    assert exact_equal(expand_dense(drop_trailing_rows(rep, t)), expand_dense(rep)[:t])


@given(grids(max_n=4, max_m=4), st.integers(1, 3))
def test_append_then_drop_roundtrip(rep, k):
    n = rep.nrows
    assert drop_trailing_rows(append_trailing_rows(rep, n + k), n) == rep


@given(grids(max_n=4, max_m=4))
def test_product_form_of_repr(rep):
    assert exact_equal(dense_chain(repr_to_product(rep)), expand_dense(rep))


def test_negative_and_nonfinite_values_rejected():
    with pytest.raises(DomainError):
        BDRepr(np.ones((2, 2)), np.array([[1.0, -1.0], [0.0, 1.0]]))
    with pytest.raises(DomainError):
        BDRepr(np.ones((2, 2)), np.array([[1.0, np.nan], [0.0, 1.0]]))
    with pytest.raises(DomainError):
        BidiagonalFactor("lower", 2, 2, [0], [1.0], [np.inf])


def test_diagonal_bars_reset_with_warning():
    bar = np.array([[3.0, 1.0], [1.0, 1.0]])
    with pytest.warns(UserWarning):
        rep = BDRepr(bar, np.eye(2))
    assert rep.bar[0, 0] == 1


def test_gauge_normalization_preserves_matrix():
    bar = frac_matrix([[1, 3], [F(1, 2), 1]])
    off = frac_matrix([[2, 5], [7, 3]])
    raw = BDRepr(bar.copy(), off.copy(), normalize=False)
    norm = BDRepr(bar.copy(), off.copy())
    assert all(v in (0, 1) for v in norm.bar.flat)
    assert exact_equal(expand_dense(norm), expand_dense(raw))


def test_product_dims_and_pair_count():
    rng = np.random.default_rng(13)
    fs = [BidiagonalFactor("lower", 5, 3, [0, 1], [1.0, 1.0], [0.5, 0.5]),
          BidiagonalFactor("upper", 3, 4, [2], [1.0], [2.0])]
    p = BidiagonalProduct(fs)
    assert p.dims == [5, 3, 4] and p.shape == (5, 4) and p.total_pairs == 3
    with pytest.raises(DimensionError):
        BidiagonalProduct([fs[1], fs[0]])


def test_canonical_flag():
    rep = BDRepr.identity(3)
    assert rep.canonical
    rep.off[1, 1] = 0.0
    assert not rep.canonical
