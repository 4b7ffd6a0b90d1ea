from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tnsvd.extraction import delete_col, delete_row, extract_submatrix, kept_to_deleted
from tnsvd.representation import BDRepr, DimensionError, expand_dense

from _util import exact_equal, random_grid
from strategies import grids


def test_delete_middle_row_of_identity():
    out = delete_row(BDRepr.identity(3, exact=True), 1)
    assert exact_equal(expand_dense(out), [[1, 0, 0], [0, 0, 1]])


def test_delete_first_col_of_identity():
    out = delete_col(BDRepr.identity(3, exact=True), 0)
    assert exact_equal(expand_dense(out), [[0, 0], [1, 0], [0, 1]])


@pytest.mark.parametrize("seed", range(10))
def test_fixed_index_sets(seed):
    rng = np.random.default_rng(seed)
    rep = random_grid(rng, 6, 6, zero_prob=0.2, bar_zero_prob=0.2)
    out = extract_submatrix(rep, rows=[1, 3], cols=[0, 4])
    dense = expand_dense(rep)
    ref = dense[np.ix_([0, 2, 4, 5], [1, 2, 3, 5])]
    assert exact_equal(expand_dense(out), ref)
    assert all(v >= 0 for v in out.off.flat)


@settings(max_examples=80)
@given(grids(max_n=6, max_m=6, min_n=2, min_m=2), st.data())
def test_random_submatrices(rep, data):
    n, m = rep.shape
    rows = data.draw(st.sets(st.integers(0, n - 1), max_size=n - 1))
    cols = data.draw(st.sets(st.integers(0, m - 1), max_size=m - 1))
    out = extract_submatrix(rep, sorted(rows), sorted(cols))
    keep_r = kept_to_deleted(rows, n)
    keep_c = kept_to_deleted(cols, m)
    assert exact_equal(expand_dense(out), expand_dense(rep)[np.ix_(keep_r, keep_c)])
    assert out.shape == (len(keep_r), len(keep_c))


def test_kept_to_deleted_complement():
    assert kept_to_deleted([0, 2, 3], 5) == [1, 4]


def test_float_extraction_entrywise():
    rng = np.random.default_rng(3)
    rep = random_grid(rng, 7, 5, exact=False, zero_prob=0.1)
    out = extract_submatrix(rep, [0, 6], [2])
    ref = expand_dense(rep)[np.ix_([1, 2, 3, 4, 5], [0, 1, 3, 4])]
    got = expand_dense(out)
    mask = ref > 0
    assert np.all(got[~mask] == 0)
    assert np.max(np.abs(got[mask] / ref[mask] - 1)) <= 1e-13


def test_invalid_indices():
    rep = BDRepr.identity(3)
    with pytest.raises(DimensionError):
        extract_submatrix(rep, [3])
    with pytest.raises(DimensionError):
        extract_submatrix(rep, [0, 0])
    with pytest.raises(DimensionError):
        extract_submatrix(rep, [0, 1, 2])
    with pytest.raises(DimensionError):
        delete_row(BDRepr.identity(1, 3), 0)
