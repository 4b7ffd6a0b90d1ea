import os
from fractions import Fraction

import gmpy2
import numpy as np
import pytest

from tnsvd.generators import preset
from tnsvd.oracle import (BigRationalMatrix, OracleResult, cached, dense_product_exact,
                          example_reference, matrix_reference, rank_exact, rank_modular,
                          reference_svd, relative_errors)

from _util import dense_chain, exact_equal, frac_matrix, random_chain, rel_err

F = Fraction


def test_identity():
    res = reference_svd(np.eye(4, dtype=int).tolist())
    assert res.rank == 4 and all(v == 1 for v in res.sigma)


def test_all_ones_2x2():
    res = reference_svd([[1, 1], [1, 1]])
    assert res.rank == 1 and rel_err(res.sigma[0], 2) <= 2.0 ** -400


def test_diagonal_sorted():
    res = reference_svd([[F(1, 3), 0, 0], [0, 5, 0], [0, 0, F(1, 10 ** 40)]])
    assert [float(v) for v in res.sigma] == [5.0, 1 / 3, 1e-40]


def test_duplicated_rows_rank():
    m = [[1, 2, 3], [1, 2, 3], [2, 5, 1], [3, 7, 4]]
    assert rank_exact(m) == 2
    assert reference_svd(m).rank == 2


def test_modular_rank_agrees():
    rng = np.random.default_rng(0)
    for seed in range(5):
        p = random_chain(rng, [6, 3, 5], zero_prob=0.3)
        d = dense_chain(p)
        assert rank_modular(d.tolist()) == rank_exact(d)


def test_triple_product_matches_double_svd():
    rng = np.random.default_rng(1)
    a = frac_matrix(rng.integers(0, 9, size=(9, 5)))
    b = frac_matrix(rng.integers(0, 9, size=(5, 5)))
    c = frac_matrix(rng.integers(0, 9, size=(5, 5)))
    m = a.dot(b.dot(c))
    assert exact_equal(m, a.dot(b).dot(c))
    res = reference_svd(m.tolist())
    s = np.linalg.svd(m.astype(float), compute_uv=False)
    k = res.rank
    assert max(relative_errors(res.sigma, s[:k])) <= 1e-10 * s[0] / s[k - 1]


def test_dense_product_is_exact():
    rng = np.random.default_rng(2)
    p = random_chain(rng, [4, 3, 5, 2])
    assert BigRationalMatrix(dense_chain(p).tolist()) == dense_product_exact(p)


def test_example3_leading_value():
    res = example_reference(preset("example3"))
    assert rel_err(res.sigma[0], gmpy2.mpfr("2.510397022449398e+003", 200)) <= 5e-16
    assert res.rank == 35


def test_cache_round_trip(tmp_path, monkeypatch):
    monkeypatch.setenv("TNSVD_ORACLE_CACHE", str(tmp_path))
    calls = []

    def compute():
        calls.append(1)
        return reference_svd([[3, 1], [0, 2]])

    a = cached("unit-test", compute)
    b = cached("unit-test", compute)
    assert len(calls) == 1 and len(os.listdir(tmp_path)) == 1
    assert a.sigma == b.sigma and a.rank == b.rank and a.precision == b.precision


def test_json_is_exact():
    res = reference_svd([[F(1, 3), F(1, 7)], [F(2, 9), F(5, 11)]])
    back = OracleResult.from_json(res.to_json())
    assert back.sigma == res.sigma


def test_matrix_reference_uses_digest(tmp_path, monkeypatch):
    monkeypatch.setenv("TNSVD_ORACLE_CACHE", str(tmp_path))
    r1 = matrix_reference([[1, 2], [3, 4]])
    r2 = matrix_reference([[1, 2], [3, 5]])
    assert len(os.listdir(tmp_path)) == 2 and r1.sigma != r2.sigma
