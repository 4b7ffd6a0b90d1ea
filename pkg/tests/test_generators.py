from fractions import Fraction

import numpy as np
import pytest
from gmpy2 import mpq

from tnsvd.bsvd import svd_product
from tnsvd.generators import (EXACT, GenerationError, NodeSpec, bd_distinct, core_matrix_exact,
                              dense_exact, expand_repeated, neville_pairs, preset, product_chain,
                              random_bd_grid, submatrix_product_form)
from tnsvd.oracle import rank_exact
from tnsvd.representation import DomainError, expand_dense, repr_to_product

from _util import dense_chain, exact_equal, frac_matrix, random_chain

F = Fraction


def as_frac(rows):
    return frac_matrix([[F(int(v.numerator), int(v.denominator)) for v in row] for row in rows])


def test_cauchy_2x2_grid():
    bar, off = neville_pairs(core_matrix_exact(NodeSpec("cauchy", [1, 2], [1, 2])))
    assert exact_equal(off, [[F(1, 2), F(2, 3)], [F(2, 3), F(1, 36)]])
    assert all(b == 1 for b in bar.flat)


def test_vandermonde_3x3_grid():
    spec = NodeSpec("vandermonde", [1, 2, 3])
    bar, off = neville_pairs(core_matrix_exact(spec))
    assert exact_equal(off, [[1, 1, 1], [1, 1, 2], [1, 1, 2]])
    rep = bd_distinct(spec, exact=True)
    assert exact_equal(expand_dense(rep), [[1, 1, 1], [1, 2, 4], [1, 3, 9]])


def test_repeated_node_rows():
    a = F(3, 7)
    spec = NodeSpec("vandermonde", [a], row_mult=2, ncols=2)
    with pytest.raises(GenerationError):
        neville_pairs(dense_exact(spec))
    spec = NodeSpec("vandermonde", [a, 1], row_mult=[2, 1], ncols=2)
    chain = expand_repeated(spec, exact=True)
    assert exact_equal(dense_chain(chain), [[1, a], [1, a], [1, 1]])


@pytest.mark.parametrize("family,kw", [
    ("cauchy", dict(x_nodes=[F(1, 3), F(1, 2), 2], y_nodes=[F(1, 5), 1], row_mult=[2, 1, 3],
                    col_mult=[3, 2])),
    ("vandermonde", dict(x_nodes=[F(1, 4), F(1, 2), 1, 3], row_mult=2, col_mult=[1, 3, 1, 2])),
    ("bernstein_vandermonde", dict(x_nodes=[F(1, 5), F(1, 3), F(1, 2)], row_mult=[3, 1, 2],
                                   col_mult=2, ncols=4)),
    ("cauchy_vandermonde", dict(x_nodes=[F(k, 7) for k in range(1, 8)],
                                y_nodes=[F(1, 8), F(2, 8)], row_mult=3, col_mult=2, l=2, ncols=8)),
])
def test_repeated_chain_matches_entry_formulas(family, kw):
    spec = NodeSpec(family, **kw)
    chain = expand_repeated(spec, exact=True)
    assert chain.shape == spec.shape
    assert exact_equal(dense_chain(chain), as_frac(dense_exact(spec)))


def test_rounded_chain_rounds_each_parameter_once():
    spec = NodeSpec("cauchy", [F(1, 3), 1], [F(1, 7), F(2, 7)])
    ex = bd_distinct(spec, exact=True)
    fl = bd_distinct(spec)
    for v, w in zip(ex.off.flat, fl.off.flat):
        assert w == float(v)


def test_rank_law_for_repeated_nodes():
    spec = NodeSpec("cauchy_vandermonde", [F(k, 7) for k in range(1, 8)], [F(1, 8), F(2, 8)],
                    row_mult=3, col_mult=2, l=2, ncols=8)
    res = svd_product(expand_repeated(spec))
    assert res.rank == min(spec.n_distinct, spec.m_distinct) == 7
    assert res.zeros == min(spec.shape) - 7


def test_submatrix_product_form_deletes_rows_and_cols():
    rng = np.random.default_rng(0)
    p = random_chain(rng, [6, 4, 5])
    q = submatrix_product_form(p, [1, 3], [0, 4])
    ref = dense_chain(p)[np.ix_([0, 2, 4, 5], [1, 2, 3])]
    assert exact_equal(dense_chain(q), ref)
    assert rank_exact(dense_chain(q)) == rank_exact(ref)


def test_invalid_specs():
    with pytest.raises(DomainError):
        NodeSpec("vandermonde", [2, 1])
    with pytest.raises(DomainError):
        NodeSpec("bernstein_vandermonde", [F(1, 2), 1])
    with pytest.raises(ValueError):
        NodeSpec("hilbert", [1])
    with pytest.raises(DomainError):
        NodeSpec("cauchy_vandermonde", [1, 2], [1], l=2)


@pytest.mark.parametrize("name,shape,zeros", [("example1", (60, 80), 10),
                                              ("example2", (50, 60), 20),
                                              ("example3", (70, 50), 15)])
def test_presets_shape(name, shape, zeros):
    prob = preset(name)
    assert prob.shape == shape and prob.expected_zeros == zeros
    assert prob.submatrix_product.shape == shape


def test_example4_is_cube_of_root():
    prob = preset("example4", seed=3, nrows=9, ncols=5)
    assert prob.power == 3 and prob.root.shape == (9, 5)
    grid = random_bd_grid(3, 9, 5)
    assert np.all((grid.bar == 0) | (grid.bar == 1))
    root = as_frac(prob.root.evaluate(EXACT).tolist())
    assert exact_equal(root, dense_chain(repr_to_product(grid)))
    full = as_frac(prob.evaluate(EXACT).tolist())
    assert exact_equal(full, root.dot(root.T).dot(root))
    assert exact_equal(dense_chain(prob.product), full)
