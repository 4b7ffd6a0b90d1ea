"""Hypothesis strategies for nonnegative rational representations and chains."""
from __future__ import annotations

from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from tnsvd.representation import BDRepr, BidiagonalFactor, BidiagonalProduct

values = st.one_of(st.just(Fraction(0)),
                   st.fractions(min_value=Fraction(1, 16), max_value=Fraction(4), max_denominator=16))
positive = st.fractions(min_value=Fraction(1, 16), max_value=Fraction(4), max_denominator=16)
bars = st.sampled_from([Fraction(0), Fraction(1), Fraction(1), Fraction(1)])


@st.composite
def grids(draw, max_n=5, max_m=5, min_n=1, min_m=1, canonical=False):
    n = draw(st.integers(min_n, max_n))
    m = draw(st.integers(min_m, max_m))
    bar = np.empty((n, m), dtype=object)
    off = np.empty((n, m), dtype=object)
    for i in range(n):
        for j in range(m):
            bar[i, j] = Fraction(1) if i == j else draw(bars)
            off[i, j] = draw(positive if (canonical and i == j) else values)
    return BDRepr(bar, off, normalize=False)


@st.composite
def factors(draw, n, m=None, orientation=None):
    m = n if m is None else m
    orientation = orientation or draw(st.sampled_from(["lower", "upper"]))
    k = min(n, m)
    idx = sorted(draw(st.sets(st.integers(0, k - 1), max_size=k))) if k else []
    b = np.array([draw(values) for _ in idx] + [Fraction(0)], dtype=object)[:-1]
    span = n if orientation == "lower" else m
    o = np.array([draw(values) if i + 1 < span else Fraction(0) for i in idx] + [Fraction(0)],
                 dtype=object)[:-1]
    return BidiagonalFactor(orientation, n, m, idx, b, o)


@st.composite
def chains(draw, max_k=4, max_dim=5):
    k = draw(st.integers(1, max_k))
    dims = [draw(st.integers(1, max_dim)) for _ in range(k + 1)]
    return BidiagonalProduct([draw(factors(a, b)) for a, b in zip(dims, dims[1:])])
