"""Accurate SVDs of nonnegative bidiagonal matrix products."""
from .representation import (BDRepr, BidiagonalFactor, BidiagonalProduct, DimensionError,
                             DomainError, ElementPair, expand_dense, transpose)
from .passthrough import GivensRotation, OrthogonalAccumulator, apply_factor
from .assembly import SplitProduct, assemble, assemble_scaled, split_at_min
from .extraction import extract_submatrix
from .deflation import DeflationError, DeflationResult, periodic_deflate
from .bsvd import ConvergenceError, SVDResult, bidiagonal_singular_values, bidiagonal_svd, svd_product

__all__ = [
    "BDRepr", "BidiagonalFactor", "BidiagonalProduct", "DimensionError", "DomainError",
    "ElementPair", "expand_dense", "transpose", "GivensRotation", "OrthogonalAccumulator",
    "apply_factor", "SplitProduct", "assemble", "assemble_scaled", "split_at_min",
    "extract_submatrix", "DeflationError", "DeflationResult", "periodic_deflate",
    "ConvergenceError", "SVDResult", "bidiagonal_singular_values", "bidiagonal_svd",
    "svd_product",
]
