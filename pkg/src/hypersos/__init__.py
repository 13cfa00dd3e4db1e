"""Exact sum-of-squares proof objects for hypercontractive inequalities."""

from .polycore import BACKEND, BigRational, IndeterminateSpace, SparsePoly

__all__ = ["BACKEND", "BigRational", "IndeterminateSpace", "SparsePoly"]
__version__ = "0.1.0"
