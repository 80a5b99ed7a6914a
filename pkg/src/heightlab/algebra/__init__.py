"""Exact polynomial arithmetic over Q and supporting numerics."""

from heightlab.algebra.poly import (
    ONE,
    T,
    ZERO,
    Poly,
    Rational,
    divides,
    exquo,
    format_poly,
    format_rational,
    ord_at,
    poly_divmod,
    poly_gcd,
    poly_gcd_many,
    rational_roots,
    squarefree_factorization,
)
from heightlab.algebra.projective import ProjPointK, proj_normalize
from heightlab.algebra.resultant import BiForm, resultant_forms
from heightlab.algebra.roots import RootList, complex_roots

__all__ = [
    "BiForm",
    "ONE",
    "Poly",
    "ProjPointK",
    "Rational",
    "RootList",
    "T",
    "ZERO",
    "complex_roots",
    "divides",
    "exquo",
    "format_poly",
    "format_rational",
    "ord_at",
    "poly_divmod",
    "poly_gcd",
    "poly_gcd_many",
    "proj_normalize",
    "rational_roots",
    "resultant_forms",
    "squarefree_factorization",
]
