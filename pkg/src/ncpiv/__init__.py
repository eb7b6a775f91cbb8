"""Numerical laboratory for Hermite-type matrix orthogonal polynomials,
their Christoffel-Darboux kernels, Fredholm gap determinants, and the
associated non-commutative Painleve IV systems."""

__version__ = "0.1.0"
