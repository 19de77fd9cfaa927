"""
Helper methods for writing tests that involve thin_spectra objects.
"""
from .assertions import assert_bands_close, assert_mat2_close, assert_word_equal
from .factories import create_cantor_bands, create_cell, create_continuum_word, create_elliptic, create_hyperbolic, create_word

__all__ = [
    "assert_bands_close",
    "assert_mat2_close",
    "assert_word_equal",
    "create_cantor_bands",
    "create_cell",
    "create_continuum_word",
    "create_elliptic",
    "create_hyperbolic",
    "create_word",
]
