from numpy.testing import assert_allclose, assert_array_equal

from ..sl2 import Mat2
from ..spectral import BandSet
from ..words import Word


def assert_mat2_close(A, B, atol=1e-12, rtol=0.0):
    """
    Assert entrywise closeness of two 2x2 matrices.

    Parameters
    ----------
    A, B : `thin_spectra.sl2.Mat2` or array-like
    atol, rtol : float
        Passed to `numpy.testing.assert_allclose`.

    Raises
    ------
    AssertionError
        If any entry differs by more than the tolerance.
    """
    __tracebackhide__ = True

    a = A.to_array() if isinstance(A, Mat2) else A
    b = B.to_array() if isinstance(B, Mat2) else B
    assert_allclose(a, b, atol=atol, rtol=rtol)


def assert_word_equal(x, y):
    """
    Assert that two words have the same block size and letters.
    """
    __tracebackhide__ = True

    assert isinstance(x, Word) and isinstance(y, Word)
    assert x.block_size == y.block_size
    assert len(x) == len(y)
    assert_array_equal(x.values, y.values)


def assert_bands_close(bands, expected, atol=1e-10):
    """
    Assert that a band set matches expected ``[lo, hi]`` pairs in order.
    """
    __tracebackhide__ = True

    actual = bands.bands if isinstance(bands, BandSet) else bands
    expected = expected.bands if isinstance(expected, BandSet) else expected
    assert len(actual) == len(expected)
    assert_allclose(actual, expected, atol=atol, rtol=0.0)
