import numpy as np
import pytest

from thin_spectra import random_utils
from thin_spectra.sl2 import TraceClass, classify
from thin_spectra.testing import (
    create_cantor_bands,
    create_cell,
    create_continuum_word,
    create_elliptic,
    create_hyperbolic,
    create_word,
)
from thin_spectra.words import FullLine, PolymerFamily, SieveFamily


@pytest.mark.parametrize("family", [None, FullLine(), PolymerFamily(n=3), SieveFamily(n=2, b=(0.5,))])
def test_create_word_belongs_to_family(family):
    word = create_word(5, family)
    assert len(word) == 5
    if family is not None:
        assert family.contains(word)
    assert np.all(np.abs(word.values) <= 1.0)


def test_factories_are_seeded():
    random_utils.set_seed(7)
    first = create_word(4), create_cell()
    random_utils.set_seed(7)
    second = create_word(4), create_cell()
    assert first == second


def test_create_matrices():
    for _ in range(100):
        assert classify(create_elliptic()) == TraceClass.ELLIPTIC
        A = create_hyperbolic()
        assert classify(A) == TraceClass.HYPERBOLIC
        assert abs(A.det - 1.0) < 1e-9


def test_create_cells():
    cell = create_cell(n_sub=6, length=1.5, max_value=2.0)
    assert cell.n_sub == 6
    assert cell.length == 1.5
    assert max(abs(v) for v in cell.samples) <= 2.0
    assert len(create_continuum_word(4)) == 4


def test_create_cantor_bands():
    bands = create_cantor_bands(3)
    assert bands.period == 8
    assert bands.measure == pytest.approx((2.0 / 3.0) ** 3)
    assert bands.bands[0].tolist() == pytest.approx([0.0, 1.0 / 27.0])
