import math

import numpy as np
import pytest
from astropy.table import Table

from thin_spectra import random_utils, spectral
from thin_spectra.exceptions import DegenerateInput, NotInteriorOfBand
from thin_spectra.intervals import EnergyWindow
from thin_spectra.spectral import BandSet
from thin_spectra.testing import assert_bands_close, create_word
from thin_spectra.transfer import discriminant, discriminant_derivative
from thin_spectra.words import Word


def test_free_bands():
    assert_bands_close(spectral.band_edges([0.0]), [[-2.0, 2.0]])
    assert_bands_close(spectral.band_edges(Word([1.5]), lam=2.0), [[1.0, 5.0]])


def test_period_two_edges():
    root5 = math.sqrt(5.0)
    assert_bands_close(spectral.band_edges(Word([2.0, 0.0])), [[1 - root5, 0.0], [2.0, 1 + root5]])


def test_constant_word_closes_gaps():
    bands = spectral.band_edges(Word(np.zeros(4)))
    assert bands.period == 4
    assert bands.measure == pytest.approx(4.0)
    interior = bands.gaps()[1:-1]
    assert all(hi - lo < 1e-12 for lo, hi in interior)


def test_empty_word():
    with pytest.raises(DegenerateInput):
        spectral.band_edges(np.array([]))


def test_membership_agrees_with_discriminant():
    for q in range(2, 9):
        x = create_word(q)
        bands = spectral.band_edges(x)
        assert bands.period == q
        edges = bands.bands.ravel()
        for E in np.linspace(edges.min() - 0.5, edges.max() + 0.5, 2001):
            if np.min(np.abs(edges - E)) < 1e-8:
                continue
            assert bands.contains(E) == (abs(discriminant(x, E)) <= 2.0)


def test_large_coupling_bands_are_valid():
    x = create_word(8)
    bands = spectral.band_edges(x, lam=5.0)
    widths = bands.bands[:, 1] - bands.bands[:, 0]
    assert np.all(widths > 0)
    for lo, hi in bands:
        assert abs(discriminant(x, 0.5 * (lo + hi), 5.0)) <= 2.0 + 1e-6


@pytest.mark.parametrize("q", [2, 8, 16, 32, 64])
def test_edges_sit_on_the_threshold(q):
    ulp = np.finfo(float).eps
    for _ in range(5):
        x = create_word(q)
        scale = 2.0 + np.max(np.abs(x.values))
        for E in spectral.band_edges(x).bands.ravel():
            value, log_derivative = discriminant_derivative(x, E)
            # an edge is only known to within a few ulps of the operator norm
            tolerance = 1e-9 + 8 * q * ulp * (scale + abs(E)) * math.exp(log_derivative)
            assert abs(abs(value) - 2.0) <= tolerance


def test_large_period_memory_warning(monkeypatch, caplog):
    monkeypatch.setattr(spectral, "_LARGE_PERIOD", 2)
    monkeypatch.setattr(spectral, "check_memory_allocation", lambda n_bytes: False)
    with caplog.at_level("WARNING", logger="thin_spectra.spectral"):
        spectral.band_edges(Word([1.0, 0.0, -1.0]))
    assert "may not fit" in caplog.text


def test_lyapunov_vanishes_on_bands():
    x = create_word(5)
    bands = spectral.band_edges(x)
    for _ in range(100):
        lo, hi = bands.bands[random_utils.generate_int(0, bands.period - 1)]
        E = random_utils.generate_float(lo + 1e-6 * (hi - lo), hi - 1e-6 * (hi - lo))
        assert spectral.lyapunov(x, E) <= 1e-6
    for lo, hi in bands.gaps()[1:-1]:
        assert spectral.lyapunov(x, 0.5 * (lo + hi)) > 0
    assert spectral.lyapunov(x, bands.bands[-1, 1] + 1.0) > 0


def test_ids_counts_bands():
    x = create_word(6)
    bands = spectral.band_edges(x)
    q = bands.period
    grid = np.linspace(bands.bands[0, 0] - 0.1, bands.bands[-1, 1] + 0.1, 2001)
    values = [spectral.ids(x, E, bands=bands) for E in grid]
    assert np.all(np.diff(values) >= -1e-12)
    assert values[0] == 0.0 and values[-1] == 1.0
    for j, (lo, hi) in enumerate(bands):
        assert spectral.ids(x, hi, bands=bands) - spectral.ids(x, lo, bands=bands) == pytest.approx(1.0 / q, abs=1e-9)
        assert spectral.ids(x, hi - 1e-9 * (hi - lo), bands=bands) == pytest.approx((j + 1) / q, abs=1e-3)


def test_free_ids():
    assert spectral.ids(Word([0.0]), 0.0) == pytest.approx(0.5)
    assert spectral.ids_derivative_conjugacy(Word([0.0]), 0.0) == pytest.approx(1.0 / (2.0 * math.pi))


def test_ids_derivative_matches_finite_differences():
    h = 1e-6
    for _ in range(20):
        x = create_word(random_utils.generate_int(1, 6))
        bands = spectral.band_edges(x)
        for _ in range(50):
            lo, hi = bands.bands[random_utils.generate_int(0, len(bands) - 1)]
            E = lo + (hi - lo) * random_utils.generate_float(0.1, 0.9)
            numeric = (spectral.ids(x, E + h, bands=bands) - spectral.ids(x, E - h, bands=bands)) / (2 * h)
            assert spectral.ids_derivative_conjugacy(x, E) == pytest.approx(numeric, rel=1e-3)


def test_ids_derivative_outside_band():
    with pytest.raises(NotInteriorOfBand):
        spectral.ids_derivative_conjugacy(Word([0.0]), 2.5)
    with pytest.raises(NotInteriorOfBand):
        spectral.ids_derivative_conjugacy(Word([0.0]), 2.0)


def test_in_spectrum():
    assert spectral.in_spectrum(Word([0.0]), 2.0)
    assert not spectral.in_spectrum(Word([0.0]), 2.1)


def test_band_set():
    bands = BandSet([[2.0, 3.0], [-1.0, 0.5], [0.5, 1.0]])
    assert bands.bands[0].tolist() == [-1.0, 0.5]
    assert bands.measure == 3.0
    assert bands.gaps() == [(-math.inf, -1.0), (1.0, 2.0), (3.0, math.inf)]
    assert bands.gap_containing(1.5) == (1.0, 2.0)
    assert bands.gap_containing(0.5) is None
    assert bands.as_window() == EnergyWindow([[-1.0, 1.0], [2.0, 3.0]])
    assert spectral.measure_in_window(bands, [[0.0, 2.5]]) == 1.5

    with pytest.raises(ValueError):
        BandSet([[1.0, 0.0]])
    with pytest.raises(DegenerateInput):
        BandSet([])


def test_band_table(tmp_path):
    bands = spectral.band_edges(create_word(5))
    path = tmp_path / "bands.csv"
    bands.to_table().write(path, format="ascii.csv")
    assert path.read_text().splitlines()[0] == "band_index,E_minus,E_plus"

    restored = BandSet.from_table(Table.read(path, format="ascii.csv"))
    assert np.array_equal(restored.bands, bands.bands)


def test_band_tree():
    bands = BandSet([[0.0, 1.0]])
    assert bands.to_tree() == {"period": 1, "bands": [[0.0, 1.0]]}
    with pytest.raises(ValueError):
        BandSet.from_tree({"period": 2, "bands": [[0.0, 1.0]]})
