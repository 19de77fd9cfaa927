import logging
import math

import numpy as np
import pytest

from thin_spectra import gaps, random_utils
from thin_spectra.exceptions import BlockMismatch, DepthExhausted, ExceptionalEnergy, NotFound
from thin_spectra.gaps import GapCertificate, _semigroup_search
from thin_spectra.sl2 import TOL_HYP, Mat2, commutator_norm
from thin_spectra.testing import create_elliptic, create_word
from thin_spectra.transfer import discriminant, transfer_word
from thin_spectra.words import FullLine, PolymerFamily, SieveFamily, Word, word_distance

log = logging.getLogger(__name__)

TWO_SIEVE = SieveFamily(n=1, b=(0.0,))


def assert_certificate(certificate, x, E, epsilon, lam=1.0):
    __tracebackhide__ = True

    assert certificate.verify(epsilon, original=x)
    assert abs(discriminant(certificate.word, E, lam)) > 2.0 + TOL_HYP
    assert word_distance(x, certificate.word) < epsilon


def test_two_sieve_exceptional_set():
    exceptional = gaps.exceptional_set(TWO_SIEVE)
    assert len(exceptional.roots) == 1
    assert abs(exceptional.roots[0]) <= 1e-10
    assert exceptional.residuals[0] <= 1e-10


def test_two_sieve_trace_is_degenerate_at_zero():
    for _ in range(100):
        v = random_utils.generate_float(-10.0, 10.0)
        assert abs(discriminant(Word([[v, 0.0]]), 0.0) + 2.0) <= 1e-12


@pytest.mark.parametrize(
    "family, expected",
    [
        (SieveFamily(n=1, b=(0.5,)), [0.5]),
        (SieveFamily(n=2, b=(0.0,)), [-1.0, 1.0]),
        (SieveFamily(n=1, b=(0.25,), coupling=2.0), [0.5]),
        (SieveFamily(n=1, b=(0.0, 0.0)), [-1.0, 1.0]),
    ],
)
def test_sieve_exceptional_sets(family, expected):
    assert gaps.exceptional_set(family).roots == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("family", [FullLine(), PolymerFamily(n=3), SieveFamily(n=2)])
def test_empty_exceptional_sets(family):
    exceptional = gaps.exceptional_set(family)
    assert exceptional.roots == ()
    assert exceptional.distance(0.0) == float("inf")


def test_affine_trace_solve():
    M = Mat2(1.0, -1.0, 1.0, 0.0)
    v = gaps.affine_trace_solve(M, 1.0)
    assert v == 2.0
    assert abs(discriminant([v, 0.0], 1.0)) == pytest.approx(3.0)
    assert gaps.affine_trace_solve(M, 1.0, bound=1.0) is None
    assert gaps.affine_trace_solve(Mat2(0.0, -1.0, 1.0, 0.0), 1.0) is None


@pytest.mark.parametrize("family", [FullLine(), PolymerFamily(n=2), FullLine(coupling=0.5)])
def test_letter_search_free_families(family):
    for E in (-5.0, 0.0, 1.3):
        letter = gaps.letter_hyperbolic_search(family, E)
        assert abs(gaps.letter_trace(family, letter.values, E)) > 2.0


# tr T(3, 0)**n = 2 T_n(3/2)
POLYMER_TRACES = {1: 3.0, 2: 7.0, 3: 18.0, 4: 47.0}


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_letter_search_polymer_grid(n):
    family = PolymerFamily(n=n)
    for E in np.linspace(-5.0, 5.0, 101):
        letter = gaps.letter_hyperbolic_search(family, E)
        assert letter.values == pytest.approx((E - 3.0,) * n)
        assert gaps.letter_trace(family, letter.values, E) == pytest.approx(POLYMER_TRACES[n])


def _forward_difference(x, order, start, h=1.0, lam=1.0):
    return sum((-1) ** (order - k) * math.comb(order, k) * discriminant(x, start + k * h, lam) for k in range(order + 1))


@pytest.mark.parametrize("q", [1, 2, 3, 5, 8])
@pytest.mark.parametrize("lam", [1.0, 2.5])
def test_discriminant_is_monic(q, lam):
    x = create_word(q)
    start = -0.5 * q
    # the q-th difference of a degree q polynomial is q! h**q times its leading coefficient
    assert _forward_difference(x, q, start, lam=lam) == pytest.approx(math.factorial(q), rel=1e-6)
    assert _forward_difference(x, q + 1, start, lam=lam) == pytest.approx(0.0, abs=1e-6 * math.factorial(q + 1))


def test_letter_search_sieve():
    letter = gaps.letter_hyperbolic_search(TWO_SIEVE, 1.0)
    assert letter.values == (2.0, 0.0)
    assert abs(gaps.letter_trace(TWO_SIEVE, letter.values, 1.0)) == pytest.approx(3.0)
    with pytest.raises(NotFound):
        gaps.letter_hyperbolic_search(TWO_SIEVE, 0.0)


def test_open_gap_returns_hyperbolic_input():
    x = Word([5.0])
    certificate = gaps.open_gap(x, 0.0, 0.5, FullLine())
    assert certificate.word == x
    assert certificate.distance_to_input == 0.0
    assert certificate.trace == -5.0


def test_open_gap_avoids_input_when_asked():
    x = Word([5.0])
    certificate = gaps.open_gap(x, 0.0, 0.5, FullLine(), allow_input=False)
    assert certificate.word != x
    assert_certificate(certificate, x, 0.0, 0.5)


def test_open_gap_free_elliptic():
    x = Word([0.0])
    certificate = gaps.open_gap(x, 0.0, 0.5, FullLine())
    assert len(certificate.word) > 1
    assert_certificate(certificate, x, 0.0, 0.5)


def test_open_gap_dyadic_lengths():
    x = Word([0.0])
    for E in (-0.3, 0.0, 0.2):
        certificate = gaps.open_gap(x, E, 0.5, FullLine(), dyadic=True)
        n = len(certificate.word)
        assert n & (n - 1) == 0
        assert_certificate(certificate, x, E, 0.5)


def test_open_gap_parabolic_input():
    # T(0, 2) has trace 2 and is not the identity
    x = Word([0.0])
    certificate = gaps.open_gap(x, 2.0, 0.1, FullLine())
    assert_certificate(certificate, x, 2.0, 0.1)


def test_open_gap_with_coupling():
    family = FullLine(coupling=2.0)
    x = Word([0.0, 0.3])
    certificate = gaps.open_gap(x, 0.1, 0.4, family)
    assert certificate.coupling == 2.0
    assert_certificate(certificate, x, 0.1, 0.4, lam=2.0)


def test_open_gap_errors():
    x = Word([[0.3, 0.0]])
    with pytest.raises(ExceptionalEnergy):
        gaps.open_gap(x, 0.0, 0.5, TWO_SIEVE)
    with pytest.raises(ExceptionalEnergy):
        gaps.open_gap(x, 1e-7, 0.5, TWO_SIEVE)
    with pytest.raises(BlockMismatch):
        gaps.open_gap(Word([0.3]), 1.0, 0.5, TWO_SIEVE)
    with pytest.raises(ValueError):
        gaps.open_gap(x, 1.0, 0.0, TWO_SIEVE)


def test_open_gap_depth_exhausted():
    with pytest.raises(DepthExhausted) as err:
        gaps.open_gap(Word([0.0]), 0.0, 0.5, FullLine(), depth_cap=1)
    assert err.value.depth_cap == 1


def test_two_sieve_gap_richness():
    for _ in range(200):
        x = create_word(4, TWO_SIEVE)
        E = random_utils.generate_float(0.05, 3.0)
        if random_utils.generate_int(0, 1):
            E = -E
        certificate = gaps.open_gap(x, E, 0.5, TWO_SIEVE, depth_cap=12)
        assert TWO_SIEVE.contains(certificate.word)
        assert_certificate(certificate, x, E, 0.5)


def test_semigroup_search_finds_hyperbolic_products():
    found = 0
    tried = 0
    while tried < 50:
        A, B = create_elliptic(), create_elliptic()
        if commutator_norm(A, B) <= 0.1:
            continue
        tried += 1
        choices = _semigroup_search(A, B, 20, False, 2**16)
        if choices is None:
            log.warning(f"no hyperbolic product up to length 20 for traces {A.trace:.3f}, {B.trace:.3f}")
            continue
        product = Mat2.identity()
        for choice in choices:
            product = (B if choice else A) @ product
        assert abs(product.trace) > 2.0
        found += 1
    assert found >= 40


def test_certificate_tree():
    x = Word([0.0])
    certificate = gaps.open_gap(x, 0.0, 0.5, FullLine())
    restored = GapCertificate.from_tree(certificate.to_tree())
    assert restored == certificate
    assert restored.verify(0.5)


def test_certificate_verify_detects_bad_values():
    x = Word([0.0])
    assert not GapCertificate(x, 0.0, 0.0, 0.0).verify()
    good = GapCertificate(Word([3.0]), 0.0, -3.0, 3.0)
    assert good.verify()
    assert not good.verify(epsilon=1.0)
    assert not good.verify(epsilon=10.0, original=Word([20.0]))
    assert transfer_word(good.word, 0.0).trace == -3.0
