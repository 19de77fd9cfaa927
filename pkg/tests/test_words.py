import numpy as np
import pytest

from thin_spectra import words
from thin_spectra.exceptions import BlockMismatch, LcmOverflow, UnsupportedFamily
from thin_spectra.testing import assert_word_equal, create_word
from thin_spectra.words import FullLine, PolymerFamily, SieveFamily, Word


def test_word_construction():
    word = Word([[1.0, 2.0], [3.0, 4.0]])
    assert len(word) == 2
    assert word.block_size == 2
    assert word.letter(1).values == (3.0, 4.0)
    assert word.letters[0].block_size == 2

    with pytest.raises(ValueError):
        Word([])
    with pytest.raises(ValueError):
        Word([np.nan])
    with pytest.raises(BlockMismatch):
        Word.from_values([1.0, 2.0, 3.0], 2)


def test_word_is_immutable():
    word = Word([1.0, 2.0])
    with pytest.raises(ValueError):
        word.values[0, 0] = 5.0


def test_word_equality_and_hash():
    assert Word([1.0, 2.0]) == Word([[1.0], [2.0]])
    assert Word([1.0, 2.0]) != Word([[1.0, 2.0]])
    assert len({Word([1.0]), Word([1.0]), Word([2.0])}) == 2


def test_concat_and_sharp_power():
    x, y = Word([1.0]), Word([2.0, 3.0])
    assert_word_equal(words.concat(x, y), Word([1.0, 2.0, 3.0]))
    assert_word_equal(words.sharp_power(y, 3), Word([2.0, 3.0] * 3))
    with pytest.raises(ValueError):
        words.sharp_power(y, 0)
    with pytest.raises(BlockMismatch):
        words.concat(Word([1.0]), Word([[1.0, 2.0]]))


def test_aggregate():
    assert words.aggregate(Word([[1.0, 2.0], [3.0, 4.0]])).tolist() == [1.0, 2.0, 3.0, 4.0]
    assert words.aggregate([5, 6]).tolist() == [5.0, 6.0]


def test_sieve_and_repeat():
    assert words.aggregate(words.sieve([1.0, 2.0], 3)).tolist() == [1.0, 0.0, 0.0, 2.0, 0.0, 0.0]
    assert words.aggregate(words.repeat_blocks([1.0, 2.0], 2)).tolist() == [1.0, 1.0, 2.0, 2.0]
    assert words.insert_between([1.0], [7.0, 8.0]).to_tree() == {"block_size": 3, "letters": [[1.0, 7.0, 8.0]]}
    with pytest.raises(ValueError):
        words.sieve([1.0], 0)


def test_cyclic_shift():
    assert words.cyclic_shift([1, 2, 3], 1).tolist() == [2.0, 3.0, 1.0]
    assert words.cyclic_shift([1, 2, 3], 4).tolist() == [2.0, 3.0, 1.0]
    assert words.cyclic_shift([], 2).tolist() == []

    values = np.arange(7.0)
    shifted = values
    for _ in range(len(values)):
        shifted = words.cyclic_shift(shifted, 1)
    assert shifted.tolist() == values.tolist()


def test_word_distance():
    x = Word([0.0, 1.0])
    y = Word([0.5])
    # periodic extensions 0 1 0 1 and 0.5 0.5 0.5 0.5
    assert words.word_distance(x, y) == 0.5
    assert words.word_distance(x, x) == 0.0
    with pytest.raises(LcmOverflow):
        words.word_distance(Word(np.zeros(7)), Word(np.zeros(11)), cap=50)


def test_word_distance_is_a_metric():
    for _ in range(100):
        x, y, z = (create_word(5) for _ in range(3))
        assert words.word_distance(x, y) == words.word_distance(y, x)
        assert words.word_distance(x, z) <= words.word_distance(x, y) + words.word_distance(y, z) + 1e-15


def test_sieve_family():
    family = SieveFamily(n=2, b=(0.5,))
    assert family.block_size == 3
    assert family.make_letter([1.0, 2.0]).tolist() == [1.0, 2.0, 0.5]
    assert family.make_letter([1.0]).tolist() == [1.0, 0.0, 0.5]
    assert family.exceptional_word().tolist() == [0.0, 0.5]

    word = family.word([[1.0, 2.0], [3.0, 4.0]])
    assert family.contains(word)
    assert not family.contains(Word([[1.0, 2.0, 0.0]]))
    assert family.free_values(word.values[1]).tolist() == [3.0, 4.0]

    moved = family.perturb(word, 1, 0, 0.25)
    assert moved.values[1].tolist() == [3.25, 4.0, 0.5]
    assert family.shift_all(word, 1.0).values[0].tolist() == [2.0, 3.0, 0.5]


def test_polymer_and_full_line():
    polymer = PolymerFamily(n=3)
    word = polymer.word([[2.0]])
    assert word.values.tolist() == [[2.0, 2.0, 2.0]]
    assert polymer.shift_all(word, 1.0).values.tolist() == [[3.0, 3.0, 3.0]]
    assert polymer.contains(word)

    line = FullLine()
    assert line.word([[1.0], [2.0]]) == Word([1.0, 2.0])
    assert line.with_coupling(2.0).coupling == 2.0


def test_family_validation():
    with pytest.raises(ValueError):
        FullLine(coupling=0.0)
    with pytest.raises(ValueError):
        SieveFamily(n=0)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("free", FullLine()),
        ("polymer:n=2", PolymerFamily(n=2)),
        ("sieve:n=1,b=0", SieveFamily(n=1, b=(0.0,))),
        ("sieve:n=2,b=0;0.5", SieveFamily(n=2, b=(0.0, 0.5))),
        ("sieve", SieveFamily()),
    ],
)
def test_parse_family(text, expected):
    family = words.parse_family(text)
    assert family == expected
    assert words.family_from_tree(family.to_tree()) == expected


@pytest.mark.parametrize("text", ["lattice", "polymer:n=x", "sieve:n=1,b=a"])
def test_parse_family_rejects(text):
    with pytest.raises(UnsupportedFamily):
        words.parse_family(text)


def test_word_tree():
    word = create_word(3, SieveFamily(n=1, b=(0.0,)))
    assert_word_equal(Word.from_tree(word.to_tree()), word)
    with pytest.raises(BlockMismatch):
        Word.from_tree({"block_size": 2, "letters": [[1.0]]})
