import io
import json
import math

import asdf
import jsonschema
import pytest

from thin_spectra import datamodels, validate
from thin_spectra.continuum import CellPotential, ContinuumWord
from thin_spectra.gaps import GapCertificate
from thin_spectra.intervals import EnergyWindow
from thin_spectra.spectral import BandSet
from thin_spectra.testing import assert_bands_close, assert_word_equal, create_continuum_word, create_word
from thin_spectra.thin import CoverMember, GapCover, StageState, ThinTrace
from thin_spectra.words import SieveFamily, Word


def make_stage_states():
    word = Word([0.0])
    longer = Word([1.5, -1.5])
    return [
        StageState(0, word, 0.5, 0.25, 1, EnergyWindow([[-4.0, 4.0]]), {1.0: 4.0}),
        StageState(1, longer, 0.1, 0.125, 2, EnergyWindow([[-8.0, -0.5], [0.5, 8.0]]), {1.0: 2.5}, 2, 0.05),
    ]


def make_traces():
    return [
        ThinTrace(6, 1, 6, {1.0: 0.5, 2.0: 0.25}, 0.1, 0.2, 0.3),
        ThinTrace(12, 2, 12, {1.0: 0.125, 2.0: 0.0625}, 0.1, 0.2, 0.3),
    ]


@pytest.mark.parametrize("suffix", ["json", "asdf"])
def test_word(tmp_path, suffix):
    word = create_word(3, SieveFamily(n=1, b=(0.0,)))
    path = datamodels.save(word, tmp_path / f"word.{suffix}")
    assert_word_equal(datamodels.open(path), word)


@pytest.mark.parametrize("suffix", ["json", "csv", "asdf"])
def test_band_set(tmp_path, suffix):
    bands = BandSet([[-1.0, 0.25], [1.0 / 3.0, 2.0]])
    restored = datamodels.open(datamodels.save(bands, tmp_path / f"bands.{suffix}"))
    assert_bands_close(restored, bands, atol=0.0)


@pytest.mark.parametrize("suffix", ["json", "asdf"])
def test_stage_states(tmp_path, suffix):
    states = make_stage_states()
    assert datamodels.open(datamodels.save(states, tmp_path / f"stages.{suffix}")) == states


@pytest.mark.parametrize("suffix", ["json", "asdf"])
def test_continuum_word(tmp_path, suffix):
    word = create_continuum_word(2)
    assert datamodels.open(datamodels.save(word, tmp_path / f"cells.{suffix}")) == word


def test_gap_certificate_and_cover(tmp_path):
    certificate = GapCertificate(Word([3.0]), 0.0, -3.0, 3.0)
    assert datamodels.open(datamodels.save(certificate, tmp_path / "certificate.json")) == certificate

    cover = GapCover([CoverMember(Word([1.5, 1.5]), 1.0, (-2.0, -0.5))], 2, 1)
    restored = datamodels.open(datamodels.save(cover, tmp_path / "cover.asdf"))
    assert restored.words == cover.words
    assert restored.members == cover.members


def test_traces(tmp_path):
    traces = make_traces()
    assert datamodels.open(datamodels.save(traces, tmp_path / "traces.json")) == traces

    path = datamodels.save(traces, tmp_path / "traces.csv")
    assert path.read_text().splitlines()[0] == "N,u,lambda,measure"
    restored = datamodels.open(path)
    assert [(trace.N, trace.u, trace.measures) for trace in restored] == [(t.N, t.u, t.measures) for t in traces]
    assert math.isnan(restored[0].lyapunov_floor)


def test_json_envelope(tmp_path):
    path = datamodels.save(Word([1.0, 2.0]), tmp_path / "word.json")
    tree = json.loads(path.read_text())
    assert tree == {"kind": "word", "data": {"block_size": 1, "letters": [[1.0], [2.0]]}}


def test_bare_trees(tmp_path):
    (tmp_path / "word.json").write_text(json.dumps({"block_size": 1, "letters": [[2.0], [0.0]]}))
    assert datamodels.open(tmp_path / "word.json") == Word([2.0, 0.0])

    (tmp_path / "bands.json").write_text(json.dumps({"period": 1, "bands": [[0.0, 1.0]]}))
    assert isinstance(datamodels.open(tmp_path / "bands.json"), BandSet)

    (tmp_path / "cells.json").write_text(json.dumps({"cells": [{"a": 1.0, "samples": [0.0]}]}))
    assert datamodels.open(tmp_path / "cells.json") == ContinuumWord((CellPotential(1.0),))


def test_open_file_object():
    stream = io.StringIO(json.dumps({"kind": "word", "data": {"block_size": 1, "letters": [[1.0]]}}))
    assert datamodels.open(stream) == Word([1.0])


def test_schema_violations(tmp_path):
    bad = {"kind": "word", "data": {"block_size": 0, "letters": [[1.0]]}}
    (tmp_path / "bad.json").write_text(json.dumps(bad))
    with pytest.raises(jsonschema.ValidationError, match="word.block_size"):
        datamodels.open(tmp_path / "bad.json")

    bad_stage = make_stage_states()[0].to_tree()
    bad_stage["eta"] = -1.0
    (tmp_path / "stages.json").write_text(json.dumps({"kind": "stage_states", "data": [bad_stage]}))
    with pytest.raises(jsonschema.ValidationError):
        datamodels.open(tmp_path / "stages.json")


def test_non_strict_validation_warns(tmp_path):
    validate.set_strict_validation(False)
    (tmp_path / "word.json").write_text(json.dumps({"kind": "word", "data": {"block_size": 1, "letters": [[1.0]], "extra": "x"}}))
    # extra properties are allowed; a wrong type is not
    assert datamodels.open(tmp_path / "word.json") == Word([1.0])
    trace = make_traces()[0].to_tree()
    trace["word_length"] = 0
    (tmp_path / "traces.json").write_text(json.dumps({"kind": "thin_traces", "data": [trace]}))
    with pytest.warns(validate.ValidationWarning, match="thin_traces.0.word_length"):
        restored = datamodels.open(tmp_path / "traces.json")
    assert restored[0].word_length == 0


def test_unrecognized_inputs(tmp_path, data_directory):
    with pytest.raises(ValueError):
        datamodels.open(data_directory / "malformed.json")
    with pytest.raises(ValueError):
        datamodels.open(data_directory / "empty_bands.csv")

    (tmp_path / "other.json").write_text(json.dumps({"kind": "planet", "data": {}}))
    with pytest.raises(ValueError, match="Unknown kind"):
        datamodels.open(tmp_path / "other.json")
    (tmp_path / "list.json").write_text("[1, 2]")
    with pytest.raises(ValueError):
        datamodels.open(tmp_path / "list.json")

    (tmp_path / "columns.csv").write_text("a,b\n1,2\n")
    with pytest.raises(ValueError, match="Unrecognized CSV columns"):
        datamodels.open(tmp_path / "columns.csv")

    asdf.AsdfFile({"other": 1}).write_to(tmp_path / "other.asdf")
    with pytest.raises(ValueError, match="thin_spectra"):
        datamodels.open(tmp_path / "other.asdf")


def test_unsupported_saves(tmp_path):
    with pytest.raises(ValueError):
        datamodels.save(Word([1.0]), tmp_path / "word.csv")
    with pytest.raises(ValueError):
        datamodels.save([], tmp_path / "nothing.json")
    with pytest.raises(ValueError):
        datamodels.save({"a": 1}, tmp_path / "dict.json")


def test_kind_of():
    assert datamodels.kind_of(Word([1.0])) == "word"
    assert datamodels.kind_of(make_traces()) == "thin_traces"
    assert datamodels.kind_of(make_stage_states()) == "stage_states"
    assert datamodels.kind_of(EnergyWindow([[0.0, 1.0]])) == "energy_window"
