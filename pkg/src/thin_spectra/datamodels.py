"""
Reading and writing domain values as JSON, CSV or ASDF.

JSON files carry a ``{"kind": ..., "data": ...}`` envelope so that `open` can
dispatch on the kind and validate the payload against its schema. Bare word,
band-set and continuum-word trees are recognized too.
"""

import json
import logging
from pathlib import Path

import asdf
import numpy as np
from astropy.table import Table

from . import filetype, validate
from .continuum import ContinuumWord
from .gaps import GapCertificate
from .intervals import EnergyWindow
from .spectral import BandSet
from .thin import GapCover, StageState, ThinTrace
from .words import Word

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())


__all__ = [
    "open",
    "save",
    "kind_of",
    "from_json_tree",
    "traces_to_table",
    "traces_from_table",
    "model_registry",
]

ASDF_KEY = "thin_spectra"


# kind -> (type, schema name, holds a list)
model_registry = {
    "word": (Word, "word", False),
    "band_set": (BandSet, "band_set", False),
    "energy_window": (EnergyWindow, None, False),
    "gap_certificate": (GapCertificate, "gap_certificate", False),
    "gap_cover": (GapCover, None, False),
    "thin_traces": (ThinTrace, "thin_trace", True),
    "stage_states": (StageState, "stage_state", True),
    "continuum_word": (ContinuumWord, "continuum_word", False),
}


def kind_of(obj):
    """The registry kind of a domain value or of a nonempty list of them."""
    if isinstance(obj, (list, tuple)) and not isinstance(obj, (ThinTrace, StageState, GapCertificate)):
        if not obj:
            raise ValueError("Cannot determine the kind of an empty list")
        for kind, (cls, _, many) in model_registry.items():
            if many and isinstance(obj[0], cls):
                return kind
    else:
        for kind, (cls, _, many) in model_registry.items():
            if not many and isinstance(obj, cls):
                return kind
    raise ValueError(f"No registered kind for {type(obj).__name__}")


def _strip_kind(tree):
    tree = dict(tree)
    tree.pop("kind", None)
    return tree


def to_json_tree(obj):
    kind = kind_of(obj)
    if model_registry[kind][2]:
        data = [item.to_tree() for item in obj]
    else:
        data = _strip_kind(obj.to_tree())
    return {"kind": kind, "data": data}


def from_json_tree(tree):
    """
    Build the domain value described by a JSON tree, validating it first.

    Raises
    ------
    ValueError
        If the tree matches no registered kind.
    jsonschema.ValidationError
    """
    if isinstance(tree, dict) and "kind" in tree and "data" in tree:
        kind, data = tree["kind"], tree["data"]
    elif isinstance(tree, dict) and {"block_size", "letters"} <= set(tree):
        kind, data = "word", tree
    elif isinstance(tree, dict) and "cells" in tree:
        kind, data = "continuum_word", tree
    elif isinstance(tree, dict) and "bands" in tree:
        kind, data = "band_set", tree
    else:
        raise ValueError("JSON tree does not describe a known value")
    if kind not in model_registry:
        raise ValueError(f"Unknown kind {kind!r}")

    cls, schema, many = model_registry[kind]
    if many:
        if not isinstance(data, list):
            raise ValueError(f"{kind} data must be a list")
        for index, item in enumerate(data):
            if schema is not None:
                validate.validate_tree(item, schema, path=[kind, index])
        return [cls.from_tree(item) for item in data]
    if schema is not None:
        validate.validate_tree(data, schema, path=kind)
    return cls.from_tree(data)


def traces_to_table(traces):
    """Rows ``N, u, lambda, measure`` for every trace and coupling."""
    rows = [row for trace in traces for row in trace.rows()]
    table = Table(rows=rows or None, names=("N", "u", "lambda", "measure"), dtype=(int, int, float, float))
    table["lambda"].info.format = ".17g"
    table["measure"].info.format = ".17g"
    return table


def traces_from_table(table):
    traces = {}
    for row in table:
        N = int(row["N"])
        measures = traces.setdefault(N, (int(row["u"]), {}))[1]
        measures[float(row["lambda"])] = float(row["measure"])
    return [ThinTrace(N, u, 0, measures, np.nan) for N, (u, measures) in sorted(traces.items())]


def _write_csv(obj, path):
    if isinstance(obj, BandSet):
        table = obj.to_table()
    elif isinstance(obj, list) and obj and isinstance(obj[0], ThinTrace):
        table = traces_to_table(obj)
    else:
        raise ValueError(f"{type(obj).__name__} cannot be written as CSV")
    table.write(path, format="ascii.csv", overwrite=True)


def _read_csv(init):
    table = Table.read(init, format="ascii.csv")
    if len(table) == 0:
        raise ValueError("CSV input has no rows")
    if {"band_index", "E_minus", "E_plus"} <= set(table.colnames):
        return BandSet.from_table(table)
    if {"N", "u", "lambda", "measure"} <= set(table.colnames):
        return traces_from_table(table)
    raise ValueError(f"Unrecognized CSV columns: {table.colnames}")


def save(obj, path):
    """
    Write ``obj`` in the format named by the extension of ``path``.
    """
    path = Path(path)
    file_type = filetype.check(path)
    if file_type == "json":
        path.write_text(json.dumps(to_json_tree(obj), indent=2) + "\n")
    elif file_type == "csv":
        _write_csv(obj, path)
    else:
        asdf.AsdfFile({ASDF_KEY: obj}).write_to(path)
    log.debug(f"Saved {kind_of(obj)} to {path}")
    return path


def open(init):
    """
    Data model factory function

    Parameters
    ----------
    init : str, `pathlib.Path` or file-like
        JSON, CSV or ASDF input.

    Returns
    -------
    The domain value (or list of values) stored in the file.
    """
    file_type = filetype.check(init)
    if file_type == "asdf":
        with asdf.open(init) as af:
            if ASDF_KEY not in af.tree:
                raise ValueError(f'ASDF file does not have expected "{ASDF_KEY}" attribute')
            return af.tree[ASDF_KEY]
    if file_type == "csv":
        return _read_csv(init)

    text = init.read() if hasattr(init, "read") else Path(init).read_text()
    try:
        tree = json.loads(text)
    except json.JSONDecodeError as err:
        raise ValueError(f"Malformed JSON input: {err}")
    return from_json_tree(tree)
