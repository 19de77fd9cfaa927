"""
ASDF converters for the domain values.

Each value serializes through its own ``to_tree``/``from_tree`` pair, so the
ASDF and JSON representations share one layout.
"""

from asdf.extension import Converter

from .continuum import CellPotential, ContinuumWord
from .gaps import GapCertificate
from .intervals import EnergyWindow
from .spectral import BandSet
from .thin import GapCover, StageState, ThinTrace
from .words import Word

__all__ = [
    "TAG_PREFIX",
    "tag_uri",
    "TreeConverter",
    "WordConverter",
    "BandSetConverter",
    "EnergyWindowConverter",
    "GapCertificateConverter",
    "GapCoverConverter",
    "StageStateConverter",
    "ThinTraceConverter",
    "CellPotentialConverter",
    "ContinuumWordConverter",
    "DOMAIN_CONVERTERS",
]

TAG_PREFIX = "asdf://thin-spectra.org/tags/"


def tag_uri(name, version="1.0.0"):
    """
    Examples
    --------
    >>> tag_uri("word")
    'asdf://thin-spectra.org/tags/word-1.0.0'
    """
    return f"{TAG_PREFIX}{name}-{version}"


class TreeConverter(Converter):
    """
    Converter for a class exposing ``to_tree`` and a ``from_tree`` classmethod.
    """

    _name = None
    _type = None

    @property
    def tags(self):
        return [tag_uri(self._name)]

    @property
    def types(self):
        return [self._type]

    def select_tag(self, obj, tags, ctx):
        return tags[0]

    def to_yaml_tree(self, obj, tag, ctx):
        tree = dict(obj.to_tree())
        tree.pop("kind", None)
        return tree

    def from_yaml_tree(self, node, tag, ctx):
        return self._type.from_tree(dict(node))


class WordConverter(TreeConverter):
    _name = "word"
    _type = Word


class BandSetConverter(TreeConverter):
    _name = "band_set"
    _type = BandSet


class EnergyWindowConverter(TreeConverter):
    _name = "energy_window"
    _type = EnergyWindow


class GapCertificateConverter(TreeConverter):
    _name = "gap_certificate"
    _type = GapCertificate


class GapCoverConverter(TreeConverter):
    _name = "gap_cover"
    _type = GapCover


class StageStateConverter(TreeConverter):
    """
    Stage states keep their word and window as tagged children.
    """

    _name = "stage_state"
    _type = StageState

    def to_yaml_tree(self, obj, tag, ctx):
        tree = obj.to_tree()
        tree["word"] = obj.word
        tree["window"] = obj.window
        return tree

    def from_yaml_tree(self, node, tag, ctx):
        return StageState(
            int(node["stage"]),
            node["word"],
            float(node["epsilon"]),
            float(node["eta"]),
            int(node["period"]),
            node["window"],
            {float(item["coupling"]): float(item["measure"]) for item in node["measures"]},
            int(node.get("multiplier", 1)),
            float(node.get("distance", 0.0)),
        )


class ThinTraceConverter(TreeConverter):
    _name = "thin_trace"
    _type = ThinTrace


class CellPotentialConverter(TreeConverter):
    _name = "cell_potential"
    _type = CellPotential


class ContinuumWordConverter(TreeConverter):
    _name = "continuum_word"
    _type = ContinuumWord

    def to_yaml_tree(self, obj, tag, ctx):
        return {"cells": list(obj.cells)}

    def from_yaml_tree(self, node, tag, ctx):
        return ContinuumWord(tuple(node["cells"]))


DOMAIN_CONVERTERS = [
    WordConverter(),
    BandSetConverter(),
    EnergyWindowConverter(),
    GapCertificateConverter(),
    GapCoverConverter(),
    StageStateConverter(),
    ThinTraceConverter(),
    CellPotentialConverter(),
    ContinuumWordConverter(),
]
