from ._version import version as __version__
from .datamodels import open, save
from .exceptions import ThinSpectraError
from .spectral import BandSet, band_edges
from .words import Word

__all__ = ["open", "save", "Word", "BandSet", "band_edges", "ThinSpectraError", "__version__"]
