from asdf.extension import Extension

from .converters import DOMAIN_CONVERTERS

__all__ = ["ThinSpectraExtension", "DOMAIN_EXTENSIONS"]


class ThinSpectraExtension(Extension):
    extension_uri = "asdf://thin-spectra.org/extensions/thin_spectra-1.0.0"
    legacy_class_names = []
    converters = DOMAIN_CONVERTERS
    tags = [tag for converter in DOMAIN_CONVERTERS for tag in converter.tags]


DOMAIN_EXTENSIONS = [ThinSpectraExtension()]
