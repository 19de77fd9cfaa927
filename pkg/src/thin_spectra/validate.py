"""
Functions that support validation of trees and configuration changes
"""

import functools
import importlib.resources as importlib_resources
import warnings

import jsonschema
import yaml

from .util import get_envar_as_boolean

__all__ = [
    "ValidationWarning",
    "set_validate",
    "set_strict_validation",
    "load_schema",
    "validate_tree",
    "value_change",
]


validate = True
strict_validation = get_envar_as_boolean("THIN_SPECTRA_STRICT_VALIDATION", True)


class ValidationWarning(Warning):
    pass


def set_validate(value):
    global validate
    validate = bool(value)


def set_strict_validation(value):
    global strict_validation
    strict_validation = bool(value)


@functools.lru_cache
def load_schema(name):
    """
    Load one of the packaged YAML schemas by name, e.g. ``"word"``.
    """
    resource = importlib_resources.files("thin_spectra") / "resources" / "schemas" / f"{name}.yaml"
    try:
        return yaml.safe_load(resource.read_text())
    except FileNotFoundError:
        raise ValueError(f"No schema named {name!r}")


def _validator(schema):
    return jsonschema.Draft7Validator(schema)


def value_change(path, value, schema, pass_invalid_values=False, strict=None):
    """
    Validate a value against a schema.
    Trap error and return a flag.
    """
    if strict is None:
        strict = strict_validation
    error = jsonschema.exceptions.best_match(_validator(schema).iter_errors(value))
    if error is None:
        return True

    errmsg = _error_message(path, error)
    if strict:
        raise jsonschema.ValidationError(errmsg)
    warnings.warn(errmsg, ValidationWarning)
    return pass_invalid_values


def validate_tree(tree, name, path=None, strict=None):
    """
    Validate a JSON tree against the packaged schema ``name``.

    Returns True when the tree is valid, or when validation is turned off.

    Raises
    ------
    jsonschema.ValidationError
        In strict mode, with the offending path prefixed to the message.
    """
    if not validate:
        return True
    return value_change(name if path is None else path, tree, load_schema(name), strict=strict)


def _error_message(path, error):
    """
    Add the path to the attribute as context for a validation error
    """
    if isinstance(path, list):
        spath = [str(p) for p in path]
        name = ".".join(spath)
    else:
        name = str(path)

    location = ".".join(str(p) for p in getattr(error, "absolute_path", ()))
    if location:
        name = f"{name}.{location}"
    error = getattr(error, "message", str(error))
    if len(error) > 2000:
        error = error[0:1996] + " ..."
    errfmt = "While validating {} the following error occurred:\n{}"
    errmsg = errfmt.format(name, error)
    return errmsg
