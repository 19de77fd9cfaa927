"""
Run configuration with attribute access and schema-checked assignment
"""

import json
import logging
from collections.abc import MutableMapping
from pathlib import Path

from . import validate

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())


__all__ = ["RunConfig", "DEFAULTS"]


DEFAULTS = {
    "family": "free",
    "word": None,
    "window": None,
    "couplings": [1.0],
    "n_list": [],
    "stages": 0,
    "grid_step": 0.1,
    "eps": 0.5,
    "eps0": 0.5,
    "eta0": 0.25,
    "depth_cap": 20,
    "seed": None,
    "out": ".",
    "workers": None,
    "e_range": [0.1, 10.0],
    "grid": 2048,
    "lambda_max": 10.0,
    "repeat_gap": None,
    "sieve_gap": None,
    "eps_list": [0.1, 0.01, 0.001],
    "input": None,
}


class RunConfig(MutableMapping):
    """
    Parameters of one run, readable and assignable as attributes.

    Every assignment re-validates the whole configuration against the
    ``run_config`` schema; unknown keys are rejected.
    """

    def __init__(self, node=None):
        if node is None:
            node = {}
        elif not isinstance(node, dict):
            raise ValueError("Initializer only accepts dicts")
        self.__dict__["_data"] = node

    @classmethod
    def from_sources(cls, command, path=None, overrides=None):
        """
        Merge defaults, an optional JSON file and explicit overrides (in that order of precedence).

        Raises
        ------
        ValueError
            If the file cannot be read or names unknown keys.
        jsonschema.ValidationError
            If the merged configuration is invalid.
        """
        data = dict(DEFAULTS)
        if path is not None:
            try:
                loaded = json.loads(Path(path).read_text())
            except (OSError, json.JSONDecodeError) as err:
                raise ValueError(f"Cannot read configuration {path}: {err}")
            if not isinstance(loaded, dict):
                raise ValueError(f"Configuration {path} must hold a JSON object")
            unknown = set(loaded) - set(DEFAULTS) - {"command"}
            if unknown:
                raise ValueError(f"Unknown configuration keys: {sorted(unknown)}")
            data.update(loaded)
        data.update({key: value for key, value in (overrides or {}).items() if value is not None})
        data["command"] = command
        validate.value_change("run_config", data, validate.load_schema("run_config"), strict=True)
        log.debug(f"Run configuration: {data}")
        return cls(data)

    def __getattr__(self, key):
        """
        Permit accessing dict keys as attributes, assuming they are legal Python
        variable names.
        """
        if key.startswith("_"):
            raise AttributeError(f"No attribute {key}")
        if key in self._data:
            return self._data[key]
        raise AttributeError(f"No such attribute ({key}) found in configuration")

    def __setattr__(self, key, value):
        """
        Permit assigning dict keys as attributes.
        """
        if key[0] == "_":
            self.__dict__[key] = value
            return
        if key not in self._data:
            raise AttributeError(f"No such attribute ({key}) found in configuration")
        if validate.validate:
            candidate = dict(self._data)
            candidate[key] = value
            if not validate.value_change("run_config", candidate, validate.load_schema("run_config")):
                return
        self._data[key] = value

    def __getitem__(self, key):
        return self._data[key]

    def __setitem__(self, key, value):
        self.__setattr__(key, value)

    def __delitem__(self, key):
        raise TypeError("Configuration keys cannot be removed")

    def __iter__(self):
        return iter(self._data)

    def __len__(self):
        return len(self._data)

    def __repr__(self):
        return f"RunConfig({self._data!r})"

    def to_tree(self):
        return dict(self._data)
