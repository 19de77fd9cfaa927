"""
Command-line front end: ``thin-spectra {bands,thinspec,dimension,continuum}``.

Exit codes: 0 on success, 2 for invalid configuration or input files, 3 for
typed numerical failures (the error class is printed as ``error: <Class>: ...``).
"""

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import jsonschema
import numpy as np
from astropy.table import Table

from . import datamodels, random_utils
from .config import RunConfig
from .continuum import (
    CellPotential,
    ContinuumWord,
    continuum_bands,
    continuum_decay_experiment,
    continuum_gap_cover,
    continuum_repeat_gap,
    continuum_sieve_gap,
    continuum_sieve_trace,
    repeat_trace,
    transfer_concat,
)
from .exceptions import ThinSpectraError
from .intervals import EnergyWindow
from .spectral import BandSet, band_edges
from .thin import box_dimension_estimate, build_gap_cover, decay_experiment, run_stages, verify_stages
from .words import Word, parse_family

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())


__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERIC = 3

DEFAULT_THIN_WINDOW = [[-1.9, 1.9]]


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _window(text):
    """``lo:hi[,lo:hi...]``"""
    try:
        pairs = [[float(v) for v in piece.split(":")] for piece in text.split(",") if piece.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi pairs, got {text!r}")
    if not pairs or any(len(pair) != 2 or pair[1] < pair[0] for pair in pairs):
        raise argparse.ArgumentTypeError(f"expected lo:hi pairs with lo <= hi, got {text!r}")
    return pairs


def _fixed_floats(count):
    def parse(text):
        values = _floats(text)
        if len(values) != count:
            raise argparse.ArgumentTypeError(f"expected {count} comma-separated numbers, got {text!r}")
        return values

    return parse


def build_parser():
    parser = argparse.ArgumentParser(prog="thin-spectra", description="Spectra of periodic and limit-periodic Schrödinger operators")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_common(sub):
        sub.add_argument("--config", help="JSON file of configuration values; flags take precedence")
        sub.add_argument("--out", help="output directory")
        sub.add_argument("--seed", type=int)
        sub.add_argument("--workers", type=int)
        sub.add_argument("--couplings", type=_floats)

    bands = subparsers.add_parser("bands", help="band edges of a periodic word")
    add_common(bands)
    bands.add_argument("--family")
    bands.add_argument("--word", help="JSON word or file, comma list of reals, or random:<letters>")

    thinspec = subparsers.add_parser("thinspec", help="gap cover, thin-word decay and stages")
    add_common(thinspec)
    thinspec.add_argument("--family")
    thinspec.add_argument("--word")
    thinspec.add_argument("--window", type=_window)
    thinspec.add_argument("--n-list", dest="n_list", type=_ints)
    thinspec.add_argument("--stages", type=int)
    thinspec.add_argument("--grid-step", dest="grid_step", type=float)
    thinspec.add_argument("--eps", type=float)
    thinspec.add_argument("--eps0", type=float)
    thinspec.add_argument("--eta0", type=float)
    thinspec.add_argument("--depth-cap", dest="depth_cap", type=int)

    dimension = subparsers.add_parser("dimension", help="box-counting slope of a band set")
    add_common(dimension)
    dimension.add_argument("--input", help="band CSV/JSON or stage JSON")
    dimension.add_argument("--window", type=_window)
    dimension.add_argument("--eps-list", dest="eps_list", type=_floats)

    continuum = subparsers.add_parser("continuum", help="continuum bands and gap searches")
    add_common(continuum)
    continuum.add_argument("--word", help="continuum word JSON or file, or cell:<a>[:v1;v2;...]")
    continuum.add_argument("--e-range", dest="e_range", type=_fixed_floats(2))
    continuum.add_argument("--grid", type=int)
    continuum.add_argument("--lambda-max", dest="lambda_max", type=float)
    continuum.add_argument("--repeat-gap", dest="repeat_gap", type=_fixed_floats(3), help="E,a,n")
    continuum.add_argument("--sieve-gap", dest="sieve_gap", type=_fixed_floats(2), help="E,a")
    continuum.add_argument("--window", type=_window, help="window for the thin-spectrum decay")
    continuum.add_argument("--n-list", dest="n_list", type=_ints)
    continuum.add_argument("--eps", type=float)
    continuum.add_argument("--grid-step", dest="grid_step", type=float)
    continuum.add_argument("--depth-cap", dest="depth_cap", type=int)
    return parser


def _configure_logging(verbose):
    level = os.environ.get("THIN_SPECTRA_LOG_LEVEL", "WARNING").upper()
    if verbose == 1:
        level = "INFO"
    elif verbose > 1:
        level = "DEBUG"
    logging.basicConfig(level=level, stream=sys.stderr, format="%(asctime)s %(name)s %(levelname)s %(message)s")


def _load_json_value(text):
    if text.lstrip().startswith(("{", "[")):
        return datamodels.from_json_tree(json.loads(text))
    return datamodels.open(text)


def _word(text, family):
    """A discrete word from the ``--word`` argument; one zero letter by default."""
    if text is None:
        return family.word([[0.0]])
    if text.startswith("random:"):
        n_letters = int(text.split(":", 1)[1])
        return family.word(random_utils.generate_free_values(family, n_letters))
    if text.lstrip().startswith("{") or text.endswith((".json", ".asdf")):
        word = _load_json_value(text)
        if not isinstance(word, Word):
            raise ValueError(f"--word does not describe a word: {text!r}")
        return word
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise ValueError(f"Cannot parse --word {text!r}")
    return Word.from_values(values, family.block_size)


def _continuum_word(text):
    if text is None:
        return ContinuumWord((CellPotential(math.pi),))
    if text.startswith("cell:"):
        parts = text.split(":")
        samples = tuple(float(v) for v in parts[2].split(";")) if len(parts) > 2 else (0.0,)
        return ContinuumWord((CellPotential(float(parts[1]), samples),))
    word = _load_json_value(text)
    if not isinstance(word, ContinuumWord):
        raise ValueError(f"--word does not describe a continuum word: {text!r}")
    return word


def _write_json(path, tree):
    path.write_text(json.dumps(tree, indent=2) + "\n")


def _interval_table(intervals):
    intervals = np.asarray(intervals, dtype=float).reshape(-1, 2)
    table = Table(
        [np.arange(1, len(intervals) + 1), intervals[:, 0], intervals[:, 1]],
        names=("band_index", "E_minus", "E_plus"),
        dtype=(int, float, float),
    )
    table["E_minus"].info.format = ".17g"
    table["E_plus"].info.format = ".17g"
    return table


def cmd_bands(config, out):
    """
    ``bands.csv`` for the first coupling and ``bands.json`` with every coupling.
    """
    family = parse_family(config.family)
    word = _word(config.word, family)
    summary = {"q": len(word) * word.block_size, "word": word.to_tree(), "couplings": []}
    for index, lam in enumerate(config.couplings):
        bands = band_edges(word, lam)
        if index == 0:
            datamodels.save(bands, out / "bands.csv")
        summary["couplings"].append({"coupling": lam, "measure": bands.measure, "bands": bands.bands.tolist()})
    _write_json(out / "bands.json", summary)


def cmd_thinspec(config, out):
    """
    Gap cover and decay traces; with ``stages`` > 0 also the stage states, re-checked on load.
    """
    family = parse_family(config.family)
    a = _word(config.word, family)
    window = EnergyWindow(config.window or DEFAULT_THIN_WINDOW)
    couplings = config.couplings

    cover = build_gap_cover(a, window, config.eps, couplings, family, config.grid_step, config.depth_cap, workers=config.workers)
    mt = cover.m * cover.common_period
    n_list = config.n_list or [mt, 2 * mt, 4 * mt, 8 * mt]
    traces = decay_experiment(cover, a, window, n_list, couplings, workers=config.workers)
    datamodels.save(traces, out / "thin_traces.csv")
    datamodels.save(traces, out / "thin_traces.json")
    summary = {
        "m": cover.m,
        "t": cover.common_period,
        "c0": traces[0].c0,
        "rate_reference": traces[0].rate_reference,
        "lyapunov_floor": traces[0].lyapunov_floor,
    }

    if config.stages > 0:
        states = run_stages(
            a,
            config.eps0,
            config.stages,
            family,
            couplings,
            config.eta0,
            grid_step=config.grid_step,
            depth_cap=config.depth_cap,
            workers=config.workers,
        )
        path = datamodels.save(states, out / "stages.json")
        violations = verify_stages(datamodels.open(path), couplings)
        for violation in violations:
            log.warning(violation)
        summary["stage_violations"] = violations
    _write_json(out / "thin_summary.json", summary)


def cmd_dimension(config, out):
    """
    Box-counting counts and slope of a band CSV/JSON or of the last stage of a stage file.
    """
    if config.input is None:
        raise ValueError("dimension needs --input")
    value = datamodels.open(config.input)
    window = None
    if isinstance(value, list) and value and hasattr(value[-1], "window"):
        state = value[-1]
        bands = band_edges(state.word, config.couplings[0])
        window = state.window
    elif isinstance(value, BandSet):
        bands = value
    else:
        raise ValueError(f"{config.input} holds neither bands nor stages")
    if config.window:
        window = EnergyWindow(config.window)
    if window is None:
        window = EnergyWindow([bands.bands[0, 0], bands.bands[-1, 1]])

    slope, counts = box_dimension_estimate(bands, window, config.eps_list)
    table = Table([config.eps_list, counts], names=("eps", "count"), dtype=(float, int))
    table["eps"].info.format = ".17g"
    table.write(out / "dimension.csv", format="ascii.csv", overwrite=True)
    _write_json(out / "dimension.json", {"slope": slope, "eps": config.eps_list, "counts": counts})


def cmd_continuum(config, out):
    """
    ``continuum_bands.csv`` over ``e_range`` and ``continuum_gaps.json`` for the requested gap searches.

    With ``window`` set, also the continuum gap cover and decay traces
    (``continuum_traces.csv``, ``continuum_thin.json``).
    """
    word = _continuum_word(config.word)
    lam = config.couplings[0]
    bands = continuum_bands(word, config.e_range, lam, config.grid)
    _interval_table(bands.intervals).write(out / "continuum_bands.csv", format="ascii.csv", overwrite=True)

    gaps = {}
    if config.repeat_gap is not None:
        E, a, n = config.repeat_gap
        found = continuum_repeat_gap(a, int(n), E, config.lambda_max)
        gaps["repeat_gap"] = {"E": E, "a": a, "n": int(n), "lambda": found, "trace": repeat_trace(a, int(n), E, found)}
    if config.sieve_gap is not None:
        E, a = config.sieve_gap
        found = continuum_sieve_gap(word, a, E, config.lambda_max)
        trace = continuum_sieve_trace(transfer_concat(word, E), a, E, found)
        gaps["sieve_gap"] = {"E": E, "a": a, "lambda": found, "trace": trace}
    _write_json(out / "continuum_gaps.json", gaps)

    if config.window:
        window = EnergyWindow(config.window)
        cover = continuum_gap_cover(word, window, config.eps, lam, config.grid_step, config.depth_cap)
        mt = cover.m * cover.copies
        n_list = config.n_list or [mt, 2 * mt, 4 * mt, 8 * mt]
        traces = continuum_decay_experiment(cover, word, window, n_list, lam, config.grid)
        table = Table(
            [[t.N for t in traces], [t.u for t in traces], [t.length for t in traces], [t.measure for t in traces]],
            names=("N", "u", "length", "measure"),
            dtype=(int, int, float, float),
        )
        table["length"].info.format = ".17g"
        table["measure"].info.format = ".17g"
        table.write(out / "continuum_traces.csv", format="ascii.csv", overwrite=True)
        summary = {"m": cover.m, "copies": cover.copies, "gaps": [list(gap) for gap in cover.gaps], "c0": traces[0].c0}
        summary["traces"] = [trace.to_tree() for trace in traces]
        _write_json(out / "continuum_thin.json", summary)


COMMANDS = {
    "bands": cmd_bands,
    "thinspec": cmd_thinspec,
    "dimension": cmd_dimension,
    "continuum": cmd_continuum,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)

    overrides = {key: value for key, value in vars(args).items() if key not in ("command", "config", "verbose")}
    try:
        config = RunConfig.from_sources(args.command, args.config, overrides)
        random_utils.set_seed(config.seed)
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[config.command](config, out)
    except ThinSpectraError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except (jsonschema.ValidationError, ValueError, OSError) as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
