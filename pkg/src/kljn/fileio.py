"""Config files, atomic output files and run manifests."""

import csv
import dataclasses
import io
import json
import os
import tempfile
from datetime import datetime, timezone

import numpy as np

from ._validation import ConfigurationError
from .core import SystemConfig

#: Units of the config-file keys, for documentation and the ``levels`` table.
CONFIG_UNITS = {
    "r0": "Ohm",
    "r1": "Ohm",
    "t_eff": "K",
    "bandwidth": "Hz",
    "gamma": "1",
    "beta": "1",
    "delta": "1",
    "d_coeff": "1/V",
    "oversampling": "1",
    "boltzmann_k": "J/K",
    "tau_factor": "1",
}


def parse_config_text(text):
    """Parse flat ``key = value`` lines into a dict of floats.

    ``#`` starts a comment; blank lines are ignored; keys are SystemConfig
    field names.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_UNITS:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = float(value)
        except ValueError:
            raise ConfigurationError(f"line {lineno}: {key} needs a number, got {value!r}") from None
    return values


def load_config(path=None, overrides=None):
    """SystemConfig from an optional file, with ``overrides`` taking precedence."""
    values = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            values.update(parse_config_text(fh.read()))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return SystemConfig(**values)


def format_config(config):
    lines = [f"{k} = {getattr(config, k)!r}  # {unit}" for k, unit in CONFIG_UNITS.items()]
    return "\n".join(lines) + "\n"


def write_atomic(path, text):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt(value):
    """Shortest repr that round-trips a double."""
    return repr(float(value))


def csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def trace_csv(trace):
    """CSV text with header ``t_seconds,value``, one row per sample."""
    return csv_text(["t_seconds", "value"], zip(trace.times.tolist(), trace.samples.tolist()))


def read_trace_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1]


def manifest(subcommand, args, config=None, seed=None, outputs=()):
    from . import __version__

    return {
        "subcommand": subcommand,
        "args": args,
        "config": dataclasses.asdict(config) if config is not None else None,
        "seed": seed,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "version": __version__,
        "outputs": list(outputs),
    }


def json_text(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
