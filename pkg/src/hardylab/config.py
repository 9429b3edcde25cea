"""INI run configuration for the command-line tool.

A config file has named sections with ``key = value`` entries.  Every
section and key is validated against :data:`SCHEMA`; anything unknown is
an error, as is a ``[meta] version`` different from
:data:`SCHEMA_VERSION`.  Lists are comma separated.
"""

from __future__ import annotations

import configparser
import re
from pathlib import Path

from .errors import ConfigError

__all__ = ["SCHEMA_VERSION", "SCHEMA", "RunConfig", "load_config", "parse_config"]

SCHEMA_VERSION = "1"


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _pair(text):
    v = _floats(text)
    if len(v) != 2:
        raise ValueError("expected two comma-separated numbers")
    return tuple(v)


def _choice(*options):
    def parse(text):
        t = text.strip()
        if t not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return t

    return parse


def _number_or_name(text):
    t = text.strip()
    try:
        return float(t)
    except ValueError:
        if t == "manufactured":
            return t
        raise ValueError("expected a number or 'manufactured'") from None


SCHEMA = {
    "meta": {"version": str},
    "problem": {"N": int, "p": float, "mu": float, "Q": float},
    "shooting": {
        "r_min": float,
        "r_max": float,
        "amplitude": float,
        "rk_tol": float,
        "max_steps": int,
        "points_per_decade": int,
        "method": _choice("RK45", "DOP853"),
        "init_correction": float,
        "on_sign_change": _choice("raise", "truncate"),
        "max_restarts": int,
    },
    "profile": {
        "source": _choice("shooting", "closed_form", "synthetic", "csv"),
        "path": str,
        "lam": float,
        "rate": float,
        "r_min": float,
        "r_max": float,
        "points_per_decade": int,
    },
    "check": {
        "budget": float,
        "slope_tol": float,
        "origin_window": _pair,
        "infinity_window": _pair,
        "window": _pair,
        "x_sweep": _floats,
        "branch": _choice("origin", "infinity"),
        "lambdas": _floats,
        "tol": float,
        "stability": float,
    },
    "bvp": {
        "epsilon": float,
        "annulus": _pair,
        "boundary_values": _pair,
        "source": _number_or_name,
        "power": float,
        "grid_size": int,
        "eps_list": _floats,
        "newton_tol": float,
        "max_iter": int,
    },
    "moser": {"depth": int, "sigma": float, "r": float},
    "output": {"dir": str, "prefix": str},
}


class RunConfig(dict):
    """Parsed config: section name -> {key: typed value}.  ``path`` and
    ``lines`` (key -> line number) support diagnostics."""

    def __init__(self, data, path=None, lines=None):
        super().__init__(data)
        self.path = path
        self.lines = lines or {}

    def section(self, name):
        return self.get(name, {})

    def has(self, name):
        return name in self

    def require(self, section, key):
        try:
            return self[section][key]
        except KeyError:
            raise ConfigError(f"missing required entry [{section}] {key}") from None


def _line_index(text):
    lines, section = {}, None
    for no, raw in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[([^\]]+)\]", raw)
        if m:
            section = m.group(1).strip()
            lines[(section, None)] = no
            continue
        m = re.match(r"\s*([^=:#;\s][^=:]*?)\s*[=:]", raw)
        if m and section is not None:
            lines[(section, m.group(1).strip())] = no
    return lines


def parse_config(text, path=None):
    """Parse and validate config text; raises :class:`ConfigError`."""
    where = f"{path}: " if path else ""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keys are case sensitive (N vs n)
    try:
        cp.read_string(text, source=str(path or "<config>"))
    except configparser.Error as exc:
        raise ConfigError(f"{where}{exc}".replace("\n", " ")) from None
    lines = _line_index(text)
    data = {}
    for sec in cp.sections():
        if sec not in SCHEMA:
            ln = lines.get((sec, None), "?")
            raise ConfigError(f"{where}line {ln}: unknown section [{sec}]")
        data[sec] = {}
        for key, raw in cp.items(sec):
            ln = lines.get((sec, key), "?")
            if key not in SCHEMA[sec]:
                raise ConfigError(f"{where}line {ln}: unknown key '{key}' in [{sec}]")
            try:
                data[sec][key] = SCHEMA[sec][key](raw)
            except ValueError as exc:
                raise ConfigError(f"{where}line {ln}: [{sec}] {key} = {raw!r}: {exc}") from None
    version = data.get("meta", {}).get("version")
    if version is None:
        raise ConfigError(f"{where}missing [meta] version (expected {SCHEMA_VERSION})")
    if version.strip() != SCHEMA_VERSION:
        raise ConfigError(f"{where}config version {version!r} does not match schema version {SCHEMA_VERSION}")
    return RunConfig(data, path, lines)


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, path)
