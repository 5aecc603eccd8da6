"""Flat ``key = value`` config files and run manifests.

Files are INI-style (read with :mod:`configparser`): one section per
subcommand (``[bench]``, ``[simulate]``, ...) plus optional per-chain
sections ``[chain <name>]`` overriding that chain's parameters or its
estimation domain::

    [bench]
    chains = ar1, arch
    sizes = 50, 100
    replications = 20

    [chain ar1]
    a = 0.5
    domain = -3, 3

A manifest is a config file of the same shape, written next to every
output, so ``<subcommand> --config <manifest>`` repeats the run.
"""

from __future__ import annotations

import configparser
import datetime
import platform
from dataclasses import replace

from . import __version__, kernels
from .chains import PRESETS, ChainSpec, get_chain
from .errors import ConfigurationError

CHAIN_PREFIX = "chain "


def read_config(path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    return parser


def section(cfg: configparser.ConfigParser | None, name: str) -> dict:
    if cfg is None or not cfg.has_section(name):
        return {}
    return dict(cfg.items(name))


def split_list(value: str) -> list:
    return [v.strip() for v in str(value).replace(";", ",").split(",") if v.strip()]


def parse_float(value, key):
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{key}: expected a number, got {value!r}") from None


def parse_int(value, key):
    try:
        f = float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{key}: expected an integer, got {value!r}") from None
    if f != int(f):
        raise ConfigurationError(f"{key}: expected an integer, got {value!r}")
    return int(f)


def chain_from(name: str, overrides: dict | None = None) -> ChainSpec:
    """Preset chain `name` with parameter and ``domain`` overrides applied."""
    spec = get_chain(name)
    overrides = dict(overrides or {})
    domain = overrides.pop("domain", None)
    params = {k: parse_float(v, f"{name}.{k}") for k, v in overrides.items()}
    spec = spec.with_params(**params) if params else spec
    if domain is not None:
        parts = split_list(domain) if isinstance(domain, str) else list(domain)
        if len(parts) != 2:
            raise ConfigurationError(f"{name}.domain: expected 'c, d'")
        spec = replace(spec, domain=(parse_float(parts[0], "c"), parse_float(parts[1], "d")))
    return spec


def chain_overrides(cfg, name: str) -> dict:
    return section(cfg, CHAIN_PREFIX + name)


def write_manifest(path, command: str, settings: dict, outputs: list,
                   chains: list[ChainSpec] = ()) -> None:
    """Write a re-runnable manifest.

    Floats are stored with ``repr`` so that they round-trip exactly.
    """
    cfg = configparser.ConfigParser(interpolation=None)
    cfg.optionxform = str
    cfg["manifest"] = {
        "command": command,
        "version": __version__,
        "backend": kernels.BACKEND,
        "python": platform.python_version(),
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
        "outputs": ", ".join(str(o) for o in outputs),
    }
    cfg[command] = {k: _render(v) for k, v in settings.items() if v is not None}
    for spec in chains:
        entries = {k: repr(float(v)) for k, v in spec.params.items()}
        entries["domain"] = f"{spec.domain[0]!r}, {spec.domain[1]!r}"
        cfg[CHAIN_PREFIX + spec.label] = entries
    with open(path, "w") as fh:
        cfg.write(fh)


def _render(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ", ".join(_render(v) for v in value)
    return str(value)


def known_chains() -> list:
    return list(PRESETS)
