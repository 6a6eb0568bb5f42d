"""Experiment configuration files.

A configuration is a YAML document with three sections::

    network:
      tiers:                      # required when a file is given
        - {power: 40.0, intensity: 1.0}
        - {power: 1.0, intensity: 10.0}
      alpha: 4.0
      mu: 500.0                   # users per km^2; .inf for full load
      Q: 0.1                      # W
      eps0: 1.0e-8
      eps_star: 1.0e-5
      nu: 1.0
      fading: rayleigh            # rayleigh | none
      pathloss_ref: 1.0           # km
    scheme:
      downlink: mdroa             # mdroa | droa | nba | coupled_mroa
      uplink: mdroa
    run:
      trials: 2000
      seed: 1
      lambda2_grid: [5.0, 10.0, 20.0]
      nu_grid: [0.0, 0.5, 1.0]
      output: null                # CSV path; null writes to stdout
      tolerance: 1.0e-5
      threshold: 0.1              # largest accepted relative bound gap
      horizon: 1000000
      loads: [0.9, 1.1]
      seeds: [0, 1, 2]

Every key except ``network.tiers`` has the default shown, which is the
two-tier reference network. ``lambda2_grid`` replaces the intensity of the
second tier. Overrides ``key=value`` accept a dotted path
(``network.mu=1e6``) or a bare key that is unique across sections
(``mu=1e6``); values are parsed as YAML scalars.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, replace

import yaml

from .association import AssociationScheme, Scheme, TierParams
from .errors import ParameterError, SchemaError
from .marks import constant, exponential
from .network import NetworkConfig

__all__ = ["DEFAULTS", "ExperimentConfig", "load_config", "apply_overrides", "from_dict"]

DEFAULTS = {
    "network": {
        "tiers": [{"power": 40.0, "intensity": 1.0}, {"power": 1.0, "intensity": 10.0}],
        "alpha": 4.0,
        "mu": 500.0,
        "Q": 0.1,
        "eps0": 1e-8,
        "eps_star": 1e-5,
        "nu": 1.0,
        "fading": "rayleigh",
        "pathloss_ref": 1.0,
    },
    "scheme": {"downlink": "mdroa", "uplink": "mdroa"},
    "run": {
        "trials": 2000,
        "seed": 1,
        "lambda2_grid": [5.0, 10.0, 20.0],
        "nu_grid": [0.0, 0.5, 1.0],
        "output": None,
        "tolerance": 1e-5,
        "threshold": 0.1,
        "horizon": 1_000_000,
        "loads": [0.9, 1.1],
        "seeds": [0, 1, 2],
    },
}

_FADING = {"rayleigh": exponential, "none": lambda: constant(1.0)}


@dataclass(frozen=True)
class RunSettings:
    trials: int
    seed: int
    lambda2_grid: tuple
    nu_grid: tuple
    output: str | None
    tolerance: float
    threshold: float
    horizon: int
    loads: tuple
    seeds: tuple


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated configuration: the network plus run settings."""

    network: NetworkConfig
    run: RunSettings
    raw: dict

    def at_lambda2(self, lam2: float) -> NetworkConfig:
        """The network with the second tier's intensity set to ``lam2``."""
        tiers = list(self.network.tiers)
        if len(tiers) < 2:
            raise SchemaError("lambda2_grid needs at least two tiers")
        tiers[1] = replace(tiers[1], intensity=float(lam2))
        return replace(self.network, tiers=tuple(tiers))


def _merge(base: dict, new: dict, path: str) -> dict:
    out = copy.deepcopy(base)
    for k, v in new.items():
        if k not in base:
            raise SchemaError(f"unknown key: {path}{k}")
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise SchemaError(f"{path}{k} must be a section")
            out[k] = _merge(base[k], v, f"{path}{k}.")
        else:
            out[k] = v
    return out


def _number(sec: dict, key: str, path: str) -> float:
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"{path}.{key} must be a number, got {v!r}")
    return float(v)


def _number_list(sec: dict, key: str, path: str) -> tuple:
    v = sec[key]
    if not isinstance(v, (list, tuple)) or not v:
        raise SchemaError(f"{path}.{key} must be a nonempty list")
    for x in v:
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise SchemaError(f"{path}.{key} must hold numbers, got {x!r}")
    return tuple(float(x) for x in v)


def _tiers(raw, fading):
    if not isinstance(raw, list) or not raw:
        raise SchemaError("network.tiers must be a nonempty list")
    out = []
    for i, t in enumerate(raw):
        if not isinstance(t, dict):
            raise SchemaError(f"network.tiers[{i}] must be a mapping")
        for key in ("power", "intensity"):
            if key not in t:
                raise SchemaError(f"missing key: network.tiers[{i}].{key}")
        extra = set(t) - {"power", "intensity"}
        if extra:
            raise SchemaError(f"unknown key: network.tiers[{i}].{sorted(extra)[0]}")
        out.append(TierParams(_number(t, "power", f"network.tiers[{i}]"),
                              _number(t, "intensity", f"network.tiers[{i}]"), fading=fading()))
    return tuple(out)


def from_dict(doc: dict, require_tiers: bool = True) -> ExperimentConfig:
    """Validate a configuration mapping and fill in the defaults."""
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise SchemaError("configuration must be a mapping")
    if require_tiers:
        if "network" not in doc:
            raise SchemaError("missing key: network")
        if not isinstance(doc["network"], dict) or "tiers" not in doc["network"]:
            raise SchemaError("missing key: network.tiers")
    merged = _merge(DEFAULTS, doc, "")
    net, sch, run = merged["network"], merged["scheme"], merged["run"]
    fading = _FADING.get(net["fading"])
    if fading is None:
        raise SchemaError(f"network.fading must be one of {sorted(_FADING)}, got {net['fading']!r}")
    try:
        scheme = AssociationScheme(Scheme(sch["downlink"]), Scheme(sch["uplink"]))
    except ValueError as exc:
        raise SchemaError(f"scheme: {exc}") from None
    try:
        network = NetworkConfig(
            tiers=_tiers(net["tiers"], fading),
            **{k: _number(net, k, "network") for k in ("alpha", "mu", "Q", "eps0", "eps_star", "nu", "pathloss_ref")},
            user_fading=fading(),
            scheme=scheme,
        )
    except ParameterError as exc:
        raise SchemaError(f"network: {exc}") from None
    for key in ("trials", "seed", "horizon"):
        v = run[key]
        if isinstance(v, bool) or not isinstance(v, int) or v < (1 if key != "seed" else 0):
            raise SchemaError(f"run.{key} must be a {'positive' if key != 'seed' else 'nonnegative'} integer")
    seeds = run["seeds"]
    if not isinstance(seeds, list) or not seeds or not all(isinstance(x, int) and x >= 0 for x in seeds):
        raise SchemaError("run.seeds must be a nonempty list of nonnegative integers")
    out = run["output"]
    if out is not None and not isinstance(out, str):
        raise SchemaError("run.output must be a path or null")
    nu_grid = _number_list(run, "nu_grid", "run")
    if any(not 0.0 <= v <= 1.0 for v in nu_grid):
        raise SchemaError("run.nu_grid values must lie in [0, 1]")
    settings = RunSettings(
        trials=run["trials"], seed=run["seed"], lambda2_grid=_number_list(run, "lambda2_grid", "run"),
        nu_grid=nu_grid, output=out, tolerance=_number(run, "tolerance", "run"),
        threshold=_number(run, "threshold", "run"), horizon=run["horizon"],
        loads=_number_list(run, "loads", "run"), seeds=tuple(seeds),
    )
    return ExperimentConfig(network=network, run=settings, raw=merged)


def _leaf_paths(tree: dict, prefix=()):
    for k, v in tree.items():
        if isinstance(v, dict):
            yield from _leaf_paths(v, prefix + (k,))
        else:
            yield prefix + (k,)


def apply_overrides(doc: dict, overrides) -> dict:
    """Return a copy of ``doc`` with ``key=value`` overrides applied."""
    doc = copy.deepcopy(doc) if doc else {}
    leaves = list(_leaf_paths(DEFAULTS))
    for item in overrides or ():
        if "=" not in item:
            raise SchemaError(f"override {item!r} is not key=value")
        key, text = item.split("=", 1)
        key = key.strip()
        value = yaml.safe_load(text)
        if isinstance(value, str):
            # YAML 1.1 reads 1e6 as a string; accept plain float syntax
            try:
                value = float(value)
            except ValueError:
                pass
        path = tuple(key.split("."))
        if len(path) == 1:
            hits = [p for p in leaves if p[-1] == key]
            if len(hits) != 1:
                raise SchemaError(f"unknown or ambiguous override key: {key}")
            path = hits[0]
        elif path not in leaves:
            raise SchemaError(f"unknown override key: {key}")
        node = doc
        for part in path[:-1]:
            node = node.setdefault(part, {})
        node[path[-1]] = value
    return doc


def load_config(path: str | None = None, overrides=()) -> ExperimentConfig:
    """Read ``path`` (or start from the defaults) and apply ``overrides``."""
    if path is None:
        doc, require = {}, False
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                doc = yaml.safe_load(fh)
        except OSError as exc:
            raise SchemaError(f"cannot read config {path}: {exc.strerror}") from None
        except yaml.YAMLError as exc:
            raise SchemaError(f"config {path} is not valid YAML: {exc}") from None
        require = True
    return from_dict(apply_overrides(doc, overrides), require_tiers=require)
