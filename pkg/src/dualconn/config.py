"""Scenario documents: JSON text that mirrors :class:`Scenario`.

A document looks like::

    {
      "architecture": "ran_split",
      "ran": {"eps_ran_1": 1e-4, "eps_ran_2": 1e-4,
              "correlation": {"type": "event", "value": 0.0}},
      "homogeneous": {"n_nodes": 1, "eps_node": 1e-7, "eps_link": 4e-6, "n_paths": 2},
      "points": {"eps_ue": 1e-10, "eps_upf": 1e-10, "eps_mgnb": 1e-10,
                 "eps_gnb": [1e-10, 1e-10], "eps_sgnb": 1e-10, "eps_xn": 1e-4}
    }

``ran`` may instead carry two link budgets and a shadowing correlation, and
``homogeneous`` may be replaced by an explicit ``cn_paths`` list. The JSON
schema ships as ``scenario.schema.json`` next to this module.
"""
from __future__ import annotations

import copy
import json
import math
from importlib import resources
from pathlib import Path

from .errors import ConfigError, DualConnError
from .gauss import LinkBudget, ShadowingCorrelation, ran_error_from_budget
from .relmodel import (
    Architecture,
    CnPathSpec,
    EventCorrelation,
    PointFailures,
    RanPairSpec,
    Scenario,
)

REFERENCE_DEFAULTS = {
    "architecture": "ran_split",
    "ran": {
        "eps_ran_1": 1e-4,
        "eps_ran_2": 1e-4,
        "correlation": {"type": "event", "value": 0.0},
    },
    "homogeneous": {"n_nodes": 1, "eps_node": 1e-7, "eps_link": 4e-6, "n_paths": 2},
    "points": {
        "eps_ue": 1e-10,
        "eps_upf": 1e-10,
        "eps_mgnb": 1e-10,
        "eps_gnb": [1e-10, 1e-10],
        "eps_sgnb": 1e-10,
        "eps_xn": 1e-4,
    },
}

ZEROS = {
    "architecture": "ran_split",
    "ran": {"eps_ran_1": 0.0, "eps_ran_2": 0.0, "correlation": {"type": "event", "value": 0.0}},
    "homogeneous": {"n_nodes": 1, "eps_node": 0.0, "eps_link": 0.0, "n_paths": 2},
    "points": {
        "eps_ue": 0.0, "eps_upf": 0.0, "eps_mgnb": 0.0,
        "eps_gnb": [0.0, 0.0], "eps_sgnb": 0.0, "eps_xn": 0.0,
    },
}

PRESETS = {"paper-defaults": REFERENCE_DEFAULTS, "zeros": ZEROS}

_BUDGET_FIELDS = ("transmit_power_dbm", "path_loss_db", "threshold_dbm", "shadowing_stddev_db")


def schema() -> dict:
    return json.loads(resources.files(__package__).joinpath("scenario.schema.json").read_text())


def preset(name: str) -> dict:
    try:
        return copy.deepcopy(PRESETS[name])
    except KeyError:
        raise ConfigError("", f"unknown preset {name!r} (choose from {', '.join(PRESETS)})") from None


def load_document(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError("", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"{path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("", "scenario document must be a JSON object")
    return doc


def _get(obj, key, path, kind=None):
    where = f"{path}.{key}" if path else key
    if not isinstance(obj, dict) or key not in obj:
        raise ConfigError(where, "missing")
    value = obj[key]
    if kind == "number":
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(where, f"expected a finite number, got {value!r}")
        return float(value)
    if kind == "object" and not isinstance(value, dict):
        raise ConfigError(where, "expected an object")
    if kind == "list" and not isinstance(value, list):
        raise ConfigError(where, "expected a list")
    return value


def _numbers(values, path):
    out = []
    for i, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ConfigError(f"{path}[{i}]", f"expected a finite number, got {v!r}")
        out.append(float(v))
    return out


def _wrap(path, fn, *args, **kwargs):
    """Re-raise domain errors from constructors with the document path attached."""
    try:
        return fn(*args, **kwargs)
    except ConfigError:
        raise
    except DualConnError as exc:
        raise ConfigError(path, str(exc)) from None


def _parse_ran(ran) -> RanPairSpec:
    if "link_budget_1" in ran or "link_budget_2" in ran:
        eps = []
        for i in (1, 2):
            key = f"link_budget_{i}"
            block = _get(ran, key, "ran", "object")
            values = {f: _get(block, f, f"ran.{key}", "number") for f in _BUDGET_FIELDS}
            budget = _wrap(f"ran.{key}", LinkBudget, **values)
            eps.append(ran_error_from_budget(budget))
        shadow = _get(ran, "shadowing", "ran", "object")
        rho_h = _get(shadow, "rho_h", "ran.shadowing", "number")
        corr = _wrap("ran.shadowing.rho_h", ShadowingCorrelation, rho_h)
        return RanPairSpec(eps[0], eps[1], corr)

    e1 = _get(ran, "eps_ran_1", "ran", "number")
    e2 = _get(ran, "eps_ran_2", "ran", "number")
    corr = _get(ran, "correlation", "ran", "object")
    kind = _get(corr, "type", "ran.correlation")
    value = _get(corr, "value", "ran.correlation", "number")
    if kind == "event":
        correlation = _wrap("ran.correlation.value", EventCorrelation, value)
    elif kind == "shadowing":
        correlation = _wrap("ran.correlation.value", ShadowingCorrelation, value)
    else:
        raise ConfigError("ran.correlation.type", f"expected 'event' or 'shadowing', got {kind!r}")
    return _wrap("ran", RanPairSpec, e1, e2, correlation)


def _parse_paths(doc) -> tuple[CnPathSpec, ...]:
    if "cn_paths" in doc:
        paths = _get(doc, "cn_paths", "", "list")
        out = []
        for i, block in enumerate(paths):
            where = f"cn_paths[{i}]"
            nodes = _numbers(_get(block, "node_errors", where, "list"), f"{where}.node_errors")
            links = _numbers(_get(block, "link_errors", where, "list"), f"{where}.link_errors")
            out.append(_wrap(where, CnPathSpec, tuple(nodes), tuple(links)))
        return tuple(out)
    block = _get(doc, "homogeneous", "", "object")
    n_nodes = _get(block, "n_nodes", "homogeneous", "number")
    n_paths = _get(block, "n_paths", "homogeneous", "number") if "n_paths" in block else 2.0
    if n_nodes != int(n_nodes) or n_nodes < 0:
        raise ConfigError("homogeneous.n_nodes", "expected a non-negative integer")
    if n_paths != int(n_paths) or n_paths < 1:
        raise ConfigError("homogeneous.n_paths", "expected a positive integer")
    eps_node = _get(block, "eps_node", "homogeneous", "number")
    eps_link = _get(block, "eps_link", "homogeneous", "number")
    path = _wrap("homogeneous", CnPathSpec.homogeneous, int(n_nodes), eps_node, eps_link)
    return (path,) * int(n_paths)


def _parse_points(points, n_paths) -> PointFailures:
    values = {
        name: _get(points, name, "points", "number")
        for name in ("eps_ue", "eps_upf", "eps_mgnb", "eps_sgnb", "eps_xn")
    }
    gnb = points.get("eps_gnb", 0.0)
    if isinstance(gnb, list):
        gnb = _numbers(gnb, "points.eps_gnb")
    else:
        gnb = [_get(points, "eps_gnb", "points", "number")] * n_paths
    return _wrap("points", PointFailures, eps_gnb_per_path=tuple(gnb), **values)


def parse_scenario(doc: dict) -> Scenario:
    """Build a :class:`Scenario`; errors carry the offending field path."""
    arch = _get(doc, "architecture", "")
    try:
        architecture = Architecture(arch)
    except ValueError:
        raise ConfigError("architecture", f"expected 'ran_split' or 'cn_split', got {arch!r}") from None
    ran = _parse_ran(_get(doc, "ran", "", "object"))
    paths = _parse_paths(doc)
    points = _parse_points(_get(doc, "points", "", "object"), len(paths))
    return _wrap("", Scenario, architecture, ran, paths, points)


def _set_path(doc, dotted, value):
    keys = dotted.split(".")
    node = doc
    for key in keys[:-1]:
        if not isinstance(node.get(key), dict):
            node[key] = {}
        node = node[key]
    node[keys[-1]] = value


def apply_overrides(
    doc: dict,
    *,
    architecture=None,
    eps_ran=None,
    rho=None,
    rho_h=None,
    n_nodes=None,
    eps_node=None,
    eps_link=None,
    assignments=(),
) -> dict:
    """Copy of ``doc`` with command-line overrides applied.

    ``assignments`` are ``dotted.path=json_value`` strings and are applied last.
    """
    doc = copy.deepcopy(doc)
    if architecture is not None:
        doc["architecture"] = architecture
    ran = doc.setdefault("ran", {})
    if eps_ran is not None:
        if "link_budget_1" in ran:
            rho_h_old = ran.get("shadowing", {}).get("rho_h", 0.0)
            ran.clear()
            ran["correlation"] = {"type": "shadowing", "value": rho_h_old}
        ran["eps_ran_1"] = ran["eps_ran_2"] = eps_ran
    if rho is not None and rho_h is not None:
        raise ConfigError("ran.correlation", "give either rho or rho_h, not both")
    for kind, value in (("event", rho), ("shadowing", rho_h)):
        if value is None:
            continue
        if "link_budget_1" in ran and kind == "shadowing":
            ran["shadowing"] = {"rho_h": value}
        elif "link_budget_1" in ran:
            raise ConfigError("ran", "an event correlation cannot be combined with link budgets")
        else:
            ran["correlation"] = {"type": kind, "value": value}
    if any(v is not None for v in (n_nodes, eps_node, eps_link)):
        if "homogeneous" not in doc:
            raise ConfigError("homogeneous", "node/link overrides need a homogeneous core network")
        block = doc["homogeneous"]
        for key, value in (("n_nodes", n_nodes), ("eps_node", eps_node), ("eps_link", eps_link)):
            if value is not None:
                block[key] = value
    for item in assignments:
        if "=" not in item:
            raise ConfigError(item, "override must look like path=value")
        dotted, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        _set_path(doc, dotted.strip(), value)
    return doc
