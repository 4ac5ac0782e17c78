"""Parameter sweeps over scenarios: correlation-mapping tables, error-rate
grids, optimal-architecture region maps and the largest core-network depth
meeting an error-rate target.

Sweeps keep every core-network path homogeneous (one node error rate, one
link error rate, same hop count on every path). Cells whose correlation is
infeasible for their marginals are kept and marked ``infeasible``.
"""
from __future__ import annotations

import enum
import itertools
import math
import warnings
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, FeasibilityError
from .gauss import ShadowingCorrelation, event_correlation
from .relmodel import (
    Architecture,
    CnPathSpec,
    EventCorrelation,
    RanPairSpec,
    Scenario,
    evaluate,
)

DEFAULT_EPS_NODE = 1e-7
DEFAULT_EPS_LINK = 4e-6


class Parameter(str, enum.Enum):
    RHO = "rho"
    RHO_H = "rho_h"
    EPS_RAN = "eps_ran"
    N_INTERMEDIATE_NODES = "n_intermediate_nodes"
    EPS_LINK = "eps_link"
    EPS_NODE = "eps_node"
    EPS_SX = "eps_sx"


_ALIASES = {"n": "n_intermediate_nodes", "n_nodes": "n_intermediate_nodes", "nodes": "n_intermediate_nodes"}


def parse_parameter(name: str) -> Parameter:
    key = name.strip().lower().replace("-", "_")
    key = _ALIASES.get(key, key)
    try:
        return Parameter(key)
    except ValueError:
        choices = ", ".join(p.value for p in Parameter)
        raise DomainError(f"unknown sweep parameter {name!r} (choose from {choices})") from None


@dataclass(frozen=True)
class SweepAxis:
    parameter: Parameter
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "parameter", Parameter(self.parameter))
        values = tuple(float(v) for v in self.values)
        if not values:
            raise DomainError(f"axis {self.parameter.value} has no values")
        if not all(math.isfinite(v) for v in values):
            raise DomainError(f"axis {self.parameter.value} has non-finite values")
        diffs = np.diff(values)
        if len(values) > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise DomainError(f"axis {self.parameter.value} values must be strictly monotone")
        if self.parameter is Parameter.N_INTERMEDIATE_NODES and any(
            v < 0 or v != int(v) for v in values
        ):
            raise DomainError("n_intermediate_nodes values must be non-negative integers")
        object.__setattr__(self, "values", values)

    @classmethod
    def parse(cls, text: str) -> "SweepAxis":
        """Parse ``name=v1,v2,...``, ``name=log:start:stop:count`` or
        ``name=lin:start:stop:count`` (``range:start:stop`` for integers)."""
        if "=" not in text:
            raise DomainError(f"axis {text!r} must look like name=values")
        name, spec = text.split("=", 1)
        parameter = parse_parameter(name)
        spec = spec.strip()
        try:
            if spec.startswith(("log:", "lin:", "range:")):
                kind, *args = spec.split(":")
                if kind == "range":
                    start, stop = int(args[0]), int(args[1])
                    values = range(start, stop + 1)
                else:
                    start, stop, count = float(args[0]), float(args[1]), int(args[2])
                    if kind == "log":
                        if start <= 0 or stop <= 0:
                            raise DomainError("log axis bounds must be positive")
                        values = np.logspace(math.log10(start), math.log10(stop), count)
                    else:
                        values = np.linspace(start, stop, count)
                    if parameter is Parameter.N_INTERMEDIATE_NODES:
                        values = np.unique(np.round(values))
            else:
                values = [float(v) for v in spec.split(",") if v.strip()]
        except (ValueError, IndexError):
            raise DomainError(f"malformed axis values {spec!r}") from None
        return cls(parameter, tuple(values))


@dataclass(frozen=True)
class SweepRow:
    coords: tuple[tuple[str, float], ...]
    arch: Architecture
    error_rate: float
    reliability: float
    status: str


@dataclass(frozen=True)
class SweepGrid:
    axes: tuple[SweepAxis, ...]
    rows: tuple[SweepRow, ...]

    def error_rates(self, arch) -> np.ndarray:
        """Error rates for one architecture shaped by the axis lengths (NaN = infeasible)."""
        arch = Architecture(arch)
        values = [r.error_rate for r in self.rows if r.arch is arch]
        return np.array(values, dtype=float).reshape([len(a.values) for a in self.axes])


class RegionWinner(str, enum.Enum):
    RAN_SPLIT = "ran_split"
    CN_SPLIT = "cn_split"
    TIE = "tie"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class RegionCell:
    axis1_value: float
    axis2_value: float
    winner: RegionWinner
    error_rate_ran_split: float
    error_rate_cn_split: float


class CrossoverWarning(UserWarning):
    """The optimal architecture changes more than once along the node axis."""


def homogeneous_profile(scenario: Scenario) -> tuple[int, float, float]:
    """``(n_nodes, eps_node, eps_link)`` of a scenario with identical homogeneous paths.

    A path with no intermediate nodes carries no node error rate; the package
    default is reported in that case.
    """
    first = scenario.cn_paths[0]
    for path in scenario.cn_paths:
        if path != first or len(set(path.node_errors)) > 1 or len(set(path.link_errors)) > 1:
            raise DomainError("sweeps need identical homogeneous core-network paths")
    eps_node = first.node_errors[0] if first.node_errors else DEFAULT_EPS_NODE
    return first.n_nodes, eps_node, first.link_errors[0]


def with_homogeneous_cn(scenario: Scenario, n_nodes=None, eps_node=None, eps_link=None) -> Scenario:
    """Rebuild every core-network path as a homogeneous chain."""
    cur_n, cur_node, cur_link = homogeneous_profile(scenario)
    path = CnPathSpec.homogeneous(
        cur_n if n_nodes is None else int(n_nodes),
        cur_node if eps_node is None else eps_node,
        cur_link if eps_link is None else eps_link,
    )
    return replace(scenario, cn_paths=(path,) * len(scenario.cn_paths))


def with_eps_sx(scenario: Scenario, eps_sx: float) -> Scenario:
    """Set the Xn error rate so that P(SgNB or Xn fails) equals ``eps_sx``."""
    p = scenario.points
    if not p.eps_sgnb <= eps_sx <= 1.0:
        raise DomainError(f"eps_sx = {eps_sx!r} is below the secondary gNB error rate {p.eps_sgnb!r}")
    eps_xn = 1.0 - (1.0 - eps_sx) / (1.0 - p.eps_sgnb) if p.eps_sgnb < 1.0 else 0.0
    return replace(scenario, points=replace(p, eps_xn=min(max(eps_xn, 0.0), 1.0)))


def apply_value(scenario: Scenario, parameter: Parameter, value: float) -> Scenario:
    """Copy of ``scenario`` with one sweep parameter set to ``value``."""
    parameter = Parameter(parameter)
    ran = scenario.ran
    if parameter is Parameter.RHO:
        return replace(scenario, ran=replace(ran, correlation=EventCorrelation(value)))
    if parameter is Parameter.RHO_H:
        return replace(scenario, ran=replace(ran, correlation=ShadowingCorrelation(value)))
    if parameter is Parameter.EPS_RAN:
        return replace(scenario, ran=replace(ran, eps_ran_1=value, eps_ran_2=value))
    if parameter is Parameter.N_INTERMEDIATE_NODES:
        return with_homogeneous_cn(scenario, n_nodes=int(value))
    if parameter is Parameter.EPS_LINK:
        return with_homogeneous_cn(scenario, eps_link=value)
    if parameter is Parameter.EPS_NODE:
        return with_homogeneous_cn(scenario, eps_node=value)
    return with_eps_sx(scenario, value)


def build_cell(base: Scenario, coords: Iterable[tuple[Parameter, float]]) -> Scenario:
    scenario = base
    for parameter, value in coords:
        scenario = apply_value(scenario, parameter, value)
    return scenario


def _evaluate_row(scenario, coords, arch):
    try:
        result = evaluate(scenario.with_architecture(arch))
        return SweepRow(coords, arch, result.error_rate, result.reliability, "ok")
    except FeasibilityError:
        return SweepRow(coords, arch, math.nan, math.nan, "infeasible")


def _architectures(base, architectures):
    if architectures is None:
        return (base.architecture,)
    return tuple(Architecture(a) for a in architectures)


def sweep(base: Scenario, axes: Sequence[SweepAxis], architectures=None) -> SweepGrid:
    """Evaluate the cartesian product of ``axes`` (first axis outermost)."""
    axes = tuple(axes)
    archs = _architectures(base, architectures)
    rows = []
    for combo in itertools.product(*(a.values for a in axes)):
        params = [(a.parameter, v) for a, v in zip(axes, combo)]
        coords = tuple((p.value, v) for p, v in params)
        scenario = build_cell(base, params)
        for arch in archs:
            rows.append(_evaluate_row(scenario, coords, arch))
    return SweepGrid(axes, tuple(rows))


def table1(eps_ran: float, rho_h_values: Sequence[float]) -> list[tuple[float, float]]:
    """``(rho_h, rho)`` pairs for two legs with the same error rate."""
    return [(float(r), event_correlation(eps_ran, eps_ran, r)) for r in rho_h_values]


def sweep_correlation(base: Scenario, rho_values, eps_ran_values, architectures=None) -> SweepGrid:
    axes = (SweepAxis(Parameter.RHO, rho_values), SweepAxis(Parameter.EPS_RAN, eps_ran_values))
    return sweep(base, axes, architectures)


def _with_element_defaults(base, eps_node, eps_link):
    if eps_node is None and eps_link is None:
        return base
    return with_homogeneous_cn(base, eps_node=eps_node, eps_link=eps_link)


def sweep_nodes(
    base: Scenario, n_values, rho_values, architectures=None, eps_node=None, eps_link=None
) -> SweepGrid:
    base = _with_element_defaults(base, eps_node, eps_link)
    axes = (
        SweepAxis(Parameter.N_INTERMEDIATE_NODES, n_values),
        SweepAxis(Parameter.RHO, rho_values),
    )
    return sweep(base, axes, architectures)


def _winner(e_ran, e_cn, tie_rel_tol):
    scale = max(abs(e_ran), abs(e_cn))
    if abs(e_ran - e_cn) <= tie_rel_tol * scale:
        return RegionWinner.TIE
    return RegionWinner.RAN_SPLIT if e_ran < e_cn else RegionWinner.CN_SPLIT


def count_crossovers(winners: Sequence[RegionWinner]) -> int:
    """Changes of the strict winner along a sequence, ignoring ties."""
    strict = [w for w in winners if w in (RegionWinner.RAN_SPLIT, RegionWinner.CN_SPLIT)]
    return sum(1 for a, b in zip(strict, strict[1:]) if a is not b)


def region_map(
    base: Scenario, axis1: SweepAxis, axis2: SweepAxis, tie_rel_tol: float = 1e-12
) -> list[RegionCell]:
    """Winner (lower error rate) of the two layouts on a 2-D grid."""
    if tie_rel_tol < 0:
        raise DomainError("tie_rel_tol must be >= 0")
    cells = []
    for v1, v2 in itertools.product(axis1.values, axis2.values):
        scenario = build_cell(base, [(axis1.parameter, v1), (axis2.parameter, v2)])
        ran = _evaluate_row(scenario, (), Architecture.RAN_SPLIT)
        cn = _evaluate_row(scenario, (), Architecture.CN_SPLIT)
        if "infeasible" in (ran.status, cn.status):
            winner = RegionWinner.INFEASIBLE
        else:
            winner = _winner(ran.error_rate, cn.error_rate, tie_rel_tol)
        cells.append(RegionCell(v1, v2, winner, ran.error_rate, cn.error_rate))
    _check_single_crossover(cells, axis1, axis2)
    return cells


def _check_single_crossover(cells, axis1, axis2):
    n_axis = Parameter.N_INTERMEDIATE_NODES
    width = len(axis2.values)
    grid = [cells[i * width:(i + 1) * width] for i in range(len(axis1.values))]
    if axis2.parameter is n_axis:
        lines = zip(axis1.values, grid)
        other = axis1.parameter
    elif axis1.parameter is n_axis:
        lines = zip(axis2.values, zip(*grid))
        other = axis2.parameter
    else:
        return
    for value, line in lines:
        if count_crossovers([c.winner for c in line]) > 1:
            warnings.warn(
                f"winner changes more than once along {n_axis.value} at "
                f"{other.value} = {value!r}",
                CrossoverWarning,
                stacklevel=3,
            )


def max_feasible_nodes(
    base: Scenario,
    requirement: float,
    n_cap: int = 10_000,
    eps_node=None,
    eps_link=None,
) -> int | None:
    """Largest intermediate-node count ``N <= n_cap`` meeting ``requirement``.

    The error rate never decreases with N (every extra hop is one more serial
    element), so a binary search is exact. Returns ``None`` when even a direct
    gNB-UPF link misses the target.
    """
    if not 0.0 < requirement <= 1.0:
        raise DomainError(f"requirement must lie in (0, 1], got {requirement!r}")
    if int(n_cap) != n_cap or n_cap < 0:
        raise DomainError(f"n_cap must be a non-negative integer, got {n_cap!r}")
    base = _with_element_defaults(base, eps_node, eps_link)

    def error_at(n):
        return evaluate(with_homogeneous_cn(base, n_nodes=n)).error_rate

    if error_at(0) > requirement:
        return None
    if error_at(n_cap) <= requirement:
        return int(n_cap)
    lo, hi = 0, int(n_cap)  # error_at(lo) meets it, error_at(hi) does not
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if error_at(mid) <= requirement:
            lo = mid
        else:
            hi = mid
    return lo
