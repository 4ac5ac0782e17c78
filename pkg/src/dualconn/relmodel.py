"""Analytical end-to-end reliability of the two dual-connectivity layouts.

``RAN split``: the UE reaches the master gNB either directly (leg 1) or via
the secondary gNB and the Xn backhaul (leg 2); the master gNB forwards one
copy over ``n`` parallel core-network paths to the UPF.

``CN split``: duplication happens at the UE and the UPF, so each radio leg
continues over its own gNB and core-network path.

Error rates are computed in complement form, i.e. ``1 - prod(1 - a_k)``
evaluated through ``log1p``/``expm1``, which keeps full relative precision
when the result is around 1e-10.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence, Union

from .errors import DomainError, FeasibilityError, UsageError
from .gauss import ShadowingCorrelation, event_correlation, frechet_bounds


class Architecture(str, enum.Enum):
    RAN_SPLIT = "ran_split"
    CN_SPLIT = "cn_split"


class DegenerateLegWarning(UserWarning):
    """Correlation given for a leg whose failure is certain or impossible."""


def _check_probability(value, name):
    if not (isinstance(value, (int, float)) and not isinstance(value, bool) and 0.0 <= value <= 1.0):
        raise DomainError(f"{name} must be a probability in [0, 1], got {value!r}")
    return float(value)


@dataclass(frozen=True)
class EventCorrelation:
    """Pearson correlation of the two leg-failure indicators."""

    rho: float

    def __post_init__(self):
        if not (isinstance(self.rho, (int, float)) and -1.0 <= self.rho <= 1.0):
            raise DomainError(f"rho must lie in [-1, 1], got {self.rho!r}")


Correlation = Union[EventCorrelation, ShadowingCorrelation]


@dataclass(frozen=True)
class RanPairSpec:
    eps_ran_1: float
    eps_ran_2: float
    correlation: Correlation = field(default_factory=lambda: EventCorrelation(0.0))

    def __post_init__(self):
        _check_probability(self.eps_ran_1, "eps_ran_1")
        _check_probability(self.eps_ran_2, "eps_ran_2")
        if not isinstance(self.correlation, (EventCorrelation, ShadowingCorrelation)):
            raise DomainError(
                "correlation must be an EventCorrelation or a ShadowingCorrelation"
            )

    @property
    def degenerate(self) -> bool:
        return self.eps_ran_1 in (0.0, 1.0) or self.eps_ran_2 in (0.0, 1.0)


@dataclass(frozen=True)
class JointOutcomeProbs:
    """Joint law of the two legs; ``f`` = failed, ``s`` = succeeded, leg 1 first."""

    p_ff: float
    p_fs: float
    p_sf: float
    p_ss: float

    def as_dict(self):
        return {"p_ff": self.p_ff, "p_fs": self.p_fs, "p_sf": self.p_sf, "p_ss": self.p_ss}


@dataclass(frozen=True)
class CnPathSpec:
    """Serial core-network path: link, node, link, ..., node, link."""

    node_errors: tuple[float, ...]
    link_errors: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "node_errors", tuple(float(e) for e in self.node_errors))
        object.__setattr__(self, "link_errors", tuple(float(e) for e in self.link_errors))
        if len(self.link_errors) != len(self.node_errors) + 1:
            raise DomainError(
                f"a path with {len(self.node_errors)} nodes needs "
                f"{len(self.node_errors) + 1} links, got {len(self.link_errors)}"
            )
        for j, e in enumerate(self.node_errors):
            _check_probability(e, f"node_errors[{j}]")
        for j, e in enumerate(self.link_errors):
            _check_probability(e, f"link_errors[{j}]")

    @classmethod
    def homogeneous(cls, n_nodes: int, eps_node: float, eps_link: float) -> "CnPathSpec":
        if int(n_nodes) != n_nodes or n_nodes < 0:
            raise DomainError(f"n_nodes must be a non-negative integer, got {n_nodes!r}")
        n_nodes = int(n_nodes)
        return cls((eps_node,) * n_nodes, (eps_link,) * (n_nodes + 1))

    @property
    def n_nodes(self) -> int:
        return len(self.node_errors)

    @property
    def elements(self) -> tuple[float, ...]:
        return self.node_errors + self.link_errors


@dataclass(frozen=True)
class PointFailures:
    eps_ue: float = 0.0
    eps_upf: float = 0.0
    eps_mgnb: float = 0.0
    eps_gnb_per_path: tuple[float, ...] = (0.0, 0.0)
    eps_sgnb: float = 0.0
    eps_xn: float = 0.0

    def __post_init__(self):
        object.__setattr__(
            self, "eps_gnb_per_path", tuple(float(e) for e in self.eps_gnb_per_path)
        )
        for name in ("eps_ue", "eps_upf", "eps_mgnb", "eps_sgnb", "eps_xn"):
            _check_probability(getattr(self, name), name)
        for j, e in enumerate(self.eps_gnb_per_path):
            _check_probability(e, f"eps_gnb_per_path[{j}]")


@dataclass(frozen=True)
class Scenario:
    architecture: Architecture
    ran: RanPairSpec
    cn_paths: tuple[CnPathSpec, ...]
    points: PointFailures = field(default_factory=PointFailures)

    def __post_init__(self):
        object.__setattr__(self, "architecture", Architecture(self.architecture))
        object.__setattr__(self, "cn_paths", tuple(self.cn_paths))
        if self.architecture is Architecture.CN_SPLIT:
            if len(self.cn_paths) != 2:
                raise DomainError(
                    f"CN split needs exactly 2 core-network paths, got {len(self.cn_paths)}"
                )
            if len(self.points.eps_gnb_per_path) != 2:
                raise DomainError("CN split needs one gNB error rate per path (2 values)")
        elif len(self.cn_paths) < 1:
            raise DomainError("RAN split needs at least one core-network path")

    def with_architecture(self, architecture) -> "Scenario":
        return replace(self, architecture=Architecture(architecture))


@dataclass(frozen=True)
class E2EResult:
    reliability: float
    error_rate: float


def _union_error(terms: Sequence[float]) -> float:
    """P(at least one of several independent failures) = 1 - prod(1 - a)."""
    if any(a >= 1.0 for a in terms):
        return 1.0
    return -math.expm1(math.fsum(math.log1p(-a) for a in terms))


def _result(error_rate: float) -> E2EResult:
    error_rate = min(max(error_rate, 0.0), 1.0) + 0.0  # no negative zero
    return E2EResult(reliability=1.0 - error_rate, error_rate=error_rate)


def indicator_sigma(eps: float) -> float:
    """Standard deviation of a Bernoulli(eps) indicator."""
    eps = _check_probability(eps, "eps")
    return math.sqrt(eps * (1.0 - eps))


def rho_bounds(eps1: float, eps2: float) -> tuple[float, float]:
    """Feasible interval of the event correlation for the given marginals."""
    s = indicator_sigma(eps1) * indicator_sigma(eps2)
    if s == 0.0:
        return 0.0, 0.0
    lo, hi = frechet_bounds(eps1, eps2)
    return (lo - eps1 * eps2) / s, (hi - eps1 * eps2) / s


def resolve_event_correlation(pair: RanPairSpec) -> float:
    """Event correlation of the pair, mapping shadowing correlation if needed."""
    corr = pair.correlation
    if isinstance(corr, EventCorrelation):
        return float(corr.rho)
    return event_correlation(pair.eps_ran_1, pair.eps_ran_2, corr)


def joint_outcomes(pair: RanPairSpec) -> JointOutcomeProbs:
    """Joint success/failure law of the two radio legs.

    ``p_ff = e1 e2 + rho s1 s2``; every mixed outcome loses ``rho s1 s2`` and
    the joint success gains it back.
    """
    return _joint(pair)[0]


def _joint(pair: RanPairSpec) -> tuple[JointOutcomeProbs, float]:
    e1, e2 = pair.eps_ran_1, pair.eps_ran_2
    if pair.degenerate:
        corr = pair.correlation
        value = corr.rho if isinstance(corr, EventCorrelation) else corr.rho_h
        if value != 0.0:
            warnings.warn(
                "correlation ignored: at least one radio leg has a deterministic outcome",
                DegenerateLegWarning,
                stacklevel=3,
            )
        probs = JointOutcomeProbs(e1 * e2, e1 * (1.0 - e2), (1.0 - e1) * e2, (1.0 - e1) * (1.0 - e2))
        return probs, 0.0

    rho = resolve_event_correlation(pair)
    cov = rho * indicator_sigma(e1) * indicator_sigma(e2)
    bases = {
        "p_ff": e1 * e2,
        "p_fs": e1 * (1.0 - e2),
        "p_sf": (1.0 - e1) * e2,
        "p_ss": (1.0 - e1) * (1.0 - e2),
    }
    signs = {"p_ff": 1.0, "p_fs": -1.0, "p_sf": -1.0, "p_ss": 1.0}
    bound_names = {
        "p_ff": "lower Fréchet bound P(both fail) >= max(0, e1 + e2 - 1)",
        "p_fs": "upper Fréchet bound P(both fail) <= e1",
        "p_sf": "upper Fréchet bound P(both fail) <= e2",
        "p_ss": "lower Fréchet bound P(both fail) >= e1 + e2 - 1",
    }
    out = {}
    for key, base in bases.items():
        value = base + signs[key] * cov
        # rounding slack when rho sits exactly on a bound
        slack = 8.0 * 2.220446049250313e-16 * (abs(base) + abs(cov))
        if value < -slack:
            lo, hi = rho_bounds(e1, e2)
            raise FeasibilityError(
                f"rho = {rho!r} violates the {bound_names[key]} "
                f"(feasible rho for eps1={e1!r}, eps2={e2!r} is [{lo!r}, {hi!r}])",
                bound=bound_names[key],
            )
        out[key] = max(value, 0.0)
    return JointOutcomeProbs(**out), cov


def cn_path_error(path: CnPathSpec) -> float:
    """Error rate of one serial core-network path (gNB and UPF excluded)."""
    return _union_error(path.elements)


def cg_error(path: CnPathSpec, eps_gnb: float) -> float:
    """Path error with the serving gNB folded in."""
    eps_gnb = _check_probability(eps_gnb, "eps_gnb")
    return _union_error(path.elements + (eps_gnb,))


def sx_error(points: PointFailures) -> float:
    """P(secondary gNB fails or Xn fails), the two taken as independent."""
    return _union_error((points.eps_sgnb, points.eps_xn))


def mgnb_leg_error(pair: RanPairSpec, eps_ue: float, eps_sx: float) -> float:
    """Probability that no copy reaches the master gNB.

    Either the UE fails, or both legs fail, or only leg 2 survives and is then
    lost at the secondary gNB / Xn hop.
    """
    eps_ue = _check_probability(eps_ue, "eps_ue")
    eps_sx = _check_probability(eps_sx, "eps_sx")
    j = joint_outcomes(pair)
    return eps_ue + (1.0 - eps_ue) * (j.p_ff + j.p_fs * eps_sx)


def _require(scenario: Scenario, architecture: Architecture):
    if scenario.architecture is not architecture:
        raise UsageError(
            f"scenario architecture is {scenario.architecture.value}, expected {architecture.value}"
        )


def _ran_split_radio_term(pair: RanPairSpec, eps_sx: float) -> float:
    e1, e2 = pair.eps_ran_1, pair.eps_ran_2
    _, cov = _joint(pair)
    return e1 * e2 + e1 * (1.0 - e2) * eps_sx + cov * (1.0 - eps_sx)


def e2e_ran_split(scenario: Scenario) -> E2EResult:
    """Closed-form error rate of the RAN split layout.

    Independent factors: master gNB, the parallel core-network bundle
    (all paths must fail), UPF, UE, and the radio/Xn access term.
    """
    _require(scenario, Architecture.RAN_SPLIT)
    p = scenario.points
    cn_bundle = math.prod(cn_path_error(path) for path in scenario.cn_paths)
    radio = _ran_split_radio_term(scenario.ran, sx_error(p))
    return _result(_union_error((p.eps_mgnb, cn_bundle, p.eps_upf, p.eps_ue, radio)))


def e2e_ran_split_composed(scenario: Scenario) -> E2EResult:
    """RAN split error rate via the staged composition (access error first)."""
    _require(scenario, Architecture.RAN_SPLIT)
    p = scenario.points
    eps_m = mgnb_leg_error(scenario.ran, p.eps_ue, sx_error(p))
    cn_bundle = math.prod(cn_path_error(path) for path in scenario.cn_paths)
    return _result(_union_error((eps_m, p.eps_mgnb, cn_bundle, p.eps_upf)))


def _cn_split_terms(scenario: Scenario):
    paths, gnbs = scenario.cn_paths, scenario.points.eps_gnb_per_path
    c1 = cg_error(paths[0], gnbs[0])
    c2 = cg_error(paths[1], gnbs[1])
    j, cov = _joint(scenario.ran)
    return c1, c2, j, cov


def e2e_cn_split(scenario: Scenario) -> E2EResult:
    """Closed-form error rate of the CN split layout.

    The access term collects: both legs fail; exactly one leg survives but its
    own gNB + core path fails; both legs survive but both paths fail.
    """
    _require(scenario, Architecture.CN_SPLIT)
    e1, e2 = scenario.ran.eps_ran_1, scenario.ran.eps_ran_2
    c1, c2, _, cov = _cn_split_terms(scenario)
    access = (
        c1 * (e2 * (1.0 - e1) - cov)
        + c2 * (e1 * (1.0 - e2) - cov)
        + c1 * c2 * ((1.0 - e1) * (1.0 - e2) + cov)
        + e1 * e2
        + cov
    )
    p = scenario.points
    return _result(_union_error((p.eps_ue, p.eps_upf, access)))


def e2e_cn_split_composed(scenario: Scenario) -> E2EResult:
    """CN split error rate summed over the four joint radio outcomes."""
    _require(scenario, Architecture.CN_SPLIT)
    c1, c2, j, _ = _cn_split_terms(scenario)
    p = scenario.points
    edge = p.eps_ue + p.eps_upf - p.eps_ue * p.eps_upf
    lost = j.p_ff + c1 * j.p_sf + c2 * j.p_fs + c1 * c2 * j.p_ss
    return _result(edge + (1.0 - p.eps_ue) * (1.0 - p.eps_upf) * lost)


def evaluate(scenario: Scenario) -> E2EResult:
    if scenario.architecture is Architecture.RAN_SPLIT:
        return e2e_ran_split(scenario)
    return e2e_cn_split(scenario)


def breakdown(scenario: Scenario) -> dict:
    """Every intermediate term of the evaluation, for auditing."""
    p = scenario.points
    result = evaluate(scenario)
    j = joint_outcomes(scenario.ran)
    components = {
        "rho": resolve_event_correlation(scenario.ran) if not scenario.ran.degenerate else 0.0,
        "joint_outcomes": j.as_dict(),
        "eps_cn": [cn_path_error(path) for path in scenario.cn_paths],
    }
    if scenario.architecture is Architecture.RAN_SPLIT:
        eps_sx = sx_error(p)
        components["eps_sx"] = eps_sx
        components["eps_m"] = mgnb_leg_error(scenario.ran, p.eps_ue, eps_sx)
        components["cn_bundle_error"] = math.prod(components["eps_cn"])
    else:
        components["eps_cg"] = [
            cg_error(path, g) for path, g in zip(scenario.cn_paths, p.eps_gnb_per_path)
        ]
    return {
        "architecture": scenario.architecture.value,
        "reliability": result.reliability,
        "error_rate": result.error_rate,
        "components": components,
    }
