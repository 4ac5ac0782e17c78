"""Gaussian helpers: Q-function, its inverse, bivariate upper-orthant
probability, and the mapping from shadowing cross-correlation to the
correlation of the two radio-leg failure indicators.

Everything here is a pure function of its arguments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate, special

from .errors import DegenerateIndicatorError, DomainError

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Gaussian tail beyond this many standard deviations above the lower limit
# contributes < 1e-30 to the orthant integral.
TAIL_SPAN = 12.0
QUAD_EPSABS = 1e-16
QUAD_EPSREL = 1e-9


@dataclass(frozen=True)
class LinkBudget:
    """Power budget of one radio link, all quantities in dB / dBm.

    The received power is ``transmit - path_loss - X`` with X a zero-mean
    Gaussian of standard deviation ``shadowing_stddev_db``; the link fails
    when the received power drops below ``threshold_dbm``.
    """

    transmit_power_dbm: float
    path_loss_db: float
    threshold_dbm: float
    shadowing_stddev_db: float

    def __post_init__(self):
        if not self.shadowing_stddev_db > 0 or not math.isfinite(self.shadowing_stddev_db):
            raise DomainError(
                f"shadowing_stddev_db must be finite and > 0, got {self.shadowing_stddev_db!r}"
            )
        if not math.isfinite(self.margin):
            raise DomainError("link budget margin is not finite")

    @property
    def margin(self) -> float:
        """Mean received power above threshold, in shadowing standard deviations."""
        return (
            self.transmit_power_dbm - self.path_loss_db - self.threshold_dbm
        ) / self.shadowing_stddev_db


@dataclass(frozen=True)
class ShadowingCorrelation:
    """Cross-correlation of the shadow fading seen on the two radio links."""

    rho_h: float

    def __post_init__(self):
        _check_rho(self.rho_h, "rho_h")


def _check_rho(rho, name="rho_h"):
    if not (isinstance(rho, (int, float)) and -1.0 <= rho <= 1.0):
        raise DomainError(f"{name} must lie in [-1, 1], got {rho!r}")


def _rho_value(rho_h) -> float:
    if isinstance(rho_h, ShadowingCorrelation):
        return float(rho_h.rho_h)
    _check_rho(rho_h)
    return float(rho_h)


def _check_finite(x, name="x"):
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite, got {x!r}")


def q_function(x: float) -> float:
    """Upper-tail probability of the standard normal, P(Z > x)."""
    _check_finite(x)
    return 0.5 * math.erfc(x / _SQRT2)


def _log_q(x: float) -> float:
    return float(special.log_ndtr(-x))


def _inverse_q_seed(p: float) -> float:
    # Abramowitz & Stegun 26.2.23, |error| < 4.5e-4.
    tail = min(p, 1.0 - p)
    t = math.sqrt(-2.0 * math.log(tail))
    x = t - (2.515517 + 0.802853 * t + 0.010328 * t * t) / (
        1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t ** 3
    )
    return x if p <= 0.5 else -x


def inverse_q(p: float, rtol: float = 1e-13, max_iter: int = 100) -> float:
    """Return x with ``q_function(x) == p`` to relative error ``rtol``.

    Safeguarded Newton on ``log Q(x) - log p``: the rational seed is refined
    inside a bisection bracket, so each step either follows Newton or halves
    the bracket.
    """
    if not (isinstance(p, (int, float)) and 0.0 < p < 1.0):
        raise DomainError(f"p must lie in the open interval (0, 1), got {p!r}")
    if p == 0.5:
        return 0.0
    if p > 0.5:
        # 1 - p is exact here, and the lower tail is far better conditioned
        return -inverse_q(1.0 - p, rtol, max_iter)
    log_p = math.log(p)
    lo, hi = -40.0, 40.0
    x = _inverse_q_seed(p)
    for _ in range(max_iter):
        log_qx = _log_q(x)
        g = log_qx - log_p
        if abs(g) <= rtol:
            return x
        if g > 0:
            lo = x
        else:
            hi = x
        # d/dx log Q(x) = -phi(x) / Q(x)
        slope = -math.exp(-0.5 * x * x - 0.5 * math.log(2.0 * math.pi) - log_qx)
        step = x - g / slope
        x = step if lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= 4.0 * math.ulp(abs(x) + 1e-300):
            return x
    return x


def ran_error_from_budget(budget: LinkBudget) -> float:
    """Radio-leg error rate Q(beta) for a link budget with margin beta."""
    return q_function(budget.margin)


def bivariate_tail(beta1: float, beta2: float, rho_h) -> float:
    """P(X1 > beta1, X2 > beta2) for a standard bivariate normal pair.

    Evaluated as the one-dimensional integral
    ``int_b^inf phi(x) Q((a - rho x) / sqrt(1 - rho^2)) dx`` with ``b`` the
    larger threshold, so the result is exactly symmetric in its arguments.
    """
    _check_finite(beta1, "beta1")
    _check_finite(beta2, "beta2")
    rho = _rho_value(rho_h)
    if rho == 0.0:
        return q_function(beta1) * q_function(beta2)
    if rho == 1.0:
        return q_function(max(beta1, beta2))
    if rho == -1.0:
        # X2 = -X1: the event is beta1 < X1 < -beta2
        return max(0.0, q_function(beta1) - q_function(-beta2))

    inner, outer = sorted((beta1, beta2))
    scale = math.sqrt(1.0 - rho * rho)

    def integrand(x):
        return _INV_SQRT_2PI * math.exp(-0.5 * x * x) * q_function((inner - rho * x) / scale)

    upper = max(outer, 0.0) + TAIL_SPAN
    value, _ = integrate.quad(
        integrand, outer, upper, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200
    )
    return min(max(value, 0.0), q_function(outer))


def frechet_bounds(eps1: float, eps2: float) -> tuple[float, float]:
    """Admissible interval of the joint failure probability for given marginals."""
    return max(0.0, eps1 + eps2 - 1.0), min(eps1, eps2)


def _check_indicator_rate(eps, name):
    if not (isinstance(eps, (int, float)) and 0.0 <= eps <= 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {eps!r}")
    if eps in (0.0, 1.0):
        raise DegenerateIndicatorError(
            f"{name} = {eps!r} gives a constant failure indicator; its correlation is undefined"
        )


def event_correlation(eps1: float, eps2: float, rho_h) -> float:
    """Pearson correlation of the two leg-failure indicators.

    Each leg fails when its standardized shadowing exceeds ``inverse_q(eps)``;
    the joint failure probability is the bivariate upper-orthant probability
    at shadowing correlation ``rho_h``.
    """
    _check_indicator_rate(eps1, "eps1")
    _check_indicator_rate(eps2, "eps2")
    rho = _rho_value(rho_h)
    if rho == 0.0:
        return 0.0
    if rho == 1.0 and eps1 == eps2:
        return 1.0
    lo, hi = frechet_bounds(eps1, eps2)
    if rho == 1.0:
        p_ff = hi
    elif rho == -1.0:
        p_ff = lo
    else:
        p_ff = bivariate_tail(inverse_q(eps1), inverse_q(eps2), rho)
    p_ff = min(max(p_ff, lo), hi)
    sigmas = math.sqrt(eps1 * (1.0 - eps1)) * math.sqrt(eps2 * (1.0 - eps2))
    value = (p_ff - eps1 * eps2) / sigmas
    return min(max(value, -1.0), 1.0)
