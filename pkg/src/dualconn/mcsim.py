"""Monte Carlo estimate of the end-to-end error rate.

Each sample draws the radio pair (either from correlated Gaussian shadowing
or directly from the joint event law) plus an independent failure flag for
every other element, then applies the same delivery predicate the
enumeration oracle uses.

Samples are split into batches of ``batch_size``. Batch ``b`` owns its own
Philox stream keyed by ``SeedSequence(seed, spawn_key=(b,))``, so the failure
count depends only on ``(seed, n_samples, batch_size)`` and not on how many
batches run at once.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .gauss import ShadowingCorrelation, inverse_q
from .relmodel import Architecture, RanPairSpec, Scenario, joint_outcomes
from .topology import cn_split_delivered, ran_split_delivered

LOW_CONFIDENCE_FAILURES = 10
# Above this rate a dense uniform draw is cheaper than geometric gap sampling.
_DENSE_THRESHOLD = 0.05


@dataclass(frozen=True)
class McConfig:
    n_samples: int
    seed: int = 0
    batch_size: int = 1 << 20

    def __post_init__(self):
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise DomainError(f"n_samples must be an integer >= 1, got {self.n_samples!r}")
        if int(self.batch_size) != self.batch_size or self.batch_size < 1:
            raise DomainError(f"batch_size must be an integer >= 1, got {self.batch_size!r}")
        if not 0 <= int(self.seed) < 2 ** 64 or int(self.seed) != self.seed:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        object.__setattr__(self, "n_samples", int(self.n_samples))
        object.__setattr__(self, "batch_size", int(self.batch_size))
        object.__setattr__(self, "seed", int(self.seed))

    def batch_sizes(self) -> list[int]:
        full, rest = divmod(self.n_samples, self.batch_size)
        return [self.batch_size] * full + ([rest] if rest else [])


@dataclass(frozen=True)
class McEstimate:
    error_rate_hat: float
    std_error: float
    n_samples: int
    n_failures: int
    seed: int

    @classmethod
    def from_counts(cls, n_failures: int, n_samples: int, seed: int) -> "McEstimate":
        p = n_failures / n_samples
        return cls(p, math.sqrt(p * (1.0 - p) / n_samples), n_samples, n_failures, seed)

    @property
    def low_confidence(self) -> bool:
        """Too few failures for the normal approximation to be trusted."""
        return self.n_failures < LOW_CONFIDENCE_FAILURES


def batch_rng(seed: int, batch_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(batch_index,))))


def failure_flags(rng: np.random.Generator, p: float, size: int) -> np.ndarray:
    """Boolean array of ``size`` independent Bernoulli(p) failure flags.

    For small ``p`` only the failure positions are drawn, as cumulative sums
    of geometric gaps, which is exact and touches O(p * size) numbers.
    """
    if p <= 0.0:
        return np.zeros(size, dtype=bool)
    if p >= 1.0:
        return np.ones(size, dtype=bool)
    if p > _DENSE_THRESHOLD:
        return rng.random(size) < p
    flags = np.zeros(size, dtype=bool)
    expected = p * size
    chunk = int(expected + 6.0 * math.sqrt(expected) + 16)
    pos = -1
    while True:
        gaps = rng.geometric(p, chunk)
        hits = pos + np.cumsum(gaps)
        inside = hits[hits < size]
        flags[inside] = True
        if inside.size < hits.size:
            return flags
        pos = int(hits[-1])


def sample_ran_pair(pair: RanPairSpec, rng: np.random.Generator, size: int | None = None):
    """Draw leg-failure flags ``(leg1_failed, leg2_failed)``.

    Shadowing correlation is simulated physically: ``X2 = r X1 + sqrt(1 - r^2) Z``
    and leg ``i`` fails when ``X_i`` exceeds ``inverse_q(eps_i)``. An event
    correlation is sampled as one categorical draw over the four joint
    outcomes.
    """
    n = 1 if size is None else size
    e1, e2 = pair.eps_ran_1, pair.eps_ran_2
    if pair.degenerate:
        joint_outcomes(pair)  # surfaces the degenerate-leg warning
        f1 = failure_flags(rng, e1, n)
        f2 = failure_flags(rng, e2, n)
    elif isinstance(pair.correlation, ShadowingCorrelation):
        r = pair.correlation.rho_h
        x1 = rng.standard_normal(n)
        x2 = r * x1 + math.sqrt(max(0.0, 1.0 - r * r)) * rng.standard_normal(n)
        f1 = x1 > inverse_q(e1)
        f2 = x2 > inverse_q(e2)
    else:
        j = joint_outcomes(pair)
        u = rng.random(n)
        c_ff = j.p_ff
        c_fs = c_ff + j.p_fs
        c_sf = c_fs + j.p_sf
        f1 = u < c_fs
        f2 = (u < c_ff) | ((u >= c_fs) & (u < c_sf))
    if size is None:
        return bool(f1[0]), bool(f2[0])
    return f1, f2


def _chain_ok(rng, probs, size):
    failed = np.zeros(size, dtype=bool)
    for p in probs:
        failed |= failure_flags(rng, p, size)
    return ~failed


def simulate_batch(scenario: Scenario, rng: np.random.Generator, size: int) -> int:
    """Number of lost packets among ``size`` samples."""
    pts = scenario.points
    leg1_failed, leg2_failed = sample_ran_pair(scenario.ran, rng, size)
    ue_ok = ~failure_flags(rng, pts.eps_ue, size)
    upf_ok = ~failure_flags(rng, pts.eps_upf, size)
    if scenario.architecture is Architecture.RAN_SPLIT:
        mgnb_ok = ~failure_flags(rng, pts.eps_mgnb, size)
        sgnb_ok = ~failure_flags(rng, pts.eps_sgnb, size)
        xn_ok = ~failure_flags(rng, pts.eps_xn, size)
        paths_ok = [_chain_ok(rng, path.elements, size) for path in scenario.cn_paths]
        delivered = ran_split_delivered(
            ue_ok, ~leg1_failed, ~leg2_failed, sgnb_ok, xn_ok, mgnb_ok, paths_ok, upf_ok
        )
    else:
        chains = [
            _chain_ok(rng, path.elements + (g,), size)
            for path, g in zip(scenario.cn_paths, pts.eps_gnb_per_path)
        ]
        delivered = cn_split_delivered(
            ue_ok, upf_ok, ~leg1_failed, ~leg2_failed, chains[0], chains[1]
        )
    return int(size - np.count_nonzero(delivered))


def estimate_e2e(scenario: Scenario, config: McConfig, workers: int = 1) -> McEstimate:
    """Frequency estimate of the error rate with its binomial standard error."""
    if workers < 1:
        raise DomainError(f"workers must be >= 1, got {workers!r}")
    # fail fast on infeasible correlations before spawning work
    if not scenario.ran.degenerate:
        joint_outcomes(scenario.ran)
    sizes = config.batch_sizes()

    def run(item):
        index, size = item
        return simulate_batch(scenario, batch_rng(config.seed, index), size)

    if workers == 1:
        counts = [run(item) for item in enumerate(sizes)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(run, enumerate(sizes)))
    return McEstimate.from_counts(sum(counts), config.n_samples, config.seed)
