"""Acceptance criteria, one test each; a PASS/FAIL line per criterion is
printed in the terminal summary."""
import csv
import io
import itertools
import math
import time

import numpy as np
import pytest
from scipy import integrate

from dualconn.cli import main
from dualconn.gauss import ShadowingCorrelation, bivariate_tail, q_function
from dualconn.mcsim import McConfig, estimate_e2e
from dualconn.oracle import enumerate_error_rate
from dualconn.relmodel import (
    Architecture,
    CnPathSpec,
    EventCorrelation,
    PointFailures,
    RanPairSpec,
    Scenario,
    e2e_cn_split,
    e2e_cn_split_composed,
    e2e_ran_split,
    e2e_ran_split_composed,
    evaluate,
    rho_bounds,
)
from dualconn.sweeps import RegionWinner, count_crossovers, max_feasible_nodes, sweep_nodes

from conftest import reference_scenario


def rel_err(a, b):
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


def test_1_table_mapping(capsys, acceptance_report):
    printed = {0.05: "0.0001", 0.1: "0.0003", 0.3: "0.004", 0.7: "0.1", 1.0: "1"}
    started = time.perf_counter()
    code = main(["map-correlation", "--eps-ran", "1e-4", "--rho-h", "0.05,0.1,0.3,0.7,1"])
    elapsed = time.perf_counter() - started
    out = capsys.readouterr().out
    got = {float(r["rho_h"]): float(r["rho"]) for r in csv.DictReader(io.StringIO(out))}
    misses = []
    for rho_h, text in printed.items():
        decimals = len(text.split(".")[1]) if "." in text else 0
        if abs(got[rho_h] - float(text)) > 10.0 ** -decimals * (1 + 1e-9):
            misses.append((rho_h, got[rho_h], text))
    ok = code == 0 and not misses and elapsed < 1.0
    detail = ", ".join(f"{k}->{got[k]:.3g}" for k in printed) + f"; {elapsed:.3f}s"
    assert acceptance_report("1 table mapping", ok, detail), misses


def test_2_order_of_magnitude(acceptance_report):
    ratios = {}
    for arch in ("ran_split", "cn_split"):
        base = evaluate(reference_scenario(arch, rho=0.0)).error_rate
        ratios[arch] = evaluate(reference_scenario(arch, rho=0.004)).error_rate / base
    ok = all(r > 10 for r in ratios.values())
    detail = ", ".join(f"{a} x{r:.1f}" for a, r in ratios.items())
    assert acceptance_report("2 order-of-magnitude amplification", ok, detail)


def test_3_max_nodes_endpoints(acceptance_report):
    kw = dict(eps_link=1e-6, eps_node=1e-7)
    cn = max_feasible_nodes(reference_scenario("cn_split", rho=1e-4), 3e-8, **kw)
    ran = max_feasible_nodes(reference_scenario("ran_split", rho=1e-4), 3e-8, **kw)
    ordering = []
    for eps_link in np.logspace(-7, -5, 21):
        r = max_feasible_nodes(reference_scenario("ran_split"), 3e-8, eps_link=eps_link)
        c = max_feasible_nodes(reference_scenario("cn_split"), 3e-8, eps_link=eps_link)
        ordering.append((-1 if r is None else r) >= (-1 if c is None else c))
    ok = cn is not None and 32 <= cn <= 44 and ran is None and all(ordering)
    detail = f"cn_split {cn}, ran_split {ran}, independent ordering {sum(ordering)}/{len(ordering)}"
    assert acceptance_report("3 max-nodes endpoints", ok, detail)


def test_4_single_crossover(acceptance_report):
    rhos = [0.0, 1e-4, 0.004]
    grid = sweep_nodes(reference_scenario(), range(0, 31), rhos, list(Architecture))
    ran, cn = grid.error_rates("ran_split"), grid.error_rates("cn_split")
    counts = []
    for j in range(len(rhos)):
        winners = [RegionWinner.RAN_SPLIT if r < c else RegionWinner.CN_SPLIT
                   for r, c in zip(ran[:, j], cn[:, j])]
        counts.append(count_crossovers(winners))
    ok = counts == [1, 1, 1]
    assert acceptance_report("4 single crossover along N", ok, f"crossovers per rho {counts}")


def random_scenario(rng, arch, lo_exp=-10, hi=0.5, max_nodes=4):
    def p():
        return 0.0 if rng.random() < 0.05 else float(10.0 ** rng.uniform(lo_exp, math.log10(hi)))

    e1, e2 = p(), p()
    if e1 in (0.0, 1.0) or e2 in (0.0, 1.0):
        rho = 0.0
    else:
        lo, hi_rho = rho_bounds(e1, e2)
        rho = float(rng.uniform(lo, hi_rho))
    n_paths = 2 if arch is Architecture.CN_SPLIT else int(rng.integers(1, 4))
    paths = []
    for _ in range(n_paths):
        n = int(rng.integers(0, max_nodes + 1))
        paths.append(CnPathSpec(tuple(p() for _ in range(n)), tuple(p() for _ in range(n + 1))))
    points = PointFailures(p(), p(), p(), (p(), p()), p(), p())
    return Scenario(arch, RanPairSpec(e1, e2, EventCorrelation(rho)), tuple(paths), points)


def test_5_closed_form_equivalence(acceptance_report):
    rng = np.random.default_rng(20240605)
    started = time.perf_counter()
    worst = 0.0
    for i in range(1000):
        arch = Architecture.RAN_SPLIT if i % 2 == 0 else Architecture.CN_SPLIT
        s = random_scenario(rng, arch)
        if arch is Architecture.RAN_SPLIT:
            a, b = e2e_ran_split(s).error_rate, e2e_ran_split_composed(s).error_rate
        else:
            a, b = e2e_cn_split(s).error_rate, e2e_cn_split_composed(s).error_rate
        worst = max(worst, rel_err(a, b))
    elapsed = time.perf_counter() - started
    ok = worst <= 1e-12 and elapsed < 10.0
    detail = f"worst relative error {worst:.2e}; {elapsed:.2f}s"
    assert acceptance_report("5 closed-form equivalence", ok, detail)


def test_6_enumeration_oracle(acceptance_report):
    rng = np.random.default_rng(77)
    worst = 0.0
    for _ in range(200):
        def p():
            return float(rng.uniform(0.05, 0.4))

        e1, e2 = p(), p()
        lo, hi = rho_bounds(e1, e2)
        rho = float(rng.uniform(lo, hi))
        paths = []
        for _ in range(2):
            n = int(rng.integers(0, 3))
            paths.append(CnPathSpec(tuple(p() for _ in range(n)), tuple(p() for _ in range(n + 1))))
        points = PointFailures(p(), p(), p(), (p(), p()), p(), p())
        for arch in Architecture:
            s = Scenario(arch, RanPairSpec(e1, e2, EventCorrelation(rho)), tuple(paths), points)
            worst = max(worst, rel_err(enumerate_error_rate(s), evaluate(s).error_rate))
    ok = worst <= 1e-12
    assert acceptance_report("6 enumeration oracle", ok, f"worst relative error {worst:.2e}")


def relaxed_scenarios():
    paths = (CnPathSpec((1e-2,), (1e-2, 1e-2)), CnPathSpec((2e-2,), (1e-2, 1e-2)))
    points = PointFailures(1e-2, 1e-2, 1e-2, (1e-2, 2e-2), 1e-2, 2e-2)
    out = []
    for arch, corr, legs in [
        ("ran_split", EventCorrelation(0.3), (2e-2, 3e-2)),
        ("cn_split", EventCorrelation(0.3), (2e-2, 3e-2)),
        ("cn_split", EventCorrelation(0.0), (1e-2, 1e-2)),
        ("ran_split", ShadowingCorrelation(0.5), (2e-2, 2e-2)),
        ("cn_split", ShadowingCorrelation(0.7), (1e-2, 3e-2)),
    ]:
        out.append(Scenario(arch, RanPairSpec(*legs, corr), paths, points))
    return out


@pytest.mark.slow
def test_7_monte_carlo_agreement(acceptance_report):
    started = time.perf_counter()
    inside = total = 0
    for s in relaxed_scenarios():
        analytic = evaluate(s).error_rate
        for seed in range(100):
            est = estimate_e2e(s, McConfig(10_000_000, seed=seed))
            inside += abs(est.error_rate_hat - analytic) <= 3 * est.std_error
            total += 1
    identical = True
    for s, seed in itertools.product(relaxed_scenarios()[:2], (0, 99)):
        cfg = McConfig(10_000_000, seed=seed)
        runs = {estimate_e2e(s, cfg, workers=w) for w in (1, 4, 8)}
        identical &= len(runs) == 1
    elapsed = time.perf_counter() - started
    coverage = inside / total
    ok = coverage >= 0.99 and identical and elapsed < 300
    detail = f"{inside}/{total} within 3 SE, workers 1/4/8 identical={identical}; {elapsed:.0f}s"
    assert acceptance_report("7 Monte Carlo agreement", ok, detail)


def brute_force_tail(b1, b2, rho):
    det = 1.0 - rho * rho
    norm = 1.0 / (2.0 * math.pi * math.sqrt(det))

    def density(y, x):
        return norm * math.exp(-(x * x - 2 * rho * x * y + y * y) / (2 * det))

    value, _ = integrate.dblquad(density, b1, b1 + 14, b2, b2 + 14, epsabs=1e-20, epsrel=1e-11)
    return value


def test_8_bivariate_tail(acceptance_report):
    betas = [0.0, 1.0, 2.0, 3.719]
    rhos = [-0.9, -0.5, 0.0, 0.3, 0.7, 0.9]
    worst, checked = 0.0, 0
    for b1, b2, rho in itertools.product(betas, betas, rhos):
        reference = brute_force_tail(b1, b2, rho)
        if reference <= 1e-12:
            continue
        worst = max(worst, rel_err(bivariate_tail(b1, b2, rho), reference))
        checked += 1
    exact = all(
        bivariate_tail(b1, b2, 0.0) == q_function(b1) * q_function(b2)
        and bivariate_tail(b1, b2, 1.0) == q_function(max(b1, b2))
        and bivariate_tail(b1, b2, -1.0) == max(0.0, q_function(b1) - q_function(-b2))
        for b1, b2 in itertools.product(betas + [-1.5], repeat=2)
    )
    ok = worst <= 1e-6 and exact
    detail = f"{checked} grid points, worst relative error {worst:.1e}, closed forms exact={exact}"
    assert acceptance_report("8 bivariate tail", ok, detail)
