"""Shared fixtures and the acceptance summary printed at the end of the run."""
from fractions import Fraction

import pytest

from dualconn.relmodel import (
    Architecture,
    CnPathSpec,
    EventCorrelation,
    PointFailures,
    RanPairSpec,
    Scenario,
)

_ACCEPTANCE = []


def reference_scenario(arch="ran_split", rho=0.0, eps_ran=1e-4, n_nodes=1, eps_node=1e-7,
                   eps_link=4e-6, eps_xn=1e-4, n_paths=2, point=1e-10):
    path = CnPathSpec.homogeneous(n_nodes, eps_node, eps_link)
    return Scenario(
        Architecture(arch),
        RanPairSpec(eps_ran, eps_ran, EventCorrelation(rho)),
        (path,) * (2 if arch == "cn_split" else n_paths),
        PointFailures(point, point, point, (point, point), point, eps_xn),
    )


def exact_union(*terms):
    """1 - prod(1 - a) in exact rational arithmetic."""
    prod = Fraction(1)
    for a in terms:
        prod *= 1 - Fraction(a)
    return 1 - prod


@pytest.fixture
def acceptance_report():
    def record(name, passed, detail=""):
        _ACCEPTANCE.append((name, passed, detail))
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _ACCEPTANCE:
        mark = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{mark}] {name}" + (f" -- {detail}" if detail else ""))
