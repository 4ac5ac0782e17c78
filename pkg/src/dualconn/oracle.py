"""Exhaustive state enumeration of a scenario.

Every component is an independent two-state element except the radio pair,
which takes one of its four joint outcomes. Summing the probability of all
states in which the packet is lost gives the exact end-to-end error rate,
without using any of the closed forms. Cost is ``4 * 2**k`` states for ``k``
binary components, so this is for small scenarios only.
"""
from __future__ import annotations

import numpy as np

from .errors import DomainError
from .relmodel import Architecture, Scenario, joint_outcomes
from .topology import cn_split_delivered, ran_split_delivered

MAX_COMPONENTS = 22


def _state_table(fail_probs):
    k = len(fail_probs)
    if k > MAX_COMPONENTS:
        raise DomainError(f"{k} binary components is too many to enumerate")
    failed = (np.arange(2 ** k)[:, None] >> np.arange(k)) & 1
    failed = failed.astype(bool)
    p = np.asarray(fail_probs, dtype=float)
    weights = np.where(failed, p, 1.0 - p).prod(axis=1)
    return ~failed, weights


def enumerate_error_rate(scenario: Scenario) -> float:
    """Exact error rate by summing over every joint component state."""
    pts = scenario.points
    names: list[str] = []
    probs: list[float] = []

    def add(name, p):
        names.append(name)
        probs.append(p)

    add("ue", pts.eps_ue)
    add("upf", pts.eps_upf)
    if scenario.architecture is Architecture.RAN_SPLIT:
        add("mgnb", pts.eps_mgnb)
        add("sgnb", pts.eps_sgnb)
        add("xn", pts.eps_xn)
    else:
        for i, g in enumerate(pts.eps_gnb_per_path):
            add(f"gnb{i}", g)
    path_cols = []
    for i, path in enumerate(scenario.cn_paths):
        cols = []
        for j, e in enumerate(path.elements):
            cols.append(len(names))
            add(f"path{i}.{j}", e)
        path_cols.append(cols)

    ok, weights = _state_table(probs)
    col = {name: ok[:, idx] for idx, name in enumerate(names)}
    paths_ok = [ok[:, cols].all(axis=1) for cols in path_cols]

    j = joint_outcomes(scenario.ran)
    outcomes = [
        (False, False, j.p_ff),
        (False, True, j.p_fs),
        (True, False, j.p_sf),
        (True, True, j.p_ss),
    ]
    lost = []
    for leg1_ok, leg2_ok, p_pair in outcomes:
        if p_pair == 0.0:
            continue
        if scenario.architecture is Architecture.RAN_SPLIT:
            delivered = ran_split_delivered(
                col["ue"], leg1_ok, leg2_ok, col["sgnb"], col["xn"], col["mgnb"],
                paths_ok, col["upf"],
            )
        else:
            delivered = cn_split_delivered(
                col["ue"], col["upf"], leg1_ok, leg2_ok,
                col["gnb0"] & paths_ok[0], col["gnb1"] & paths_ok[1],
            )
        lost.append(p_pair * weights[~delivered].sum())
    return float(np.sum(lost))
