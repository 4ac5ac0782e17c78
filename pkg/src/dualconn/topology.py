"""Packet-delivery predicates of the two layouts.

Both the exhaustive enumeration and the Monte Carlo sampler call these, so
the survival semantics live in exactly one place. Arguments are boolean
"works" flags (numpy arrays or plain bools).
"""
from __future__ import annotations

import numpy as np


def ran_split_delivered(ue_ok, leg1_ok, leg2_ok, sgnb_ok, xn_ok, mgnb_ok, paths_ok, upf_ok):
    """The master gNB gets a copy from leg 1, or from leg 2 through the
    secondary gNB and Xn; it then needs one working core path to the UPF."""
    access = leg1_ok | (leg2_ok & sgnb_ok & xn_ok)
    any_path = np.logical_or.reduce(list(paths_ok))
    return ue_ok & access & mgnb_ok & any_path & upf_ok


def cn_split_delivered(ue_ok, upf_ok, leg1_ok, leg2_ok, chain1_ok, chain2_ok):
    """``chain_i_ok`` covers gNB i plus core path i."""
    return ue_ok & upf_ok & ((leg1_ok & chain1_ok) | (leg2_ok & chain2_ok))
