"""Dwelling-time planning: a feasible dwell matrix for given arrival rates
and the minimum UAV count for which one exists.

Feasibility means every CH's service rate covers its arrival rate while each
UAV spends at most one full slot dwelling. Total demand sum_g rate_g / mu
therefore fits into U unit budgets iff it is <= U, and the constructive plan
is a greedy sequential fill: CHs in ascending id order, each pouring its
demand into the current UAV until that UAV's budget is full, spilling the
remainder onto the next (a single CH may span several UAVs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from .model import DwellMatrix

# slack allowed when checking feasibility / verifying plans, absorbs float dust
_FEAS_EPS = 1e-9


@dataclass(frozen=True)
class StabilityPlan:
    """A dwell matrix together with the per-CH service margin it achieves."""

    dwell: DwellMatrix
    uav_count: int
    slack: np.ndarray  # per CH: mu * total dwell - arrival rate

    def __post_init__(self):
        if self.dwell.num_uavs != self.uav_count:
            raise ValueError("dwell matrix row count must equal uav_count")
        if np.any(self.slack < -_FEAS_EPS):
            raise ValueError("plan has negative slack")


def _check_rates(arrival_rates: Sequence[float]) -> np.ndarray:
    rates = np.asarray(arrival_rates, dtype=float)
    if rates.ndim != 1 or rates.size == 0:
        raise ValueError("arrival_rates must be a nonempty 1-D sequence")
    if np.any(rates < 0):
        raise ValueError(f"arrival rates must be nonnegative, got {rates}")
    return rates


def find_dwell(
    arrival_rates: Sequence[float],
    uav_count: int,
    mu: float = 1.0,
    slack_target: float = 0.0,
) -> StabilityPlan | None:
    """Build a dwell matrix serving every CH at >= its arrival rate, or None
    if `uav_count` UAVs cannot carry the load.

    With slack_target > 0 every CH is served at rate >= arrival + slack_target
    (useful to demonstrate strictly stable queues in simulation).
    """
    rates = _check_rates(arrival_rates)
    if uav_count < 1:
        raise ValueError(f"uav_count must be >= 1, got {uav_count}")
    if not mu > 0:
        raise ValueError(f"mu must be > 0, got {mu}")
    if slack_target < 0:
        raise ValueError(f"slack_target must be >= 0, got {slack_target}")

    demand = (rates + np.where(rates > 0, slack_target, 0.0)) / mu
    if demand.sum() > uav_count + _FEAS_EPS:
        return None

    entries = np.zeros((uav_count, rates.size))
    u = 0
    budget = 1.0
    for g in range(rates.size):
        remaining = demand[g]
        # each pass either zeroes `remaining` (CH done) or zeroes `budget`
        # (next UAV); min/subtract pairs are exact, so no dust accumulates
        while remaining > 0:
            if budget <= 0:
                u += 1
                budget = 1.0
                if u >= uav_count:
                    return None
            pour = min(remaining, budget)
            entries[u, g] += pour
            remaining -= pour
            budget -= pour
    # subtraction dust at UAV boundaries can leave ~1e-17 slivers that a later
    # stage would read as real (and unservable) visits; drop them
    entries[entries < 1e-12] = 0.0
    served = mu * entries.sum(axis=0)
    return StabilityPlan(dwell=DwellMatrix(entries=entries), uav_count=uav_count,
                         slack=served - rates)


def min_uavs(arrival_rates: Sequence[float], mu: float = 1.0) -> int:
    """Smallest UAV count whose feasibility set is nonempty: ceil of total
    demand, and 1 for all-zero rates (a collector is still deployed)."""
    rates = _check_rates(arrival_rates)
    if not mu > 0:
        raise ValueError(f"mu must be > 0, got {mu}")
    total = float(rates.sum()) / mu
    u = max(1, math.ceil(total - _FEAS_EPS))
    # the ceil already matches the greedy fill's feasibility rule; keep the
    # search form so the two can never drift apart on float edge cases
    while find_dwell(rates, u, mu) is None:
        u += 1
    return u


def verify_plan(plan: StabilityPlan, arrival_rates: Sequence[float], mu: float = 1.0) -> bool:
    """Check all feasibility constraints within 1e-9: nonnegative entries,
    per-UAV budgets <= 1, and mu * total dwell >= arrival rate per CH."""
    rates = _check_rates(arrival_rates)
    d = plan.dwell.entries
    if d.shape != (plan.uav_count, rates.size):
        return False
    if np.any(d < -_FEAS_EPS):
        return False
    if np.any(d.sum(axis=1) > 1 + _FEAS_EPS):
        return False
    return bool(np.all(mu * d.sum(axis=0) >= rates - _FEAS_EPS))


def write_plan_csv(plan: StabilityPlan, out: IO[str]) -> None:
    """Emit `uav_id,ch_id,dwell_fraction` rows (zeros omitted)."""
    out.write("uav_id,ch_id,dwell_fraction\n")
    d = plan.dwell.entries
    for u in range(d.shape[0]):
        for g in range(d.shape[1]):
            if d[u, g] > 0:
                out.write(f"{u},{g},{d[u, g]:.9g}\n")
