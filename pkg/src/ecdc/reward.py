"""State-and-policy profit rates and the long-run average profit.

The profit rate of a state is revenue from the current service throughput
minus power, holding, wake, transfer and loss costs.  It is affine in the
service price R: ``f = R * A - B`` where A is the per-state throughput and
B the per-state running cost.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .model import ModelParams, Policy, StateSpace, build_state_space


def state_reward(params: ModelParams, policy: Policy, state) -> float:
    """Profit rate of one state under the policy."""
    p = params
    n1, n2, n3 = state.triple if hasattr(state, "triple") else tuple(state)
    if n2 == 0 and n3 == 0:
        return (
            p.R * n1 * p.mu1
            - (p.m1 * p.P1W + p.m2 * p.P2S) * p.C1
            - n1 * p.C2_1
        )
    if n2 == 0:
        w = policy.setup_at(n3)
        lost = p.lam * p.C5 if n3 == p.m3 else 0.0
        return (
            p.R * p.m1 * p.mu1
            - (p.m1 * p.P1W + w * p.P2W + (p.m2 - w) * p.P2S) * p.C1
            - (p.m1 * p.C2_1 + n3 * p.C2_3)
            - w * p.C3_1
            - lost
        )
    if n2 + n3 <= p.m3:
        asleep = policy.sleep_at(n2, n3)
        working = p.m2 - asleep
        transfer_back = (n2 - working) * p.C3_2
        to_group1 = p.m1 * p.mu1 * p.C4 if n3 == 0 else 0.0
        lost = p.lam * p.C5 if n2 + n3 == p.m3 else 0.0
        return (
            p.R * (p.m1 * p.mu1 + working * p.mu2)
            - (p.m1 * p.P1W + asleep * p.P2S + working * p.P2W) * p.C1
            - (p.m1 * p.C2_1 + n2 * p.C2_2 + n3 * p.C2_3)
            - transfer_back
            - to_group1
            - lost
        )
    lost = p.lam * p.C5 if n3 == p.m3 else 0.0
    return (
        p.R * (p.m1 * p.mu1 + p.m2 * p.mu2)
        - (p.m1 * p.P1W + p.m2 * p.P2W) * p.C1
        - (p.m1 * p.C2_1 + p.m2 * p.C2_2 + n3 * p.C2_3)
        - p.m1 * p.mu1 * p.C4
        - lost
    )


def reward_vector(
    params: ModelParams, policy: Policy, space: StateSpace | None = None
) -> np.ndarray:
    """Profit-rate vector over the state space order."""
    if space is None:
        space = build_state_space(params)
    return np.array([state_reward(params, policy, s) for s in space.states])


def throughput_vector(
    params: ModelParams, policy: Policy, space: StateSpace | None = None
) -> np.ndarray:
    """Per-state service throughput A, the slope of the reward in R."""
    if space is None:
        space = build_state_space(params)
    out = np.empty(space.size)
    for i, s in enumerate(space.states):
        if s.level == 0:
            out[i] = s.n1 * params.mu1
        elif s.level == 1:
            out[i] = params.m1 * params.mu1
        elif s.level <= params.m2 + 1:
            working = params.m2 - policy.sleep_at(s.n2, s.n3)
            out[i] = params.m1 * params.mu1 + working * params.mu2
        else:
            out[i] = params.m1 * params.mu1 + params.m2 * params.mu2
    return out


def average_profit(pi: np.ndarray, f: np.ndarray) -> float:
    """Long-run average profit, the stationary expectation of the rate."""
    pi = np.asarray(pi)
    f = np.asarray(f)
    if pi.shape != f.shape:
        raise ValidationError(
            f"dimension mismatch: pi has shape {pi.shape}, f has shape {f.shape}"
        )
    return float(pi @ f)


def profit_coefficients(
    params: ModelParams, policy: Policy, pi: np.ndarray
) -> tuple[float, float]:
    """Coefficients (D, F) of the affine profit law eta(R) = R*D - F.

    D is the stationary throughput, F the stationary running cost; both are
    independent of R for a fixed policy.
    """
    space = build_state_space(params)
    A = throughput_vector(params, policy, space)
    B = -reward_vector(params.with_price(0.0), policy, space)
    return float(pi @ A), float(pi @ B)
