import numpy as np
import pytest

from ecdc import ModelParams, random_policy


def make_params(m1=1, m2=2, m3=2, **overrides) -> ModelParams:
    """A representative, strictly-positive parameter set."""
    base = dict(
        lam=1.3, mu1=1.0, mu2=0.7, m1=m1, m2=m2, m3=m3,
        P1W=1.0, P2W=0.8, P2S=0.2, C1=1.0,
        C2_1=0.5, C2_2=0.7, C2_3=0.3,
        C3_1=0.4, C3_2=0.3, C4=0.25, C5=2.0, R=4.0,
    )
    base.update(overrides)
    return ModelParams(**base)


def random_params(rng, m1, m2, m3, R=None) -> ModelParams:
    """Random positive parameters with all model invariants satisfied."""
    mu1 = rng.uniform(0.5, 1.8)
    mu2 = mu1 * rng.uniform(0.3, 1.0)
    P2W = rng.uniform(0.5, 1.2)
    P2S = P2W * rng.uniform(0.1, 0.8)
    C2_1 = rng.uniform(0.1, 0.8)
    return ModelParams(
        lam=rng.uniform(0.3, 2.0), mu1=mu1, mu2=mu2, m1=m1, m2=m2, m3=m3,
        P1W=rng.uniform(0.5, 1.5), P2W=P2W, P2S=P2S, C1=rng.uniform(0.5, 1.5),
        C2_1=C2_1, C2_2=C2_1 + rng.uniform(0.0, 0.6), C2_3=rng.uniform(0.1, 0.6),
        C3_1=rng.uniform(0.05, 0.8), C3_2=rng.uniform(0.05, 0.8),
        C4=rng.uniform(0.05, 0.5), C5=rng.uniform(0.2, 3.0),
        R=rng.uniform(0.0, 6.0) if R is None else R,
    )


# The instance pinned for the critical-price and case-structure criteria:
# wake costs dominate waiting costs, so the all-sleep corner policy is
# genuinely optimal at R = 0 and the wake-to-match corner above R_H.
def pinned_case_params(R=1.0) -> ModelParams:
    return ModelParams(
        lam=0.8, mu1=1.0, mu2=0.8, m1=1, m2=2, m3=2,
        P1W=1.0, P2W=0.9, P2S=0.2, C1=1.0,
        C2_1=0.3, C2_2=0.45, C2_3=0.1,
        C3_1=1.0, C3_2=0.6, C4=0.2, C5=0.2, R=R,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def draw_policy(params, rng, ergodic=False):
    return random_policy(params, rng, full_activation=ergodic)
