import numpy as np
import pytest

from conftest import draw_policy, make_params
from ecdc import (
    ValidationError,
    build_generator,
    evaluate_policy,
    simulate,
    stationary_direct,
)


def test_zero_reward_gives_exact_zero(rng):
    p = make_params(1, 1, 1, C1=0.0, C2_1=0.0, C2_2=0.0, C2_3=0.0,
                    C3_1=0.0, C3_2=0.0, C4=0.0, C5=0.0, R=0.0)
    d = draw_policy(p, rng, ergodic=True)
    res = simulate(p, d, horizon=500.0, seed=1, reps=2)
    assert res.eta_hat == 0.0


def test_determinism_for_fixed_seed(rng):
    p = make_params(1, 1, 2)
    d = draw_policy(p, rng, ergodic=True)
    a = simulate(p, d, horizon=2000.0, seed=77, reps=3)
    b = simulate(p, d, horizon=2000.0, seed=77, reps=3)
    assert a.eta_hat == b.eta_hat
    assert a.stderr == b.stderr
    assert a.jumps == b.jumps
    c = simulate(p, d, horizon=2000.0, seed=78, reps=3)
    assert c.eta_hat != a.eta_hat
    assert a.rng == "pcg64"
    assert a.to_dict()["seed"] == 77


def test_concordance_with_analytic_profit(rng):
    p = make_params(1, 1, 1, lam=1.0, mu1=1.0, mu2=1.0)
    d = draw_policy(p, rng, ergodic=True)
    eta = evaluate_policy(p, d)
    res = simulate(p, d, horizon=1e5, seed=11, reps=8)
    assert abs(res.eta_hat - eta) <= 3.0 * res.stderr
    assert res.stderr > 0.0
    assert res.jumps > 0
    assert res.horizon == 1e5


def test_stderr_shrinks_like_root_reps(rng):
    p = make_params(1, 1, 2)
    d = draw_policy(p, rng, ergodic=True)
    ratios = []
    for seed in range(5):
        small = simulate(p, d, horizon=4000.0, seed=seed, reps=4)
        big = simulate(p, d, horizon=4000.0, seed=seed + 100, reps=16)
        ratios.append(small.stderr / big.stderr)
    assert 1.3 <= np.median(ratios) <= 1.7


def test_occupancy_converges_to_stationary(rng):
    p = make_params(1, 2, 2)
    d = draw_policy(p, rng, ergodic=True)
    gen = build_generator(p, d)
    res = simulate(p, d, horizon=1e5, seed=5, reps=1, gen=gen, track_occupancy=True)
    pi = stationary_direct(gen)
    tv = 0.5 * np.abs(res.occupancy - pi).sum()
    assert tv <= 0.02
    assert res.stderr > 0.0  # single replication still reports batch stderr


def test_single_rep_batches(rng):
    p = make_params(1, 1, 1)
    d = draw_policy(p, rng, ergodic=True)
    res = simulate(p, d, horizon=5000.0, seed=9, reps=1)
    assert res.reps == 1
    assert res.stderr > 0.0


def test_validation():
    p = make_params(1, 1, 1)
    d = draw_policy(p, np.random.default_rng(0), ergodic=True)
    with pytest.raises(ValidationError):
        simulate(p, d, horizon=0.0, seed=0)
    with pytest.raises(ValidationError):
        simulate(p, d, horizon=10.0, seed=0, reps=0)
