"""Stationary analysis: two solvers, the profit, and its price line.

The long-run average profit is the stationary expectation of the per-state
profit rate and is exactly affine in the service price R.
"""

import numpy as np

from ecdc import (
    ModelParams,
    Policy,
    average_profit,
    build_generator,
    profit_coefficients,
    reward_vector,
    rg_factorize,
    stationary_direct,
    stationary_rg,
)

params = ModelParams(
    lam=1.3, mu1=1.0, mu2=0.7, m1=2, m2=2, m3=3,
    P1W=1.0, P2W=0.8, P2S=0.2, C1=1.0,
    C2_1=0.5, C2_2=0.7, C2_3=0.3,
    C3_1=0.4, C3_2=0.3, C4=0.25, C5=2.0, R=4.0,
)
policy = Policy(setup=(1, 2, 2), sleep=((1, 1, 1), (0, 0)))

gen = build_generator(params, policy)
pi = stationary_direct(gen)
fact = rg_factorize(gen)
pi_rg = stationary_rg(gen, fact)

print("stationary vector (direct solve):")
for s, mass in zip(gen.space.states, pi):
    print(f"  {s.triple}: {mass:.5f}")
print(f"max |direct - RG| = {np.abs(pi - pi_rg).max():.2e}")
print(f"factorization reconstruction error = "
      f"{np.abs(fact.reconstruct() - gen.Q).max():.2e}")

f = reward_vector(params, policy, gen.space)
eta = average_profit(pi, f)
D, F = profit_coefficients(params, policy, pi)
print(f"\nprofit at R={params.R}: {eta:.4f}")
print(f"price line: eta(R) = {D:.4f} * R - {F:.4f}")
print("checks:", ", ".join(
    f"eta({R:.0f})={R * D - F:+.4f}" for R in (0.0, 2.0, 4.0, 8.0)
))
