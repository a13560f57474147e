"""Potentials, single-entry factors, and critical service prices.

The potential vector ranks states by their long-run contribution; the
difference of two potentials (a realization factor) prices a forced state
displacement.  The composite wake/sleep factors price a single policy-entry
change exactly; each is affine in R, and its root is the price at which
that change flips from harmful to helpful.  The extremes of those roots
over the whole policy space are the critical prices.

Note the printed sanity check at the end: a handful of configurations have
factors that *decrease* with the price (waking a server into a state whose
sleep rule instantly re-closes it only postpones the next, larger wake),
so no price makes every factor nonnegative.  The companion analysis lives
in the acceptance suite.
"""

from ecdc import (
    ModelParams,
    affine_decomposition,
    critical_price_setup,
    critical_prices,
    realization_factor,
    setup_factor,
    solve_potential,
    build_state_space,
)
from ecdc.optimizer import case_policy

params = ModelParams(
    lam=0.8, mu1=1.0, mu2=0.8, m1=1, m2=2, m3=2,
    P1W=1.0, P2W=0.9, P2S=0.2, C1=1.0,
    C2_1=0.3, C2_2=0.45, C2_3=0.1,
    C3_1=1.0, C3_2=0.6, C4=0.2, C5=0.2, R=2.0,
)
space = build_state_space(params)
policy = case_policy(params, "high")

sol = solve_potential(params, policy, None)
print(f"profit {sol.eta:.4f}, Poisson residual {sol.residual:.2e}")
print("potentials (anchored at the empty state):")
for s, g in zip(space.states, sol.g):
    print(f"  g{s.triple} = {g:+.4f}")

a, b = (1, 0, 2), (1, 2, 0)
print(f"\nrealization factor g{b} - g{a} = "
      f"{realization_factor(space, sol.g, a, b):+.4f}")

aff = affine_decomposition(params, policy)
print("\nwake factor for 'wake 1 instead of 0' at (1,0,1), as R varies:")
for R in (0.0, 2.0, 5.0, 10.0):
    val = setup_factor(params.with_price(R), policy, aff.g_at(R), 1, 1, 0)
    print(f"  R={R:4.1f}: {val:+.4f}")
root = critical_price_setup(params, policy, 1, 1, 0, aff)
print(f"  crosses zero at R = {root:.4f}")

crit = critical_prices(params, scope="full")
print(f"\ncritical prices over all {crit.n_policies} policies:")
for key, value in crit.to_dict().items():
    if key != "n_policies":
        print(f"  {key} = {value:.4f}")
print("(R_L < 0 records that some factor roots are negative: a few entry")
print(" changes keep one sign at every admissible price)")
