"""Optimal policies: exhaustive search, thresholds, and structure checks.

Sweeps the service price and compares the global optimum with the best
two-parameter threshold policy.  At extreme prices the optimum collapses
to the corner policies (never wake / wake to match) and the
threshold family is exactly optimal; in between it may or may not be.
"""

from ecdc import (
    ModelParams,
    bang_bang_check,
    case_policy,
    critical_prices,
    enumerate_optimal,
    monotonicity_report,
)

params = ModelParams(
    lam=0.8, mu1=1.0, mu2=0.8, m1=1, m2=2, m3=2,
    P1W=1.0, P2W=0.9, P2S=0.2, C1=1.0,
    C2_1=0.3, C2_2=0.45, C2_3=0.1,
    C3_1=1.0, C3_2=0.6, C4=0.2, C5=0.2, R=1.0,
)

crit = critical_prices(params, scope="full")
print(f"critical prices: R_L={crit.R_L:.2f}, R_H={crit.R_H:.2f}")

print(f"\n{'R':>8} {'eta*':>10} {'theta*':>8} {'gap':>10}  optimal policy")
for R in (0.0, 0.5, 1.0, 2.0, 4.0, 8.0, crit.R_H + 1.0):
    rep = enumerate_optimal(params.with_price(R))
    t1, t2, _ = rep.threshold_best
    print(f"{R:8.2f} {rep.best_eta:10.4f} {f'({t1},{t2})':>8} {rep.gap:10.2e}  "
          f"setup={rep.best_policy.setup} sleep={rep.best_policy.sleep}")

p_hi = params.with_price(crit.R_H + 1.0)
print(f"\nhigh-price optimum equals the wake-to-match corner: "
      f"{enumerate_optimal(p_hi).best_policy == case_policy(p_hi, 'high')}")

bb = bang_bang_check(p_hi)
print(f"bang-bang check at high price: ok={bb.ok}")

mono = monotonicity_report(p_hi, "high")
print(f"monotonicity report (high regime): ok={mono.ok}")
for sweep in mono.sweeps[:4]:
    print(f"  entry {sweep.coord}: {sweep.direction}  "
          + " -> ".join(f"{e:.3f}" for e in sweep.etas))
