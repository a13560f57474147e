"""Acceptance suite: one test per release criterion, one printed verdict each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the verdict lines.

Two criteria probe structural claims that the modeled chain genuinely does
not satisfy (see notes in the repository root README and the failing
assertions' messages): the uniform factor-sign claim behind criterion 7 and
the universal extremal-optimum claim behind criterion 9.  Both tests run
the stated check faithfully and report concrete counterexamples instead of
weakening the assertion.
"""

import time

import numpy as np
import pytest

from conftest import draw_policy, pinned_case_params, random_params
from ecdc import (
    affine_decomposition,
    bang_bang_check,
    build_generator,
    case_policy,
    closed_form_profit,
    critical_prices,
    enumerate_optimal,
    evaluate_policy,
    performance_difference,
    random_policy,
    reward_vector,
    rg_factorize,
    setup_factor,
    simulate,
    sleep_factor,
    solve_potential,
    stationary_direct,
    stationary_rg,
    verify_generator,
)
from ecdc.model import enumerate_policies
from ecdc.potential import setup_pairs, sleep_pairs

SIZES = [(1, 1, 1), (1, 1, 2), (2, 1, 2), (1, 2, 2), (2, 2, 3), (1, 2, 4)]


def verdict(num: int, ok: bool, text: str) -> None:
    print(f"\n[AC{num:02d}] {'PASS' if ok else 'FAIL'}: {text}")


def test_ac01_generator_soundness():
    """200 random (params, policy) draws: conservative rows, nonnegative
    off-diagonals, block pattern, and a single recurrent class (with full
    strong connectivity exactly when the policy can wake all servers)."""
    rng = np.random.default_rng(1001)
    t0 = time.time()
    ok = True
    for k in range(200):
        m1, m2, m3 = SIZES[k % len(SIZES)]
        p = random_params(rng, m1, m2, m3)
        d = random_policy(p, rng)
        gen = build_generator(p, d)
        rep = verify_generator(p, d, gen)
        ok &= rep.max_abs_row_sum <= 1e-12 * max(1.0, rep.max_abs_entry)
        ok &= rep.negative_offdiagonal_count == 0
        ok &= rep.block_pattern_ok
        ok &= rep.single_recurrent_class
        ok &= rep.strongly_connected == (d.max_wake() == p.m2)
    elapsed = time.time() - t0
    ok &= elapsed < 10.0
    verdict(1, ok, f"generator soundness over 200 draws ({elapsed:.1f}s)")
    assert ok


def test_ac02_matched_generator_pairs():
    """50 policy pairs differing only on wake entries inside the matched
    range produce bitwise-identical generators and stationary vectors."""
    rng = np.random.default_rng(1002)
    ok = True
    for k in range(50):
        m1, m2, m3 = SIZES[3 + k % 3]  # needs m2 >= 2 for a nontrivial range
        p = random_params(rng, m1, max(m2, 2), max(m3, 2))
        d = random_policy(p, rng)
        n3 = int(rng.integers(1, p.m2 + 1))
        v1, v2 = rng.choice(np.arange(n3, p.m2 + 1), size=2)
        d1, d2 = d.replace_setup(n3, int(v1)), d.replace_setup(n3, int(v2))
        # condition (b): entries above the group size stay equal, which the
        # shared tail of d already guarantees
        g1, g2 = build_generator(p, d1), build_generator(p, d2)
        ok &= np.array_equal(g1.Q, g2.Q)
        ok &= np.abs(stationary_direct(g1) - stationary_direct(g2)).max() <= 1e-12
    verdict(2, ok, "matched-pair generators and stationary vectors identical")
    assert ok


def test_ac03_stationary_cross_validation():
    rng = np.random.default_rng(1003)
    worst_pi, worst_rec = 0.0, 0.0
    for (m1, m2, m3) in SIZES:
        for ergodic in (False, True):
            p = random_params(rng, m1, m2, m3)
            d = draw_policy(p, rng, ergodic=ergodic)
            gen = build_generator(p, d)
            fact = rg_factorize(gen)
            diff = np.abs(stationary_rg(gen, fact) - stationary_direct(gen)).max()
            rec = np.abs(fact.reconstruct() - gen.Q).max() / max(1.0, np.abs(gen.Q).max())
            worst_pi, worst_rec = max(worst_pi, diff), max(worst_rec, rec)
    ok = worst_pi <= 1e-8 and worst_rec <= 1e-10
    verdict(3, ok, f"RG vs direct max diff {worst_pi:.2e}; reconstruction {worst_rec:.2e}")
    assert ok


def test_ac04_poisson_equation():
    rng = np.random.default_rng(1004)
    worst = 0.0
    ok = True
    for k in range(200):
        m1, m2, m3 = SIZES[k % len(SIZES)]
        p = random_params(rng, m1, m2, m3)
        d = random_policy(p, rng)
        gen = build_generator(p, d)
        f = reward_vector(p, d, gen.space)
        sol = solve_potential(p, d, gen, f=f)
        ok &= sol.g[0] == 1.0
        worst = max(worst, sol.residual / max(1.0, np.abs(f).max()))
    ok &= worst <= 1e-8
    verdict(4, ok, f"Poisson residual over 200 draws, worst {worst:.2e}")
    assert ok


def test_ac05_difference_formula():
    rng = np.random.default_rng(1005)
    worst = 0.0
    for (m1, m2, m3) in ((1, 2, 2), (2, 2, 3)):
        p = random_params(rng, m1, m2, m3)
        for _ in range(100):
            d, d_prime = random_policy(p, rng), random_policy(p, rng)
            lhs = performance_difference(p, d, d_prime)
            rhs = evaluate_policy(p, d_prime) - evaluate_policy(p, d)
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    ok = worst <= 1e-8
    verdict(5, ok, f"potential-based differences over 200 pairs, worst {worst:.2e}")
    assert ok


def test_ac06_sign_conservation():
    """Factors computed from either endpoint of a single-entry change keep
    one sign, with ratio equal to the stationary-probability ratio."""
    rng = np.random.default_rng(1006)
    p = random_params(rng, 1, 2, 3)
    space = build_generator(p, random_policy(p, rng)).space
    worst = 0.0
    ok = True
    done = 0
    while done < 100:
        d = draw_policy(p, rng, ergodic=True)
        if rng.random() < 0.5:
            n3 = int(rng.integers(1, p.m3 + 1))
            top = min(n3, p.m2)
            i1 = int(rng.integers(1, top + 1))
            i2 = int(rng.integers(0, i1))
            d_lo, d_hi = d.replace_setup(n3, i2), d.replace_setup(n3, i1)
            row = space.index((p.m1, 0, n3))
            fac_lo = setup_factor(p, d_lo, solve_potential(p, d_lo).g, n3, i1, i2, space)
            fac_hi = setup_factor(p, d_hi, solve_potential(p, d_hi).g, n3, i1, i2, space)
        else:
            n2 = int(rng.integers(1, p.m2 + 1))
            n3 = int(rng.integers(0, p.m3 - n2 + 1))
            j1 = int(rng.integers(1, n2 + 1))
            j2 = int(rng.integers(0, j1))
            d_lo = d.replace_sleep(n2, n3, p.m2 - j2)
            d_hi = d.replace_sleep(n2, n3, p.m2 - j1)
            row = space.index((p.m1, n2, n3))
            fac_lo = sleep_factor(p, d_lo, solve_potential(p, d_lo).g, n2, n3, j1, j2, space)
            fac_hi = sleep_factor(p, d_hi, solve_potential(p, d_hi).g, n2, n3, j1, j2, space)
        pi_lo = stationary_direct(build_generator(p, d_lo))
        pi_hi = stationary_direct(build_generator(p, d_hi))
        if abs(fac_hi) < 1e-12 or pi_hi[row] < 1e-12:
            continue
        ratio = fac_lo / fac_hi
        expected = pi_lo[row] / pi_hi[row]
        ok &= ratio > 0.0
        worst = max(worst, abs(ratio - expected) / max(1.0, abs(expected)))
        done += 1
    ok &= worst <= 1e-8
    verdict(6, ok, f"sign conservation over 100 perturbations, worst {worst:.2e}")
    assert ok


def test_ac07_factor_signs_at_critical_prices():
    """Above R_H all factors should be nonnegative and below R_L
    nonpositive, over the full policy scope on (m1=1, m2=2, m3=2).

    The modeled chain violates this: waking servers into a state whose
    sleep entry immediately re-closes them postpones the next (larger)
    wake, so some factors decrease with the price and are strictly
    negative at and above R_H.  The check below runs the criterion as
    stated and reports the extremal counterexample.
    """
    p0 = pinned_case_params()
    crit = critical_prices(p0, scope="full")
    policies = list(enumerate_policies(p0))

    def scan(R, sign):
        p = p0.with_price(R)
        worst_val, worst_at = np.inf, None
        for d in policies:
            aff = affine_decomposition(p, d)
            g = aff.g_at(R)
            for pair in setup_pairs(p):
                v = sign * setup_factor(p, d, g, *pair)
                if v < worst_val:
                    worst_val, worst_at = v, ("setup", pair, d)
            for pair in sleep_pairs(p):
                v = sign * sleep_factor(p, d, g, *pair)
                if v < worst_val:
                    worst_val, worst_at = v, ("sleep", pair, d)
        return worst_val, worst_at

    failures = []
    for R in (crit.R_H, crit.R_H + 1.0, 2.0 * crit.R_H):
        worst, where = scan(R, +1.0)
        if worst < -1e-9:
            failures.append(f"R={R:.6g}: factor {-worst:.4g} below zero at {where}")
    low_samples = [r for r in (0.0, crit.R_L / 2.0, crit.R_L) if r >= 0.0]
    if not low_samples:
        failures.append(
            f"low side unsampleable: R_L={crit.R_L:.6g} < 0 (negative factor roots)"
        )
    for R in low_samples:
        worst, where = scan(R, -1.0)
        if worst < -1e-9:
            failures.append(f"R={R:.6g}: factor {-worst:.4g} above zero at {where}")

    ok = not failures
    verdict(7, ok, "uniform factor signs at critical prices"
            + ("" if ok else f" ({len(failures)} violations)"))
    assert ok, (
        "uniform factor-sign claim fails on the modeled chain:\n  "
        + "\n  ".join(str(f) for f in failures)
        + "\nSee README (acceptance notes): factors whose price-slope is "
        "negative exist for every admissible reading of the transition "
        "rates, so no price threshold makes every factor one-signed."
    )


def test_ac08_flat_region_linear_law():
    rng = np.random.default_rng(1008)
    worst = 0.0
    for _ in range(10):
        p = random_params(rng, 2, 2, 3)
        d = draw_policy(p, rng)
        wake_cost = (p.P2W - p.P2S) * p.C1 + p.C3_1
        n3 = 1  # entries 1..m2 share the generator
        etas = [evaluate_policy(p, d.replace_setup(n3, v)) for v in range(n3, p.m2 + 1)]
        gen = build_generator(p, d.replace_setup(n3, n3))
        pi = stationary_direct(gen)
        expected = -pi[gen.space.index((p.m1, 0, n3))] * wake_cost
        for step in np.diff(etas):
            worst = max(worst, abs(step - expected) / max(1.0, abs(expected)))
    ok = worst <= 1e-9
    verdict(8, ok, f"flat-region profit slope, worst relative error {worst:.2e}")
    assert ok


def test_ac09_bang_bang_extremality():
    """Exhaustive optima on (m2=1, m3=2) and (m2=2, m3=2) across 20 random
    parameter sets, prices drawn across the regimes including the interior
    band.

    The modeled chain admits genuine interior optima: at low prices the
    marginal saving of the second woken server can fall below its wake
    cost while the first still pays, so the optimal wake entry is neither
    extreme.  Counterexamples are reported verbatim, as required.
    """
    rng = np.random.default_rng(1009)
    counterexamples = []
    for (m2, m3) in ((1, 2), (2, 2)):
        for _ in range(10):
            m1 = int(rng.integers(1, 3))
            p0 = random_params(rng, m1, m2, m3)
            crit = critical_prices(p0, scope="full")
            lo = max(0.0, crit.R_L)
            hi = max(crit.R_H, lo + 1.0)
            draws = (lo / 2.0, float(rng.uniform(lo, hi)), hi + 1.0)
            for R in draws:
                p = p0.with_price(R)
                rep = bang_bang_check(p)
                if not rep.ok:
                    counterexamples.append(
                        {
                            "params": p.to_dict(),
                            "best_policy": {
                                "setup": list(rep.best_policy.setup),
                                "sleep": [list(r) for r in rep.best_policy.sleep],
                            },
                            "best_eta": rep.best_eta,
                            "violations": [
                                {"coord": list(c), "entry": e, "extremes": list(x)}
                                for c, e, x in rep.violations
                            ],
                        }
                    )
    ok = not counterexamples
    verdict(9, ok, "bang-bang extremality of enumerated optima"
            + ("" if ok else f" ({len(counterexamples)} counterexamples)"))
    assert ok, (
        "interior optimal decision elements found (reported verbatim):\n"
        + "\n".join(str(c) for c in counterexamples)
        + "\nSee README (acceptance notes): the extremal-optimum claim "
        "fails on the modeled chain for cost parameters where the marginal "
        "wake saving crosses the wake cost between extremes."
    )


def test_ac10_case_policies_and_thresholds():
    p0 = pinned_case_params()
    crit = critical_prices(p0, scope="full")
    checks = []

    for R in (crit.R_H, crit.R_H + 1.0, 2.0 * crit.R_H):
        p = p0.with_price(R)
        rep = enumerate_optimal(p)
        high = case_policy(p, "high")
        gen = build_generator(p, high)
        pi = stationary_direct(gen)
        eta = float(pi @ reward_vector(p, high, gen.space))
        scale = max(1.0, abs(eta))
        checks.append(rep.best_policy == high)
        checks.append(abs(closed_form_profit(p, pi, "high") - eta) <= 1e-9 * scale)
        checks.append(abs(rep.gap) <= 1e-9 * scale)

    # the low regime: the letter boundary R_L is negative here (some factor
    # roots are), so the regime's only admissible price is R = 0, where the
    # all-sleep optimum's sleep block is profit-irrelevant (nothing wakes);
    # compare the wake vector exactly and the rest at the profit level
    low_samples = [r for r in (0.0, crit.R_L / 2.0, crit.R_L) if r >= 0.0] or [0.0]
    for R in low_samples:
        p = p0.with_price(R)
        rep = enumerate_optimal(p)
        low = case_policy(p, "low")
        gen = build_generator(p, low)
        pi = stationary_direct(gen)
        eta = float(pi @ reward_vector(p, low, gen.space))
        scale = max(1.0, abs(eta))
        checks.append(rep.best_policy.setup == low.setup)
        checks.append(abs(eta - rep.best_eta) <= 1e-9 * scale)
        checks.append(abs(closed_form_profit(p, pi, "low") - eta) <= 1e-9 * scale)
        checks.append(abs(rep.gap) <= 1e-9 * scale)

    # the threshold family never beats the full space, at any price
    for R in (0.0, 1.0, 3.0, 0.5 * crit.R_H, crit.R_H + 1.0):
        rep = enumerate_optimal(p0.with_price(R))
        checks.append(rep.gap >= -1e-9)

    ok = all(checks)
    verdict(10, ok, "extreme-price optima, closed forms and threshold gaps")
    assert ok


def test_ac11_simulation_concordance():
    rng = np.random.default_rng(1011)
    t0 = time.time()
    triples = []
    for k in range(30):
        m1, m2, m3 = ((1, 1, 1), (1, 1, 2), (1, 2, 2))[k % 3]
        p = random_params(rng, m1, m2, m3)
        d = draw_policy(p, rng, ergodic=True)
        seed = int(rng.integers(0, 2**31))
        triples.append((p, d, seed))
    ok = True
    worst_z = 0.0
    for (p, d, seed) in triples:
        gen = build_generator(p, d)
        pi = stationary_direct(gen)
        eta = float(pi @ reward_vector(p, d, gen.space))
        res = simulate(p, d, horizon=1e5, seed=seed, reps=10, gen=gen)
        z = abs(res.eta_hat - eta) / res.stderr
        worst_z = max(worst_z, z)
        ok &= z <= 3.0
    elapsed = time.time() - t0
    ok &= elapsed < 120.0
    verdict(11, ok, f"simulation vs analytic profit, worst |z|={worst_z:.2f} ({elapsed:.0f}s)")
    assert ok
