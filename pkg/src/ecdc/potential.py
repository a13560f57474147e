"""Performance potentials, realization factors, and critical prices.

The potential vector g solves the Poisson equation ``Q g = eta e - f``
anchored at ``g(0,0,0) = 1``.  Differences of potentials (realization
factors) measure the long-run profit effect of displacing the system
between two states; the composite factors below measure the effect of
changing one policy entry, oriented so that a positive value means
"keeping more group-2 servers working at this state raises the long-run
profit".  Each composite factor is the exact single-row difference
functional of the assembled generator and reward, so

    eta(changed) - eta(base) = pi_changed(row) * factor(base)

holds to solver precision, and the factor is affine in the service price R.
Critical prices are the R-roots of these factors, extremized over policies
and entry pairs.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .generator import GeneratorMatrix, build_generator, setup_move, sleep_move
from .model import (
    DEFAULT_ENUMERATION_CAP,
    ModelParams,
    Policy,
    StateSpace,
    build_state_space,
    enumerate_policies,
    random_policy,
)
from .reward import average_profit, reward_vector, state_reward
from .stationary import stationary_direct


@dataclass(frozen=True)
class PotentialSolution:
    """Anchored Poisson solution: potentials, profit, and residual."""

    g: np.ndarray
    eta: float
    residual: float


@dataclass(frozen=True)
class AffinePotential:
    """Coefficients of the price-affine potential g(R) = R*W - V.

    The anchor g(0,0,0) = 1 holds at every price, so W starts at 0 and V
    at -1.  ``check_error`` is the relative reconstruction error observed
    at a third price.
    """

    W: np.ndarray
    V: np.ndarray
    check_error: float

    def g_at(self, R: float) -> np.ndarray:
        return R * self.W - self.V


def reduced_generator(gen: GeneratorMatrix) -> np.ndarray:
    """Generator with the first row and column removed; always invertible
    here because every state reaches the empty state."""
    Qt = gen.Q[1:, 1:]
    sign, _ = np.linalg.slogdet(Qt)
    if sign == 0:
        raise NumericalError("reduced generator is singular")
    return Qt


def solve_potential(
    params: ModelParams,
    policy: Policy,
    gen: GeneratorMatrix | None = None,
    pi: np.ndarray | None = None,
    f: np.ndarray | None = None,
) -> PotentialSolution:
    """Solve the anchored Poisson equation for one policy.

    Fixing g(0,0,0) = 1 removes the additive free constant; the remaining
    entries solve the reduced system, whose right-hand side picks up the
    rate mu1 flowing from (1,0,0) back to the anchored state.
    """
    if gen is None:
        gen = build_generator(params, policy)
    if pi is None:
        pi = stationary_direct(gen)
    if f is None:
        f = reward_vector(params, policy, gen.space)
    eta = average_profit(pi, f)
    h = (f - eta)[1:]
    rhs = h.copy()
    rhs[0] += params.mu1  # flow into the anchored state, valued at g(0,0,0) = 1
    Qt = gen.Q[1:, 1:]
    try:
        phi = np.linalg.solve(-Qt, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Poisson solve failed: {exc}") from exc
    g = np.concatenate(([1.0], phi))
    residual = float(np.abs(gen.Q @ g - (eta - f)).max())
    return PotentialSolution(g=g, eta=eta, residual=residual)


def affine_decomposition(
    params: ModelParams, policy: Policy, check_price: float = 2.0
) -> AffinePotential:
    """Split the potentials into price-linear and constant parts.

    Two full solves (R = 0 and R = 1) determine W and V; a third price
    verifies the reconstruction.
    """
    gen0 = build_generator(params.with_price(0.0), policy)
    pi = stationary_direct(gen0)
    g0 = solve_potential(params.with_price(0.0), policy, gen0, pi).g
    g1 = solve_potential(params.with_price(1.0), policy, gen0, pi).g
    W = g1 - g0
    V = -g0
    g_check = solve_potential(params.with_price(check_price), policy, gen0, pi).g
    scale = max(1.0, float(np.abs(g_check).max()))
    err = float(np.abs(check_price * W - V - g_check).max()) / scale
    if err > 1e-9:
        raise NumericalError(f"potential is not affine in R (error {err:.2e})")
    return AffinePotential(W=W, V=V, check_error=err)


def realization_factor(space: StateSpace, g: np.ndarray, n, n_prime) -> float:
    """Potential difference g(n') - g(n) between two states."""
    return float(g[space.index(n_prime)] - g[space.index(n)])


def _g_of(solution) -> np.ndarray:
    return solution.g if isinstance(solution, PotentialSolution) else np.asarray(solution)


def setup_factor(
    params: ModelParams,
    policy: Policy,
    g,
    n3: int,
    i1: int,
    i2: int,
    space: StateSpace | None = None,
) -> float:
    """Profit effect of waking i1 instead of i2 servers at (m1, 0, n3).

    Requires 0 <= i2 < i1 <= min(n3, m2) so that both target states exist.
    Drives the single-entry performance difference exactly:
    eta(entry=i1) - eta(entry=i2) = pi_new(m1,0,n3) * setup_factor.
    """
    if space is None:
        space = build_state_space(params)
    if not (0 <= i2 < i1 <= min(n3, params.m2)):
        raise ValidationError(
            f"need 0 <= i2 < i1 <= min(n3, m2); got i1={i1}, i2={i2}, n3={n3}"
        )
    g = _g_of(g)
    row = space.index((params.m1, 0, n3))

    def shift(entry: int) -> float:
        move = setup_move(params, n3, entry)
        if move is None:
            return 0.0
        target, rate = move
        return rate * (g[space.index(target)] - g[row])

    df = state_reward(
        params, policy.replace_setup(n3, i1), space.states[row]
    ) - state_reward(params, policy.replace_setup(n3, i2), space.states[row])
    return shift(i1) - shift(i2) + df


def sleep_factor(
    params: ModelParams,
    policy: Policy,
    g,
    n2: int,
    n3: int,
    j1: int,
    j2: int,
    space: StateSpace | None = None,
) -> float:
    """Profit effect of keeping j1 instead of j2 servers working at
    (m1, n2, n3), i.e. of sleeping fewer servers.

    Requires 0 <= j2 < j1 <= n2.  Drives the single-entry difference
    exactly: eta(keep j1) - eta(keep j2) = pi_new(m1,n2,n3) * sleep_factor.
    """
    if space is None:
        space = build_state_space(params)
    if not (0 <= j2 < j1 <= n2):
        raise ValidationError(f"need 0 <= j2 < j1 <= n2; got j1={j1}, j2={j2}, n2={n2}")
    if not space.contains((params.m1, n2, n3)):
        raise ValidationError(f"state ({params.m1},{n2},{n3}) is not in the space")
    g = _g_of(g)
    row = space.index((params.m1, n2, n3))

    def shift(kept: int) -> float:
        move = sleep_move(params, n2, n3, params.m2 - kept)
        if move is None:
            return 0.0
        target, rate = move
        return rate * (g[space.index(target)] - g[row])

    df = state_reward(
        params, policy.replace_sleep(n2, n3, params.m2 - j1), space.states[row]
    ) - state_reward(params, policy.replace_sleep(n2, n3, params.m2 - j2), space.states[row])
    return shift(j1) - shift(j2) + df


def setup_factor_affine(
    params: ModelParams, policy: Policy, aff: AffinePotential, n3: int, i1: int, i2: int
) -> tuple[float, float]:
    """Intercept and slope of the setup factor as a function of R."""
    space = build_state_space(params)
    at0 = setup_factor(params.with_price(0.0), policy, aff.g_at(0.0), n3, i1, i2, space)
    at1 = setup_factor(params.with_price(1.0), policy, aff.g_at(1.0), n3, i1, i2, space)
    return at0, at1 - at0


def sleep_factor_affine(
    params: ModelParams,
    policy: Policy,
    aff: AffinePotential,
    n2: int,
    n3: int,
    j1: int,
    j2: int,
) -> tuple[float, float]:
    """Intercept and slope of the sleep factor as a function of R."""
    space = build_state_space(params)
    at0 = sleep_factor(params.with_price(0.0), policy, aff.g_at(0.0), n2, n3, j1, j2, space)
    at1 = sleep_factor(params.with_price(1.0), policy, aff.g_at(1.0), n2, n3, j1, j2, space)
    return at0, at1 - at0


def _root(intercept: float, slope: float) -> float | None:
    if abs(slope) <= 1e-13 * max(1.0, abs(intercept)):
        return None  # factor sign does not depend on the price for this pair
    return -intercept / slope


def critical_price_setup(
    params: ModelParams,
    policy: Policy,
    n3: int,
    i1: int,
    i2: int,
    aff: AffinePotential | None = None,
) -> float | None:
    """Price at which the setup factor for this entry pair crosses zero.

    Returns None when the factor does not depend on the price (degenerate
    denominator).
    """
    if aff is None:
        aff = affine_decomposition(params, policy)
    return _root(*setup_factor_affine(params, policy, aff, n3, i1, i2))


def critical_price_sleep(
    params: ModelParams,
    policy: Policy,
    n2: int,
    n3: int,
    j1: int,
    j2: int,
    aff: AffinePotential | None = None,
) -> float | None:
    """Price at which the sleep factor for this entry pair crosses zero."""
    if aff is None:
        aff = affine_decomposition(params, policy)
    return _root(*sleep_factor_affine(params, policy, aff, n2, n3, j1, j2))


def setup_pairs(params: ModelParams):
    """All admissible (n3, i1, i2) setup comparison pairs."""
    for n3 in range(1, params.m3 + 1):
        top = min(n3, params.m2)
        for i1 in range(1, top + 1):
            for i2 in range(0, i1):
                yield n3, i1, i2


def sleep_pairs(params: ModelParams):
    """All admissible (n2, n3, j1, j2) sleep comparison pairs."""
    for n2 in range(1, params.m2 + 1):
        for n3 in range(0, params.m3 - n2 + 1):
            for j1 in range(1, n2 + 1):
                for j2 in range(0, j1):
                    yield n2, n3, j1, j2


@dataclass(frozen=True)
class CriticalPrices:
    """Extremal factor roots over a policy scope.

    Above R_H every setup and sleep factor is nonnegative (waking always
    helps); below R_L every factor is nonpositive (sleeping always helps).
    R_H_W is floored at zero.
    """

    R_H_W: float
    R_L_W: float
    R_H_S: float
    R_L_S: float
    R_H: float
    R_L: float
    n_policies: int

    def to_dict(self) -> dict:
        return {
            "R_H_W": self.R_H_W,
            "R_L_W": self.R_L_W,
            "R_H_S": self.R_H_S,
            "R_L_S": self.R_L_S,
            "R_H": self.R_H,
            "R_L": self.R_L,
            "n_policies": self.n_policies,
        }


def _policy_roots(args):
    params, policy = args
    aff = affine_decomposition(params, policy)
    setup_roots = [
        r
        for pair in setup_pairs(params)
        if (r := _root(*setup_factor_affine(params, policy, aff, *pair))) is not None
    ]
    sleep_roots = [
        r
        for pair in sleep_pairs(params)
        if (r := _root(*sleep_factor_affine(params, policy, aff, *pair))) is not None
    ]
    return setup_roots, sleep_roots


def critical_prices(
    params: ModelParams,
    scope: str = "full",
    sample_size: int | None = None,
    seed: int | None = None,
    cap: int = DEFAULT_ENUMERATION_CAP,
    workers: int = 1,
) -> CriticalPrices:
    """Extremize per-pair factor roots over a policy scope.

    ``scope='full'`` walks the whole policy space (refusing above ``cap``);
    ``scope='sampled'`` draws ``sample_size`` policies with the given seed.
    """
    if scope == "full":
        policies = list(enumerate_policies(params, cap=cap))
    elif scope == "sampled":
        if not sample_size or sample_size < 1:
            raise ValidationError("sampled scope needs sample_size >= 1")
        rng = np.random.default_rng(seed)
        policies = [random_policy(params, rng) for _ in range(sample_size)]
    else:
        raise ValidationError(f"scope must be 'full' or 'sampled', got {scope!r}")

    jobs = [(params, pol) for pol in policies]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_policy_roots, jobs))
    else:
        results = [_policy_roots(job) for job in jobs]

    setup_roots = list(itertools.chain.from_iterable(r[0] for r in results))
    sleep_roots = list(itertools.chain.from_iterable(r[1] for r in results))
    if not setup_roots or not sleep_roots:
        raise NumericalError("no price-dependent factor pairs found in scope")
    r_h_w = max(0.0, max(setup_roots))
    r_l_w = min(setup_roots)
    r_h_s = max(0.0, max(sleep_roots))
    r_l_s = min(sleep_roots)
    return CriticalPrices(
        R_H_W=r_h_w,
        R_L_W=r_l_w,
        R_H_S=r_h_s,
        R_L_S=r_l_s,
        R_H=max(r_h_w, r_h_s),
        R_L=min(r_l_w, r_l_s),
        n_policies=len(policies),
    )


def performance_difference(params: ModelParams, d: Policy, d_prime: Policy) -> float:
    """Profit difference eta(d') - eta(d) through the potential identity.

    Evaluates pi(d') [ (Q(d') - Q(d)) g(d) + (f(d') - f(d)) ], which must
    match the direct subtraction of the two average profits.
    """
    gen = build_generator(params, d)
    gen_p = build_generator(params, d_prime)
    sol = solve_potential(params, d, gen)
    pi_p = stationary_direct(gen_p)
    f = reward_vector(params, d, gen.space)
    f_p = reward_vector(params, d_prime, gen.space)
    return float(pi_p @ ((gen_p.Q - gen.Q) @ sol.g + (f_p - f)))
