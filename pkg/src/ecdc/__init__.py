"""Profit analysis and optimal wake/sleep control of a two-group cluster.

A cluster with ``m1`` always-on servers, ``m2`` sleep-capable servers and
an ``m3``-slot buffer is modeled as a finite continuous-time Markov chain
whose transitions depend on an asynchronous control policy (a setup rule
for waking servers, a sleep rule for closing them).  The package computes
stationary laws, long-run average profits, performance potentials,
realization factors and critical service prices, and finds optimal
policies by exhaustive enumeration, threshold search and Monte Carlo
cross-validation.
"""

from .errors import (
    NumericalError,
    PolicySpaceTooLarge,
    StateNotFoundError,
    ValidationError,
)
from .generator import (
    GeneratorMatrix,
    GeneratorReport,
    build_generator,
    setup_rates,
    sleep_rates,
    verify_generator,
)
from .model import (
    ModelParams,
    Policy,
    State,
    StateSpace,
    build_state_space,
    enumerate_policies,
    policy_space_size,
    random_policy,
    state_count,
    state_index,
    validate_policy,
)
from .optimizer import (
    BangBangReport,
    OptimizationReport,
    ThresholdPolicy,
    bang_bang_check,
    case_policy,
    closed_form_profit,
    enumerate_optimal,
    evaluate_policy,
    monotonicity_report,
    threshold_policy,
    threshold_search,
)
from .potential import (
    AffinePotential,
    CriticalPrices,
    PotentialSolution,
    affine_decomposition,
    critical_price_setup,
    critical_price_sleep,
    critical_prices,
    performance_difference,
    realization_factor,
    reduced_generator,
    setup_factor,
    sleep_factor,
    solve_potential,
)
from .reward import average_profit, profit_coefficients, reward_vector, state_reward
from .sim import SimResult, simulate
from .stationary import (
    RGFactorization,
    rg_factorize,
    stationary_direct,
    stationary_rg,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
