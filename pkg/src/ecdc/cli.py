"""Command line front end: config ingestion, orchestration, emission.

Run as ``python -m ecdc <subcommand> ...``.  Every subcommand reads the
model from a JSON config whose keys are exactly the parameter names
(``lambda``, ``mu1``, ..., ``R``); unknown keys are rejected.  Results are
emitted as JSON (CSV for ``sweep``) to stdout or ``--output``.  Exit codes:
0 success, 1 validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import NumericalError, ValidationError
from .generator import build_generator, verify_generator
from .model import ModelParams, Policy, validate_policy
from .optimizer import (
    bang_bang_check,
    enumerate_optimal,
    monotonicity_report,
    threshold_policy,
    threshold_search,
)
from .potential import critical_prices, solve_potential
from .reward import reward_vector
from .sim import simulate
from .stationary import stationary_direct

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2


def _workers() -> int:
    raw = os.environ.get("ECDC_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValidationError(f"ECDC_THREADS must be an integer, got {raw!r}") from None


def _load_params(path: str) -> ModelParams:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError("config must be a JSON object")
    return ModelParams.from_dict(data)


def _resolve_policy(params: ModelParams, args) -> Policy:
    if getattr(args, "theta", None) is not None:
        theta1, theta2 = args.theta
        return threshold_policy(params, theta1, theta2).policy
    if getattr(args, "policy", None) is not None:
        try:
            literal = json.loads(args.policy)
            policy = Policy(
                tuple(int(x) for x in literal["setup"]),
                tuple(tuple(int(x) for x in row) for row in literal["sleep"]),
            )
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValidationError(f"bad --policy literal: {exc}") from exc
        validate_policy(params, policy)
        return policy
    raise ValidationError("give a policy via --theta THETA1 THETA2 or --policy JSON")


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _emit_json(obj, path: str | None) -> None:
    _emit(json.dumps(obj, indent=2, sort_keys=True), path)


def _policy_dict(policy: Policy) -> dict:
    return {"setup": list(policy.setup), "sleep": [list(r) for r in policy.sleep]}


def _cmd_validate(args) -> None:
    params = _load_params(args.config)
    out = {"params": params.to_dict(), "valid": True}
    if args.theta is not None or args.policy is not None:
        policy = _resolve_policy(params, args)
        out["policy"] = _policy_dict(policy)
        report = verify_generator(params, policy, build_generator(params, policy))
        out["generator"] = report.to_dict()
    _emit_json(out, args.output)


def _cmd_solve(args) -> None:
    params = _load_params(args.config)
    policy = _resolve_policy(params, args)
    gen = build_generator(params, policy)
    pi = stationary_direct(gen)
    f = reward_vector(params, policy, gen.space)
    sol = solve_potential(params, policy, gen, pi, f)
    out = {
        "params": params.to_dict(),
        "policy": _policy_dict(policy),
        "states": [list(s.triple) for s in gen.space.states],
        "eta": sol.eta,
        "pi": pi.tolist(),
        "g": sol.g.tolist(),
        "residuals": {
            "poisson": sol.residual,
            "stationary": float(abs(pi @ gen.Q).max()),
        },
    }
    _emit_json(out, args.output)


def _cmd_enumerate(args) -> None:
    params = _load_params(args.config)
    report = enumerate_optimal(params, cap=args.cap, workers=_workers())
    _emit_json(report.to_dict(), args.output)


def _cmd_threshold_search(args) -> None:
    params = _load_params(args.config)
    theta1, theta2, eta = threshold_search(params)
    out = {
        "theta1": theta1,
        "theta2": theta2,
        "eta": eta,
        "policy": _policy_dict(threshold_policy(params, theta1, theta2).policy),
    }
    _emit_json(out, args.output)


def _cmd_bang_bang(args) -> None:
    params = _load_params(args.config)
    report = bang_bang_check(params, cap=args.cap, workers=_workers())
    _emit_json(report.to_dict(), args.output)


def _cmd_monotonicity(args) -> None:
    params = _load_params(args.config)
    regime = args.regime
    if regime == "auto":
        crit = critical_prices(
            params, scope=args.scope, sample_size=args.samples, seed=args.seed,
            cap=args.cap, workers=_workers(),
        )
        if params.R >= crit.R_H:
            regime = "high"
        elif params.R <= crit.R_L:
            regime = "low"
        else:
            regime = "mid"
    report = monotonicity_report(params, regime)
    _emit_json(report.to_dict(), args.output)


def _cmd_critical_prices(args) -> None:
    params = _load_params(args.config)
    crit = critical_prices(
        params, scope=args.scope, sample_size=args.samples, seed=args.seed,
        cap=args.cap, workers=_workers(),
    )
    _emit_json(crit.to_dict(), args.output)


def _cmd_simulate(args) -> None:
    params = _load_params(args.config)
    policy = _resolve_policy(params, args)
    result = simulate(params, policy, horizon=args.horizon, seed=args.seed, reps=args.reps)
    _emit_json(result.to_dict(), args.output)


def _cmd_sweep(args) -> None:
    params = _load_params(args.config)
    if args.steps < 2:
        raise ValidationError("sweep needs at least 2 steps")
    name = args.param
    base = params.to_dict()
    if name not in base:
        raise ValidationError(f"unknown sweep parameter {name!r}")
    workers = _workers()
    lines = [f"{name},eta_best,theta1_star,theta2_star,gap"]
    for k in range(args.steps):
        value = args.start + (args.stop - args.start) * k / (args.steps - 1)
        data = dict(base)
        data[name] = value
        point = ModelParams.from_dict(data)
        report = enumerate_optimal(point, cap=args.cap, workers=workers)
        t1, t2, _ = report.threshold_best
        lines.append(f"{value!r},{report.best_eta!r},{t1},{t2},{report.gap!r}")
    _emit("\n".join(lines) + "\n", args.output)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ecdc",
        description="Profit analysis and policy optimization for the two-group cluster model",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, policy_opts=False, scope_opts=False):
        p.add_argument("--config", required=True, help="JSON file with model parameters")
        p.add_argument("--output", default=None, help="output path (default stdout)")
        p.add_argument("--cap", type=int, default=10_000_000, help="enumeration cap")
        if policy_opts:
            p.add_argument("--theta", type=int, nargs=2, metavar=("THETA1", "THETA2"))
            p.add_argument("--policy", help='policy literal {"setup": [...], "sleep": [[...], ...]}')
        if scope_opts:
            p.add_argument("--scope", choices=["full", "sampled"], default="full")
            p.add_argument("--samples", type=int, default=None)
            p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("validate", help="validate a config (and optional policy)")
    add_common(p, policy_opts=True)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("solve", help="stationary law, profit and potentials of one policy")
    add_common(p, policy_opts=True)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("enumerate", help="exhaustive optimal-policy search")
    add_common(p)
    p.set_defaults(func=_cmd_enumerate)

    p = sub.add_parser("threshold-search", help="best threshold pair on the grid")
    add_common(p)
    p.set_defaults(func=_cmd_threshold_search)

    p = sub.add_parser("bang-bang", help="extremality check of the enumerated optimum")
    add_common(p)
    p.set_defaults(func=_cmd_bang_bang)

    p = sub.add_parser("monotonicity", help="per-entry profit sweeps against the price regime")
    add_common(p, scope_opts=True)
    p.add_argument("--regime", choices=["high", "low", "mid", "auto"], default="auto")
    p.set_defaults(func=_cmd_monotonicity)

    p = sub.add_parser("critical-prices", help="extremal factor roots over a policy scope")
    add_common(p, scope_opts=True)
    p.set_defaults(func=_cmd_critical_prices)

    p = sub.add_parser("simulate", help="Monte Carlo profit estimate for one policy")
    add_common(p, policy_opts=True)
    p.add_argument("--horizon", type=float, default=1e5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=8)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="CSV sweep of the enumerated optimum over one parameter")
    add_common(p)
    p.add_argument("--param", required=True, help="parameter to sweep (e.g. R)")
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.set_defaults(func=_cmd_sweep)

    return parser


def run(argv=None) -> int:
    """Parse arguments, run one subcommand, map errors to exit codes."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_VALIDATION
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK
