"""Command-line front-end.

Subcommands:

- ``derive-params``: derive transmission rates and link statistics for a
  scenario config, emitting JSON.
- ``solve``: compute the optimal access policy and its metrics at a given
  (or constraint-derived) access budget, emitting JSON.
- ``simulate``: run the slot-level simulator under a policy file, emitting
  JSON.
- ``oracle``: brute-force achievable frontier as CSV.
- ``sweep``: scheme-comparison sweep as CSV.

Config files are JSON objects mirroring the SystemParams field names, plus
an optional ``rate_policy`` of RSU_STAR (default), RSU_EQ_RSK, or EXPLICIT.
Errors exit nonzero with a one-line JSON diagnostic on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

from .channel import SystemParams, link_stats
from .experiments import (SWEEP_KINDS, Scenario, derive_rates, rows_to_csv,
                          sweep)
from .mdp import (long_term_metrics, policy_from_json_obj, policy_to_json_obj)
from .optimizer import access_rate_budget, greedy_policy_path, optimal_policy
from .oracle import enumerate_frontier, frontier_csv_rows
from .simulator import SimConfig, run

DEFAULT_MC = 10 ** 6
DEFAULT_SEED = 1234


def _load_scenario(path: str):
    with open(path) as fh:
        obj = json.load(fh)
    rate_policy = obj.pop("rate_policy", "RSU_STAR")
    # Placeholder rates keep the config small when they are to be derived.
    for key in ("rate_p", "rate_su", "rate_sk"):
        obj.setdefault(key, 1.0)
    obj.setdefault("buffer_B", obj["deadline_D"] - 1)
    obj.setdefault("eps_pu", 0.2)
    obj.setdefault("power_ratio", 1.0)
    return SystemParams.from_json_obj(obj), rate_policy


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _prepared(args):
    params, rate_policy = _load_scenario(args.config)
    params = derive_rates(params, rate_policy, args.mc_samples, args.seed)
    stats = link_stats(params, max(args.mc_samples, 10 ** 5), args.seed)
    return params, stats


def _cmd_derive_params(args) -> int:
    params, stats = _prepared(args)
    eps_w = access_rate_budget(stats, params.eps_pu, params.power_ratio)
    _emit(json.dumps({"params": asdict(params), "stats": json.loads(stats.to_json()),
                      "eps_w": eps_w}, indent=2), args.out)
    return 0


def _cmd_solve(args) -> int:
    params, stats = _prepared(args)
    deadline = params.deadline_D
    buffer_size = params.buffer_B
    eps_w = (args.eps_w if args.eps_w is not None
             else access_rate_budget(stats, params.eps_pu, params.power_ratio))
    path = greedy_policy_path(stats, deadline, buffer_size)
    policy, metrics = optimal_policy(eps_w, path, stats, deadline, buffer_size)
    _emit(json.dumps({
        "eps_w": eps_w,
        "eps_th": path.eps_th,
        "policy": policy_to_json_obj(policy),
        "metrics": json.loads(metrics.to_json()),
    }, indent=2), args.out)
    return 0


def _cmd_simulate(args) -> int:
    params, rate_policy = _load_scenario(args.config)
    params = derive_rates(params, rate_policy, args.mc_samples, args.seed)
    with open(args.policy_file) as fh:
        policy = policy_from_json_obj(json.load(fh))
    config = SimConfig(params=params, policy=policy, num_slots=args.slots,
                       seed=args.seed)
    result = run(config)
    analytic = None
    if args.with_analytic:
        stats = link_stats(params, max(args.mc_samples, 10 ** 5), args.seed)
        analytic = json.loads(long_term_metrics(
            policy, stats, params.deadline_D, params.buffer_B).to_json())
    out = json.loads(result.to_json())
    if analytic is not None:
        out["analytic"] = analytic
    _emit(json.dumps(out, indent=2), args.out)
    return 0


def _cmd_oracle(args) -> int:
    params, stats = _prepared(args)
    deadline = args.D if args.D is not None else params.deadline_D
    buffer_size = args.B if args.B is not None else params.buffer_B
    frontier = enumerate_frontier(stats, deadline, buffer_size)
    rows = frontier_csv_rows(frontier, stats, deadline, buffer_size)
    lines = ["w_s_bar,t_s_bar,policy_bitmask"]
    lines += [f"{r['w_s_bar']!r},{r['t_s_bar']!r},{r['policy_bitmask']}"
              for r in rows]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_sweep(args) -> int:
    params, rate_policy = _load_scenario(args.config)
    base = Scenario(params=params, rate_policy=rate_policy)
    if args.grid:
        grid = [float(x) for x in args.grid.split(",")]
    else:
        defaults = {
            "TS_VS_TP": [i / 20 for i in range(21)],
            "GSP_RATIO": [i / 8 for i in range(17)],
            "GPS_RATIO": [i / 4 for i in range(17)],
            "RSU_RATIO": [0.1 + i * 0.05 for i in range(19)],
            "DEADLINE": [1, 2, 3, 4, 5, 6],
        }
        grid = defaults[args.kind]
    rows = sweep(args.kind, base, grid, mc_samples=args.mc_samples,
                 seed=args.seed)
    _emit(rows_to_csv(rows), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cogarq",
        description="Secondary access policies for spectrum sharing with a "
                    "retransmitting primary user")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="scenario JSON file")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--mc-samples", dest="mc_samples", type=int,
                       default=DEFAULT_MC)
        p.add_argument("--out", default=None, help="output file (default stdout)")

    p = sub.add_parser("derive-params", help="derive rates and link statistics")
    common(p)
    p.set_defaults(func=_cmd_derive_params)

    p = sub.add_parser("solve", help="optimal policy at an access budget")
    common(p)
    p.add_argument("--eps-w", dest="eps_w", type=float, default=None,
                   help="access-rate budget (default: from constraints)")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("simulate", help="slot-level simulation of a policy")
    common(p)
    p.add_argument("--policy-file", required=True)
    p.add_argument("--slots", type=int, default=10 ** 6)
    p.add_argument("--with-analytic", action="store_true",
                   help="also report analytic metrics for the policy")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("oracle", help="brute-force frontier CSV")
    common(p)
    p.add_argument("--D", type=int, default=None)
    p.add_argument("--B", type=int, default=None)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("sweep", help="scheme-comparison sweep CSV")
    common(p)
    p.add_argument("--kind", required=True, choices=list(SWEEP_KINDS))
    p.add_argument("--grid", default=None,
                   help="comma-separated grid values (default per kind)")
    p.set_defaults(func=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single CLI error surface
        sys.stderr.write(json.dumps({"error": type(exc).__name__,
                                     "message": str(exc)}) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
