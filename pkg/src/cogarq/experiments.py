"""Scheme comparison and parameter sweeps.

Four access schemes are compared at a common access-rate budget:

- FIC_BIC: full interference cancellation, buffering up to deadline - 1
  signals (optimized policy),
- FIC_ONLY: no buffering (buffer size zero, optimized policy),
- NO_IC: no cancellation at all; the optimum is a constant access
  probability equal to the budget, earning the interfered throughput per
  access,
- PM_KNOWN: idealized bound with the primary message known in advance,
  earning the clean-channel throughput per access.

Sweeps re-derive transmission rates per grid point as dictated by the rate
policy, recompute link statistics, evaluate all four schemes, and emit one
row per (grid point, scheme) with per-row error capture so a failing point
does not abort the sweep.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from .channel import (LinkStats, PU_IDLE_THROUGHPUT, SU_CLEAN_THROUGHPUT,
                      SU_INTERFERED_THROUGHPUT, SystemParams, link_stats,
                      optimize_rate)
from .mdp import PolicyMetrics
from .optimizer import (PolicyPath, access_rate_budget, greedy_policy_path,
                        optimal_policy)

RSU_STAR = "RSU_STAR"
RSU_EQ_RSK = "RSU_EQ_RSK"
EXPLICIT = "EXPLICIT"

FIC_BIC = "FIC_BIC"
FIC_ONLY = "FIC_ONLY"
NO_IC = "NO_IC"
PM_KNOWN = "PM_KNOWN"
SCHEMES = (FIC_BIC, FIC_ONLY, NO_IC, PM_KNOWN)

TS_VS_TP = "TS_VS_TP"
GSP_RATIO = "GSP_RATIO"
GPS_RATIO = "GPS_RATIO"
RSU_RATIO = "RSU_RATIO"
DEADLINE = "DEADLINE"
SWEEP_KINDS = (TS_VS_TP, GSP_RATIO, GPS_RATIO, RSU_RATIO, DEADLINE)

CSV_COLUMNS = ("x", "scheme", "t_s_bar", "w_s_bar", "t_p_bar", "error")


@dataclass(frozen=True)
class Scenario:
    params: SystemParams
    rate_policy: str = RSU_STAR
    scheme: str = FIC_BIC

    def __post_init__(self):
        if self.rate_policy not in (RSU_STAR, RSU_EQ_RSK, EXPLICIT):
            raise ValueError(f"unknown rate policy {self.rate_policy!r}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")


def derive_rates(params: SystemParams, rate_policy: str,
                 mc_samples: int = 10 ** 6, seed: int = 1234) -> SystemParams:
    """Replace the rates in ``params`` according to the rate policy."""
    if rate_policy == EXPLICIT:
        return params
    rate_p = optimize_rate(PU_IDLE_THROUGHPUT, params)
    rate_sk = optimize_rate(SU_CLEAN_THROUGHPUT, params)
    with_rp = params.replace(rate_p=rate_p, rate_sk=rate_sk)
    if rate_policy == RSU_EQ_RSK:
        return with_rp.replace(rate_su=rate_sk)
    rate_su = optimize_rate(SU_INTERFERED_THROUGHPUT, with_rp,
                            mc_samples=mc_samples, seed=seed)
    return with_rp.replace(rate_su=rate_su)


def _bound_metrics(per_access: float, eps_w: float,
                   stats: LinkStats) -> PolicyMetrics:
    w = min(eps_w, 1.0)
    t_p = stats.t_p_idle - (stats.t_p_idle - stats.t_p_active) * w
    return PolicyMetrics(t_s_bar=per_access * w, w_s_bar=w, t_p_bar=t_p,
                         p_s_ratio=w)


def evaluate_scheme(scenario: Scenario, eps_w: float,
                    stats: Optional[LinkStats] = None,
                    path: Optional[PolicyPath] = None,
                    mc_samples: int = 10 ** 6,
                    seed: int = 1234) -> PolicyMetrics:
    """Long-term metrics of one scheme at access budget ``eps_w``.

    ``stats`` (and, for the optimized schemes, ``path``) may be passed in
    to reuse previously computed values; otherwise rates are derived per
    the scenario's rate policy and statistics are recomputed.
    """
    params = scenario.params
    if stats is None:
        params = derive_rates(params, scenario.rate_policy, mc_samples, seed)
        stats = link_stats(params, max(mc_samples, 10 ** 5), seed)
    if scenario.scheme == NO_IC:
        return _bound_metrics(stats.t_su, eps_w, stats)
    if scenario.scheme == PM_KNOWN:
        return _bound_metrics(stats.t_sk, eps_w, stats)
    deadline = params.deadline_D
    buffer_size = deadline - 1 if scenario.scheme == FIC_BIC else 0
    if path is None:
        path = greedy_policy_path(stats, deadline, buffer_size)
    _, metrics = optimal_policy(eps_w, path, stats, deadline, buffer_size)
    return metrics


def _point_params(kind: str, base: Scenario, x: float) -> SystemParams:
    p = base.params
    if kind == TS_VS_TP:
        return p
    if kind == GSP_RATIO:
        return p.replace(mean_snr_sp=x * p.mean_snr_p)
    if kind == GPS_RATIO:
        return p.replace(mean_snr_ps=x * p.mean_snr_s)
    if kind == RSU_RATIO:
        return p
    if kind == DEADLINE:
        d = int(round(x))
        if d != x:
            raise ValueError(f"DEADLINE grid values must be integers, got {x}")
        return p.replace(deadline_D=d, buffer_B=d - 1)
    raise ValueError(f"unknown sweep kind {kind!r}")


def sweep(kind: str, base: Scenario, grid: Sequence[float],
          mc_samples: int = 10 ** 6, seed: int = 1234) -> List[dict]:
    """Evaluate all four schemes along one parameter grid.

    Rows carry (x, scheme, t_s_bar, w_s_bar, t_p_bar, error); a failure at
    one grid point is recorded in its rows' error field and the sweep
    continues. For TS_VS_TP the grid is the access budget itself; for the
    other kinds the budget comes from the scenario's constraints at each
    point.
    """
    if kind not in SWEEP_KINDS:
        raise ValueError(f"unknown sweep kind {kind!r}")
    if len(grid) == 0:
        raise ValueError("grid must be nonempty")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be monotone nondecreasing")

    rows: List[dict] = []
    rate_cache: Dict[tuple, SystemParams] = {}
    for x in grid:
        try:
            params = _point_params(kind, base, x)
            if kind == RSU_RATIO:
                derived = derive_rates(params, RSU_EQ_RSK, mc_samples, seed)
                params = derived.replace(rate_su=x * derived.rate_sk)
                rate_policy = EXPLICIT
            else:
                rate_policy = base.rate_policy
            cache_key = (params.mean_snr_s, params.mean_snr_p,
                         params.mean_snr_ps, params.rate_su, params.rate_p,
                         params.rate_sk, rate_policy)
            if cache_key in rate_cache:
                r_p, r_su, r_sk = rate_cache[cache_key]
                params = params.replace(rate_p=r_p, rate_su=r_su,
                                        rate_sk=r_sk)
            else:
                params = derive_rates(params, rate_policy, mc_samples, seed)
                rate_cache[cache_key] = (params.rate_p, params.rate_su,
                                         params.rate_sk)
            stats = link_stats(params, max(mc_samples, 10 ** 5), seed)
            if kind == TS_VS_TP:
                eps_w = float(x)
            else:
                eps_w = access_rate_budget(stats, params.eps_pu,
                                           params.power_ratio)
            deadline = params.deadline_D
            path_full = greedy_policy_path(stats, deadline, deadline - 1)
            path_nobuf = greedy_policy_path(stats, deadline, 0)
            for scheme in SCHEMES:
                scen = Scenario(params=params, rate_policy=EXPLICIT,
                                scheme=scheme)
                path = {FIC_BIC: path_full, FIC_ONLY: path_nobuf}.get(scheme)
                m = evaluate_scheme(scen, eps_w, stats=stats, path=path)
                rows.append({"x": x, "scheme": scheme, "t_s_bar": m.t_s_bar,
                             "w_s_bar": m.w_s_bar, "t_p_bar": m.t_p_bar,
                             "error": ""})
        except Exception as exc:  # noqa: BLE001 - per-point fault isolation
            for scheme in SCHEMES:
                rows.append({"x": x, "scheme": scheme, "t_s_bar": "",
                             "w_s_bar": "", "t_p_bar": "",
                             "error": f"{type(exc).__name__}: {exc}"})
    return rows


def write_csv(rows: List[dict], fh) -> None:
    writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
    writer.writeheader()
    for row in rows:
        writer.writerow(row)


def rows_to_csv(rows: List[dict]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()
