"""Shared builders and policy-structure helpers for the test suite."""

from __future__ import annotations

import math

from cogarq import LinkStats, Policy, SystemParams
from cogarq.mdp import PHI_K, PHI_U

TABLE1_SNRS = dict(mean_snr_s=5.0, mean_snr_p=10.0, mean_snr_sp=2.0,
                   mean_snr_ps=5.0)
TABLE1_RATES = dict(rate_p=2.52, rate_su=1.12, rate_sk=1.91)


def table1_params(**overrides) -> SystemParams:
    fields = dict(TABLE1_SNRS, **TABLE1_RATES, deadline_D=5, buffer_B=4,
                  eps_pu=0.2, power_ratio=1.0)
    fields.update(overrides)
    return SystemParams(**fields)


def make_random_stats(rng, degenerate: bool = False,
                      ensure_hp: bool = False) -> LinkStats:
    """Feasible random link statistics for structural tests.

    Respects the ordering constraints the real channel model guarantees:
    active outages dominate idle ones, the buffering probability cannot
    exceed the active outage probability, and the clean-channel throughput
    dominates the interfered throughput plus its buffered top-up.
    """
    q_pp_i = float(rng.uniform(0.15, 0.7))
    q_pp_a = q_pp_i if degenerate else float(rng.uniform(q_pp_i + 0.03, 0.92))
    q_ps_i = float(rng.uniform(0.2, 0.7))
    q_ps_a = float(rng.uniform(q_ps_i + 0.05, 0.95))
    p_buf = float(rng.uniform(0.03, max(q_ps_a - 0.02, 0.04)))
    rate_su = float(rng.uniform(0.5, 2.0))
    t_su = rate_su * float(rng.uniform(0.2, 0.8))
    if ensure_hp:
        bound = (1.0 - q_ps_a) / (q_ps_a - q_ps_i) * p_buf
        margin = float(rng.uniform(0.05, 0.9)) * bound
    else:
        margin = float(rng.uniform(0.0, 0.5))
    t_sk = t_su + p_buf * rate_su + margin * rate_su
    rate_sk = max(float(rng.uniform(rate_su, 2.5)), t_sk * 1.05)
    rate_p = float(rng.uniform(1.0, 3.0))
    return LinkStats(
        q_pp_idle=q_pp_i, q_pp_active=q_pp_a,
        q_ps_idle=q_ps_i, q_ps_active=q_ps_a,
        p_buf=p_buf, t_su=t_su, t_sk=t_sk,
        t_p_idle=rate_p * (1.0 - q_pp_i),
        t_p_active=rate_p * (1.0 - q_pp_a),
        rate_p=rate_p, rate_su=rate_su, rate_sk=rate_sk,
    )


def make_random_policy(rng, states, lo: float = 0.0, hi: float = 1.0) -> Policy:
    return Policy({s: float(rng.uniform(lo, hi)) for s in states})


def first_idle_thresholds(policy: Policy, deadline: int) -> dict:
    """Per attempt index, the lowest idle buffer level (inf if none idle).

    Canonical threshold representation: for a threshold policy the
    accessed levels at each attempt are exactly b < threshold(t).
    """
    out = {}
    for t in range(1, deadline + 1):
        idle = [s.b for s, p in policy.probs.items()
                if s.phi == PHI_U and s.t == t and p == 0.0]
        out[t] = min(idle) if idle else math.inf
    return out


def max_accessed_levels(policy: Policy, deadline: int) -> dict:
    """Per attempt index, the highest accessed buffer level (-1 if none)."""
    out = {}
    for t in range(1, deadline + 1):
        acc = [s.b for s, p in policy.probs.items()
               if s.phi == PHI_U and s.t == t and p == 1.0]
        out[t] = max(acc) if acc else -1
    return out


def is_threshold_policy(policy: Policy, deadline: int) -> bool:
    """All known-message states transmit and, per attempt index, the
    accessed unknown-message levels form a prefix in the buffer level."""
    th = first_idle_thresholds(policy, deadline)
    for s, p in policy.probs.items():
        if s.phi == PHI_K:
            if p != 1.0:
                return False
        else:
            if p not in (0.0, 1.0):
                return False
            if (p == 1.0) != (s.b < th[s.t]):
                return False
    return True
