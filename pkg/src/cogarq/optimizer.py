"""Access-policy optimization for the retransmission-cycle MDP.

Both operating constraints (bounded primary throughput loss, bounded
secondary power) collapse into a single ceiling on the long-term secondary
access rate. Below the access rate of the "transmit only when the primary
message is known" policy, the optimum transmits only in known-message
states with one common probability. Above it, a greedy frontier walk
activates idle states one at a time in decreasing order of access
efficiency (marginal throughput per marginal access rate); the constrained
optimum is then the walk's last policy or a one-state randomization
between two consecutive walk policies.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .channel import LinkStats
from .mdp import (ACCESS, ACTIVE, DURATION, IDLE, PHI_K, ROOT,
                  THROUGHPUT, CycleValues, NetState, Policy, PolicyMetrics,
                  cycle_values, enumerate_states, k_active_policy,
                  long_term_metrics, metrics_from_cycle_values,
                  policy_to_json_obj, transition_row, validate_state)

W_SOLVE_TOL = 1e-13      # bisection target on the access rate
K_START = "k_active"
IDLE_START = "idle"


@dataclass(frozen=True)
class EfficiencyReport:
    """Marginal cycle quantities and access efficiency at one state."""

    state: NetState
    g_prime: float
    v_prime: float
    d_prime: float
    eta: float


@dataclass(frozen=True)
class PathEntry:
    policy: Policy
    metrics: PolicyMetrics
    chosen_state: Optional[NetState]


@dataclass(frozen=True)
class PolicyPath:
    """Greedy activation sequence with its per-step policies and metrics."""

    entries: List[PathEntry]
    eps_th: float

    def to_json_obj(self) -> dict:
        return {
            "eps_th": self.eps_th,
            "path": [{
                "policy": policy_to_json_obj(e.policy),
                "t_s_bar": e.metrics.t_s_bar,
                "w_s_bar": e.metrics.w_s_bar,
                "chosen_state": (None if e.chosen_state is None else
                                 {"t": e.chosen_state.t, "b": e.chosen_state.b,
                                  "phi": e.chosen_state.phi}),
            } for e in self.entries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2)


def _reward_derivative(state: NetState, stats: LinkStats, kind: str) -> float:
    if kind == ACCESS:
        return 1.0
    if kind == DURATION:
        return 0.0
    if state.phi == PHI_K:
        return stats.t_sk
    return (stats.t_su
            - (stats.q_ps_active - stats.q_ps_idle) * state.b * stats.rate_su)


def cycle_derivatives(policy: Policy, state: NetState, stats: LinkStats,
                      deadline: int, buffer_size: int,
                      values: Optional[CycleValues] = None,
                      ) -> Tuple[float, float, float]:
    """d/d(mu(state)) of the per-cycle reward, accesses, and duration at
    ``state``.

    The attempt index increases strictly within a cycle, so a state is
    never revisited before the cycle ends and the downstream cycle values
    do not depend on this state's own access probability. The derivative
    therefore has one-step form: derivative of the local reward plus the
    action-difference of the transition row weighted by the downstream
    values.
    """
    validate_state(state, deadline, buffer_size)
    if values is None:
        values = cycle_values(policy, stats, deadline, buffer_size)
    row_a = transition_row(state, ACTIVE, stats, deadline, buffer_size)
    row_i = transition_row(state, IDLE, stats, deadline, buffer_size)
    drow: Dict[NetState, float] = dict(row_a)
    for s, p in row_i.items():
        drow[s] = drow.get(s, 0.0) - p
    g_p = _reward_derivative(state, stats, THROUGHPUT)
    v_p = _reward_derivative(state, stats, ACCESS)
    d_p = _reward_derivative(state, stats, DURATION)
    for nxt, dp in drow.items():
        if nxt == ROOT:
            continue
        g_p += dp * values.g[nxt]
        v_p += dp * values.v[nxt]
        d_p += dp * values.dur[nxt]
    return g_p, v_p, d_p


def efficiency_report(policy: Policy, state: NetState, stats: LinkStats,
                      deadline: int, buffer_size: int,
                      values: Optional[CycleValues] = None,
                      metrics: Optional[PolicyMetrics] = None,
                      ) -> EfficiencyReport:
    """Access efficiency at ``state``: marginal long-term secondary
    throughput per marginal access rate when this state's access
    probability is perturbed.

    Computed directly from the cycle recursions, which stay well defined
    for states the current policy never reaches (it is the limit obtained
    by mixing in a vanishing amount of an everywhere-exploring policy).
    """
    if values is None:
        values = cycle_values(policy, stats, deadline, buffer_size)
    if metrics is None:
        metrics = metrics_from_cycle_values(values, stats)
    g_p, v_p, d_p = cycle_derivatives(policy, state, stats, deadline,
                                      buffer_size, values)
    den = v_p - d_p * metrics.w_s_bar
    if den <= 0.0:
        raise RuntimeError(
            f"access-rate derivative {den} <= 0 at {state}; this contradicts "
            "the positivity guarantee and indicates an implementation bug")
    eta = (g_p - d_p * metrics.t_s_bar) / den
    return EfficiencyReport(state=state, g_prime=g_p, v_prime=v_p,
                            d_prime=d_p, eta=eta)


def efficiency(policy: Policy, state: NetState, stats: LinkStats,
               deadline: int, buffer_size: int) -> float:
    return efficiency_report(policy, state, stats, deadline,
                             buffer_size).eta


def blend_policies(pol_a: Policy, pol_b: Policy, lam: float) -> Policy:
    """Pointwise mixture lam * pol_a + (1 - lam) * pol_b."""
    return Policy({s: lam * pa + (1.0 - lam) * pol_b.probs[s]
                   for s, pa in pol_a.probs.items()})


def access_rate_budget(stats: LinkStats, eps_pu: float,
                       power_ratio: float) -> float:
    """Single access-rate ceiling encoding both operating constraints.

    The primary-loss constraint converts to an access-rate bound through
    the linear dependence of the primary throughput on the access rate; if
    secondary activity cannot hurt the primary the bound is vacuous and
    only the power budget remains. Capped at 1, the access-probability
    ceiling.
    """
    dq = stats.q_pp_active - stats.q_pp_idle
    if dq > 0.0:
        pu_term = (1.0 - stats.q_pp_idle) * eps_pu / dq
    else:
        pu_term = math.inf
    return min(pu_term, power_ratio, 1.0)


def _k_scaled_policy(states: List[NetState], prob_k: float) -> Policy:
    return Policy({s: (prob_k if s.phi == PHI_K else 0.0) for s in states})


def low_regime_policy(eps_w: float, eps_th: float, deadline: int,
                      buffer_size: int,
                      stats: Optional[LinkStats] = None) -> Policy:
    """Optimal policy when the access budget does not exceed ``eps_th``.

    Transmit only in known-message states, with one common probability.
    With ``stats`` supplied, that probability is calibrated by bisection so
    the long-term access rate equals ``eps_w`` exactly (each access then
    earns the clean-channel throughput, so the optimum is attained with the
    budget tight). Without ``stats`` the probability falls back to the
    plain ratio eps_w / eps_th, which meets the budget with equality only
    when secondary activity does not affect the primary outage.

    Optimality presumes the clean-channel throughput dominates an
    interfered access plus its buffered top-up, which holds whenever the
    clean rate is chosen to maximize the clean-channel throughput.
    """
    if eps_th < 0.0:
        raise ValueError("eps_th must be nonnegative")
    if not 0.0 <= eps_w <= eps_th:
        raise ValueError("requires 0 <= eps_w <= eps_th; above eps_th use "
                         "the greedy policy path")
    states = enumerate_states(deadline, buffer_size)
    if eps_th == 0.0 or not any(s.phi == PHI_K for s in states):
        # No known-message states (deadline 1) or zero budget: stay idle.
        return _k_scaled_policy(states, 0.0)
    if stats is None or eps_w == 0.0 or eps_w == eps_th:
        return _k_scaled_policy(states, eps_w / eps_th)

    def w_of(m: float) -> float:
        pol = _k_scaled_policy(states, m)
        return long_term_metrics(pol, stats, deadline, buffer_size).w_s_bar

    lo, hi = 0.0, 1.0
    m = eps_w / eps_th
    for _ in range(200):
        w = w_of(m)
        if abs(w - eps_w) <= W_SOLVE_TOL:
            break
        if w < eps_w:
            lo = m
        else:
            hi = m
        m = 0.5 * (lo + hi)
    return _k_scaled_policy(states, m)


def greedy_policy_path(stats: LinkStats, deadline: int, buffer_size: int,
                       start: str = K_START) -> PolicyPath:
    """Greedy frontier walk activating one idle state per stage.

    Starting from the known-message-only policy (or, for verification, the
    all-idle policy), each stage activates the idle state with the highest
    access efficiency, stopping when no idle state has positive efficiency.
    Ties break toward the earliest state in canonical order so the walk is
    reproducible. The threshold access rate ``eps_th`` is always that of
    the known-message-only policy.

    The default start is optimal because known-message accesses dominate:
    started from the all-idle policy instead, the walk provably activates
    all known-message states first and then coincides with this one.
    """
    states = enumerate_states(deadline, buffer_size)
    eps_th = long_term_metrics(k_active_policy(states), stats, deadline,
                               buffer_size).w_s_bar
    if start == K_START:
        policy = k_active_policy(states)
    elif start == IDLE_START:
        policy = Policy({s: 0.0 for s in states})
    else:
        raise ValueError(f"unknown start {start!r}")
    idle_set = [s for s in states if policy.prob(s) == 0.0]

    values = cycle_values(policy, stats, deadline, buffer_size)
    metrics = metrics_from_cycle_values(values, stats)
    entries = [PathEntry(policy=policy, metrics=metrics, chosen_state=None)]
    while idle_set:
        best: Optional[NetState] = None
        best_eta = -math.inf
        for s in sorted(idle_set, key=lambda s: s.key()):
            rep = efficiency_report(policy, s, stats, deadline, buffer_size,
                                    values, metrics)
            if rep.eta > best_eta:
                best, best_eta = s, rep.eta
        if best is None or best_eta <= 0.0:
            break
        policy = policy.with_prob(best, 1.0)
        idle_set = [s for s in idle_set if s != best]
        values = cycle_values(policy, stats, deadline, buffer_size)
        metrics = metrics_from_cycle_values(values, stats)
        entries.append(PathEntry(policy=policy, metrics=metrics,
                                 chosen_state=best))
    return PolicyPath(entries=entries, eps_th=eps_th)


def optimal_policy(eps_w: float, path: PolicyPath, stats: LinkStats,
                   deadline: int, buffer_size: int,
                   ) -> Tuple[Policy, PolicyMetrics]:
    """Best policy under the access-rate budget ``eps_w``.

    Below the threshold rate the calibrated known-message-only policy is
    returned. Otherwise the budget either exceeds the walk's final access
    rate (return the final policy) or falls between two consecutive walk
    policies, in which case the unique one-state randomization meeting the
    budget exactly is found by bisection on the blend weight.
    """
    if eps_w < 0.0:
        raise ValueError("eps_w must be nonnegative")
    if eps_w <= path.eps_th:
        pol = low_regime_policy(eps_w, path.eps_th, deadline, buffer_size,
                                stats=stats)
        return pol, long_term_metrics(pol, stats, deadline, buffer_size)
    last = path.entries[-1]
    if last.metrics.w_s_bar <= eps_w:
        return last.policy, last.metrics
    j = max(i for i, e in enumerate(path.entries)
            if e.metrics.w_s_bar <= eps_w)
    pol_j = path.entries[j].policy
    pol_j1 = path.entries[j + 1].policy
    lo, hi = 0.0, 1.0            # access rate decreases as lam -> 1
    lam = 0.5
    pol = blend_policies(pol_j, pol_j1, lam)
    for _ in range(200):
        metrics = long_term_metrics(pol, stats, deadline, buffer_size)
        if abs(metrics.w_s_bar - eps_w) <= W_SOLVE_TOL:
            break
        if metrics.w_s_bar > eps_w:
            lo = lam
        else:
            hi = lam
        lam = 0.5 * (lo + hi)
        pol = blend_policies(pol_j, pol_j1, lam)
    return pol, long_term_metrics(pol, stats, deadline, buffer_size)
