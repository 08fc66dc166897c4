"""Markov decision process over the primary retransmission cycle.

The network state is (t, b, phi): retransmission attempt index t in [1, D],
secondary receive-buffer occupancy b, and message-knowledge flag phi (K if
the secondary receiver currently knows the primary message, U otherwise).
A stationary randomized access policy maps every state to a transmit
probability. Long-term averages follow from the renewal structure of the
retransmission cycle: every cycle starts in (1, 0, U) and ends at an ACK or
at the deadline, so a single backward pass over t yields the expected
per-cycle reward, accesses, and duration, whose ratios are the long-term
throughput and access rate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, List, Mapping, Tuple

import numpy as np

from .channel import LinkStats

PHI_U = "U"
PHI_K = "K"

ACTIVE = "ACTIVE"
IDLE = "IDLE"

THROUGHPUT = "THROUGHPUT"
ACCESS = "ACCESS"
DURATION = "DURATION"

ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class NetState:
    """One network state: attempt index t, buffer level b, knowledge flag."""

    t: int
    b: int
    phi: str

    def key(self) -> Tuple[int, int, int]:
        return (0 if self.phi == PHI_U else 1, self.t, self.b)


ROOT = NetState(1, 0, PHI_U)


def enumerate_states(deadline: int, buffer_size: int) -> List[NetState]:
    """Canonical ordered state space.

    Unknown-message states sorted by (t, b) first, then known-message
    states sorted by t. Buffer levels are limited both by the attempt
    index (at attempt t at most t - 1 signals can have been buffered) and
    by the configured buffer size.
    """
    if deadline < 1:
        raise ValueError("deadline must be >= 1")
    if not 0 <= buffer_size <= deadline - 1:
        raise ValueError("buffer_size must lie in [0, deadline - 1]")
    states = [NetState(t, b, PHI_U)
              for t in range(1, deadline + 1)
              for b in range(0, min(t - 1, buffer_size) + 1)]
    states += [NetState(t, 0, PHI_K) for t in range(2, deadline + 1)]
    return states


def validate_state(state: NetState, deadline: int, buffer_size: int) -> None:
    ok = 1 <= state.t <= deadline
    if state.phi == PHI_K:
        ok = ok and state.b == 0 and state.t >= 2
    elif state.phi == PHI_U:
        ok = ok and 0 <= state.b <= min(state.t - 1, buffer_size)
    else:
        ok = False
    if not ok:
        raise ValueError(f"invalid state {state} for D={deadline}, B={buffer_size}")


@dataclass(frozen=True)
class Policy:
    """Stationary randomized access policy: state -> transmit probability."""

    probs: Mapping[NetState, float]

    def prob(self, state: NetState) -> float:
        return self.probs[state]

    def with_prob(self, state: NetState, p: float) -> "Policy":
        new = dict(self.probs)
        new[state] = p
        return Policy(new)

    def validate(self, states: List[NetState]) -> None:
        if set(self.probs.keys()) != set(states):
            raise ValueError("policy does not cover the state space exactly")
        for s, p in self.probs.items():
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"access probability {p} at {s} outside [0, 1]")


def idle_policy(states: List[NetState]) -> Policy:
    return Policy({s: 0.0 for s in states})


def k_active_policy(states: List[NetState]) -> Policy:
    """Transmit always when the primary message is known, never otherwise."""
    return Policy({s: (1.0 if s.phi == PHI_K else 0.0) for s in states})


def policy_to_json_obj(policy: Policy) -> list:
    rows = sorted(policy.probs.items(), key=lambda kv: kv[0].key())
    return [{"t": s.t, "b": s.b, "phi": s.phi, "prob": p} for s, p in rows]


def policy_from_json_obj(obj: list) -> Policy:
    return Policy({NetState(r["t"], r["b"], r["phi"]): float(r["prob"])
                   for r in obj})


@dataclass
class CycleValues:
    """Expected per-cycle reward, accesses, and slots from each start state."""

    g: Dict[NetState, float]
    v: Dict[NetState, float]
    dur: Dict[NetState, float]


@dataclass(frozen=True)
class PolicyMetrics:
    """Long-term averages of one policy.

    ``p_s_ratio`` is the mean secondary power draw as a fraction of the
    per-slot transmit power, which equals the access rate ``w_s_bar``.
    """

    t_s_bar: float
    w_s_bar: float
    t_p_bar: float
    p_s_ratio: float

    def to_json(self) -> str:
        return json.dumps({"t_s_bar": self.t_s_bar, "w_s_bar": self.w_s_bar,
                           "t_p_bar": self.t_p_bar, "p_s_ratio": self.p_s_ratio},
                          indent=2)


def transition_row(state: NetState, action: str, stats: LinkStats,
                   deadline: int, buffer_size: int) -> Dict[NetState, float]:
    """One-step transition probabilities from ``state`` under ``action``.

    An ACK or the deadline restarts the cycle at (1, 0, U). On a NACK from
    an unknown-message state the successor depends on what the secondary
    receiver decoded: nothing (same buffer), a buffered secondary signal
    (buffer + 1, saturating at the buffer size), or the primary message
    (jump to the known-message chain). Known-message states persist on the
    primary chain until ACK or deadline.
    """
    validate_state(state, deadline, buffer_size)
    if action == ACTIVE:
        q_pp, q_ps = stats.q_pp_active, stats.q_ps_active
        p_buf = stats.p_buf
    elif action == IDLE:
        q_pp, q_ps = stats.q_pp_idle, stats.q_ps_idle
        p_buf = 0.0
    else:
        raise ValueError(f"unknown action {action!r}")

    row: Dict[NetState, float] = {}
    if state.t == deadline:
        row[ROOT] = 1.0
        return row
    row[ROOT] = 1.0 - q_pp
    t1 = state.t + 1
    if state.phi == PHI_K:
        row[NetState(t1, 0, PHI_K)] = q_pp
        return row
    stay = q_pp * (q_ps - p_buf)
    grow = q_pp * p_buf
    learn = q_pp * (1.0 - q_ps)
    if state.b == buffer_size:
        stay += grow            # buffer full: the new signal is dropped
        grow = 0.0
    row[NetState(t1, state.b, PHI_U)] = stay
    if grow > 0.0:
        row[NetState(t1, state.b + 1, PHI_U)] = grow
    row[NetState(t1, 0, PHI_K)] = learn
    return row


def mixed_transition_row(state: NetState, access_prob: float, stats: LinkStats,
                         deadline: int, buffer_size: int) -> Dict[NetState, float]:
    """Action-averaged transition row under access probability ``access_prob``."""
    row_a = transition_row(state, ACTIVE, stats, deadline, buffer_size)
    row_i = transition_row(state, IDLE, stats, deadline, buffer_size)
    out: Dict[NetState, float] = {}
    for s, p in row_a.items():
        out[s] = access_prob * p
    for s, p in row_i.items():
        out[s] = out.get(s, 0.0) + (1.0 - access_prob) * p
    return out


def state_reward(state: NetState, policy_prob: float, stats: LinkStats,
                 kind: str) -> float:
    """Expected one-slot reward accrued in ``state`` under access probability
    ``policy_prob``.

    THROUGHPUT counts fresh secondary bits plus the recovery of all
    buffered signals (b * rate_su bits) whenever the secondary receiver
    decodes the primary message in this slot, whichever action was taken.
    ACCESS counts channel uses; DURATION counts slots.
    """
    if not 0.0 <= policy_prob <= 1.0:
        raise ValueError("policy_prob must lie in [0, 1]")
    if kind == ACCESS:
        return policy_prob
    if kind == DURATION:
        return 1.0
    if kind != THROUGHPUT:
        raise ValueError(f"unknown reward kind {kind!r}")
    if state.phi == PHI_K:
        return policy_prob * stats.t_sk
    decode_pu = (policy_prob * (1.0 - stats.q_ps_active)
                 + (1.0 - policy_prob) * (1.0 - stats.q_ps_idle))
    return policy_prob * stats.t_su + decode_pu * state.b * stats.rate_su


def cycle_values(policy: Policy, stats: LinkStats, deadline: int,
                 buffer_size: int) -> CycleValues:
    """Per-cycle expected reward/access/duration from every state.

    Backward recursion over the attempt index; transitions into the cycle
    root (1, 0, U) contribute no continuation because they end the cycle.
    """
    states = enumerate_states(deadline, buffer_size)
    policy.validate(states)
    stats.validate()
    g: Dict[NetState, float] = {}
    v: Dict[NetState, float] = {}
    dur: Dict[NetState, float] = {}
    for s in sorted(states, key=lambda s: -s.t):
        mu = policy.prob(s)
        row = mixed_transition_row(s, mu, stats, deadline, buffer_size)
        cont_g = cont_v = cont_d = 0.0
        for nxt, p in row.items():
            if nxt == ROOT:
                continue
            cont_g += p * g[nxt]
            cont_v += p * v[nxt]
            cont_d += p * dur[nxt]
        g[s] = state_reward(s, mu, stats, THROUGHPUT) + cont_g
        v[s] = state_reward(s, mu, stats, ACCESS) + cont_v
        dur[s] = state_reward(s, mu, stats, DURATION) + cont_d
    return CycleValues(g=g, v=v, dur=dur)


def long_term_metrics(policy: Policy, stats: LinkStats, deadline: int,
                      buffer_size: int) -> PolicyMetrics:
    """Long-term averages via the renewal-reward ratio at the cycle root."""
    cv = cycle_values(policy, stats, deadline, buffer_size)
    return metrics_from_cycle_values(cv, stats)


def metrics_from_cycle_values(cv: CycleValues, stats: LinkStats) -> PolicyMetrics:
    d = cv.dur[ROOT]
    t_s = cv.g[ROOT] / d
    w_s = cv.v[ROOT] / d
    t_p = stats.t_p_idle - (stats.t_p_idle - stats.t_p_active) * w_s
    return PolicyMetrics(t_s_bar=t_s, w_s_bar=w_s, t_p_bar=t_p, p_s_ratio=w_s)


def stationary_distribution(policy: Policy, stats: LinkStats, deadline: int,
                            buffer_size: int) -> Dict[NetState, float]:
    """Steady-state occupancy of every state under ``policy``.

    Solved directly as pi P = pi with unit total mass. The cycle root is
    positive recurrent, so the chain is unichain and the solution is
    unique; states unreachable from the root are transient and come out
    with zero mass.
    """
    states = enumerate_states(deadline, buffer_size)
    policy.validate(states)
    stats.validate()
    idx = {s: i for i, s in enumerate(states)}
    n = len(states)
    pmat = np.zeros((n, n))
    for s in states:
        row = mixed_transition_row(s, policy.prob(s), stats, deadline,
                                   buffer_size)
        for nxt, p in row.items():
            pmat[idx[s], idx[nxt]] += p
    a = pmat.T - np.eye(n)
    a[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    try:
        pi = np.linalg.solve(a, rhs)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("stationary distribution solve failed "
                           "(chain unexpectedly not unichain)") from exc
    pi = np.where(np.abs(pi) < 1e-15, 0.0, pi)
    return {s: float(pi[idx[s]]) for s in states}


def occupancy_metrics(policy: Policy, stats: LinkStats, deadline: int,
                      buffer_size: int) -> Tuple[float, float]:
    """(t_s_bar, w_s_bar) recomputed from the stationary distribution.

    Independent accounting used to cross-check the renewal-reward route:
    the access rate is the occupancy-weighted access probability and the
    throughput splits into plain secondary bits, the clean-channel bonus
    in known-message states, and buffered-recovery bits.
    """
    pi = stationary_distribution(policy, stats, deadline, buffer_size)
    w_s = sum(pi[s] * policy.prob(s) for s in pi)
    f_s = sum(pi[s] * policy.prob(s) * (stats.t_sk - stats.t_su)
              for s in pi if s.phi == PHI_K)
    b_s = 0.0
    for s in pi:
        if s.phi == PHI_U and s.b > 0:
            mu = policy.prob(s)
            decode = (1.0 - stats.q_ps_idle
                      - mu * (stats.q_ps_active - stats.q_ps_idle))
            b_s += pi[s] * s.b * stats.rate_su * decode
    t_s = stats.t_su * w_s + f_s + b_s
    return t_s, w_s
