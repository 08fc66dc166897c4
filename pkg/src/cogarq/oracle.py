"""Brute-force certification of the greedy optimizer at desk scale.

Every deterministic policy over a small state space is evaluated exactly;
the upper-left convex hull of the resulting (access rate, throughput)
cloud is the achievable frontier, because a policy randomized in a single
state traces the straight chord between the two deterministic policies it
mixes (all three per-cycle quantities are affine in that one probability,
and a projective image of a line is a line). The constrained optimum is
therefore the frontier value at the access budget, which certifies the
greedy construction independently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

from .channel import LinkStats
from .mdp import NetState, Policy, enumerate_states, long_term_metrics
from .optimizer import blend_policies

MAX_ENUM_STATES = 16


@dataclass(frozen=True)
class FrontierPoint:
    w_s_bar: float
    t_s_bar: float
    policy: Policy


def policy_from_bitmask(mask: int, states: List[NetState]) -> Policy:
    return Policy({s: float((mask >> i) & 1) for i, s in enumerate(states)})


def policy_to_bitmask(policy: Policy, states: List[NetState]) -> int:
    mask = 0
    for i, s in enumerate(states):
        p = policy.probs[s]
        if p not in (0.0, 1.0):
            raise ValueError("bitmask only defined for deterministic policies")
        mask |= int(p) << i
    return mask


def _cross(o: FrontierPoint, a: FrontierPoint, b: FrontierPoint) -> float:
    return ((a.w_s_bar - o.w_s_bar) * (b.t_s_bar - o.t_s_bar)
            - (a.t_s_bar - o.t_s_bar) * (b.w_s_bar - o.w_s_bar))


def enumerate_frontier(stats: LinkStats, deadline: int,
                       buffer_size: int) -> List[FrontierPoint]:
    """Upper-left hull of all deterministic policies, sorted by access rate.

    Vertices are strict corners (collinear interior points are dropped)
    and the chain is truncated at its throughput maximum, so slopes are
    strictly decreasing and positive left to right.
    """
    states = enumerate_states(deadline, buffer_size)
    if len(states) > MAX_ENUM_STATES:
        raise ValueError(f"state space too large to enumerate "
                         f"({len(states)} > {MAX_ENUM_STATES})")
    points = []
    for mask in range(1 << len(states)):
        pol = policy_from_bitmask(mask, states)
        m = long_term_metrics(pol, stats, deadline, buffer_size)
        points.append(FrontierPoint(w_s_bar=m.w_s_bar, t_s_bar=m.t_s_bar,
                                    policy=pol))
    points.sort(key=lambda p: (p.w_s_bar, p.t_s_bar))
    # Keep only the best throughput at (numerically) equal access rates.
    dedup: List[FrontierPoint] = []
    for p in points:
        if dedup and abs(p.w_s_bar - dedup[-1].w_s_bar) <= 1e-14:
            dedup[-1] = p
        else:
            dedup.append(p)
    hull: List[FrontierPoint] = []
    for p in dedup:
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], p) >= 0.0:
            hull.pop()
        hull.append(p)
    best = max(range(len(hull)), key=lambda i: hull[i].t_s_bar)
    return hull[:best + 1]


def _differing_states(pol_a: Policy, pol_b: Policy) -> List[NetState]:
    return [s for s, p in pol_a.probs.items() if p != pol_b.probs[s]]


def oracle_optimum(eps_w: float, frontier: List[FrontierPoint],
                   stats: LinkStats, deadline: int, buffer_size: int) -> float:
    """Best achievable throughput under access rate <= ``eps_w``.

    Returns the frontier's value at the budget: a vertex value when the
    budget is slack, otherwise the one-state-randomized blend between the
    bracketing vertices, solved by bisection on the blend weight. If the
    bracketing vertices differ in more than one state the chord value is
    used directly (the blend of one-state-differing policies provably
    traces the chord, so both branches agree whenever both apply).
    """
    if not frontier:
        raise ValueError("frontier must be nonempty")
    if eps_w >= frontier[-1].w_s_bar:
        return frontier[-1].t_s_bar
    if eps_w <= frontier[0].w_s_bar:
        return frontier[0].t_s_bar
    j = max(i for i, p in enumerate(frontier) if p.w_s_bar <= eps_w)
    a, b = frontier[j], frontier[j + 1]
    if len(_differing_states(a.policy, b.policy)) == 1:
        lo, hi = 0.0, 1.0        # lam weights a; access rate decreases in lam
        lam = 0.5
        for _ in range(200):
            pol = blend_policies(a.policy, b.policy, lam)
            m = long_term_metrics(pol, stats, deadline, buffer_size)
            if abs(m.w_s_bar - eps_w) <= 1e-13:
                return m.t_s_bar
            if m.w_s_bar > eps_w:
                lo = lam
            else:
                hi = lam
            lam = 0.5 * (lo + hi)
        return m.t_s_bar
    frac = (eps_w - a.w_s_bar) / (b.w_s_bar - a.w_s_bar)
    return a.t_s_bar + frac * (b.t_s_bar - a.t_s_bar)


def frontier_csv_rows(frontier: List[FrontierPoint], stats: LinkStats,
                      deadline: int, buffer_size: int) -> List[dict]:
    states = enumerate_states(deadline, buffer_size)
    return [{"w_s_bar": p.w_s_bar, "t_s_bar": p.t_s_bar,
             "policy_bitmask": policy_to_bitmask(p.policy, states)}
            for p in frontier]
