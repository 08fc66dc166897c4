"""Link-level statistics for a spectrum-sharing pair under Rayleigh fading.

All four links (secondary direct, primary direct, and the two cross links)
fade independently with exponentially distributed instantaneous SNR. This
module computes:

- primary outage probabilities with the secondary idle or transmitting
  (closed form),
- the joint-decoding outcome of a secondary slot at the secondary receiver
  (five-way classification of the (gamma_s, gamma_ps) plane),
- the fading-averaged probabilities and per-slot expected throughputs that
  drive the access-policy optimization (`LinkStats`), mixing closed forms
  with seeded Monte Carlo for the two-dimensional region probabilities,
- single-variable rate optimization by grid-seeded golden-section search.

Monte Carlo draws come from one `numpy` PCG64 stream; chunks are drawn
sequentially from that stream, so results are a deterministic function of
(params, mc_samples, seed).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

import numpy as np

# Decoding outcome labels for a secondary-active slot.
BOTH_DECODED = "BOTH_DECODED"
PU_ONLY = "PU_ONLY"
SU_ONLY = "SU_ONLY"
BUFFERED = "BUFFERED"
LOST = "LOST"

# Rate-optimization objectives.
PU_IDLE_THROUGHPUT = "PU_IDLE_THROUGHPUT"
SU_CLEAN_THROUGHPUT = "SU_CLEAN_THROUGHPUT"
SU_INTERFERED_THROUGHPUT = "SU_INTERFERED_THROUGHPUT"

RATE_BRACKET = (1e-3, 20.0)   # bits/s/Hz; throughput vanishes at both ends
RATE_TOL = 1e-4

_MC_CHUNK = 1 << 20


def capacity(snr: float) -> float:
    """Normalized Gaussian-channel capacity log2(1 + snr) in bits/s/Hz."""
    return math.log2(1.0 + snr)


@dataclass(frozen=True)
class SystemParams:
    """Exogenous scalars describing one primary/secondary scenario.

    SNRs are linear-scale means of the exponential fading distributions;
    rates are in bits/s/Hz. ``power_ratio`` is the secondary power budget
    expressed as a fraction of the per-slot transmit power.
    """

    mean_snr_s: float
    mean_snr_p: float
    mean_snr_sp: float
    mean_snr_ps: float
    rate_p: float
    rate_su: float
    rate_sk: float
    deadline_D: int
    buffer_B: int
    eps_pu: float
    power_ratio: float

    def __post_init__(self):
        if min(self.mean_snr_s, self.mean_snr_p, self.mean_snr_sp,
               self.mean_snr_ps) < 0:
            raise ValueError("mean SNRs must be nonnegative")
        if min(self.rate_p, self.rate_su, self.rate_sk) <= 0:
            raise ValueError("rates must be positive")
        if self.deadline_D < 1:
            raise ValueError("deadline_D must be >= 1")
        if not 0 <= self.buffer_B <= self.deadline_D - 1:
            raise ValueError("buffer_B must lie in [0, deadline_D - 1]")
        if not 0.0 <= self.eps_pu <= 1.0:
            raise ValueError("eps_pu must lie in [0, 1]")
        if not 0.0 <= self.power_ratio <= 1.0:
            raise ValueError("power_ratio must lie in [0, 1]")

    def replace(self, **changes) -> "SystemParams":
        fields = asdict(self)
        fields.update(changes)
        return SystemParams(**fields)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @staticmethod
    def from_json_obj(obj: dict) -> "SystemParams":
        return SystemParams(**{k: obj[k] for k in (
            "mean_snr_s", "mean_snr_p", "mean_snr_sp", "mean_snr_ps",
            "rate_p", "rate_su", "rate_sk", "deadline_D", "buffer_B",
            "eps_pu", "power_ratio")})


@dataclass(frozen=True)
class LinkStats:
    """Fading-averaged probabilities and per-slot expected throughputs.

    ``q_pp_*`` are primary outage probabilities at the primary receiver,
    ``q_ps_*`` are primary outage probabilities at the secondary receiver,
    ``p_buf`` is the probability that an interfered secondary transmission
    is undecodable now but clean enough to buffer for later recovery.
    Throughputs ``t_*`` are expected bits/s/Hz per relevant slot. The rates
    are carried along because the buffered-recovery reward and the
    degenerate-network thresholds need them. ``stderr_*`` report Monte
    Carlo standard errors (zero for analytically constructed stats).
    """

    q_pp_idle: float
    q_pp_active: float
    q_ps_idle: float
    q_ps_active: float
    p_buf: float
    t_su: float
    t_sk: float
    t_p_idle: float
    t_p_active: float
    rate_p: float
    rate_su: float
    rate_sk: float
    stderr_q_ps_active: float = 0.0
    stderr_p_buf: float = 0.0
    stderr_t_su: float = 0.0

    def validate(self) -> None:
        """Reject statistics that no physical scenario can produce.

        Guards the chain evaluators against silently wrong arithmetic:
        probabilities in range, secondary interference can only worsen the
        primary outage, primary interference can only worsen the decode of
        the primary message at the secondary receiver, and buffering is a
        sub-event of that decode failing.
        """
        for name in ("q_pp_idle", "q_pp_active", "q_ps_idle", "q_ps_active",
                     "p_buf"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0, 1]")
        if self.q_pp_active < self.q_pp_idle:
            raise ValueError("q_pp_active must dominate q_pp_idle")
        if self.q_ps_active < self.q_ps_idle:
            raise ValueError("q_ps_active must dominate q_ps_idle")
        if self.p_buf > self.q_ps_active:
            raise ValueError("p_buf cannot exceed q_ps_active")
        if min(self.t_su, self.t_sk, self.rate_su) < 0:
            raise ValueError("throughputs and rates must be nonnegative")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @staticmethod
    def from_json_obj(obj: dict) -> "LinkStats":
        return LinkStats(**obj)


class RegionClassifier:
    """Joint-decoding outcome of one secondary-active slot at SUrx.

    Both messages decode when the rate pair sits inside the two-user
    multiple-access region (individual constraints plus the sum-rate
    constraint). Outside it, one message may still decode alone by treating
    the other as noise. A slot whose secondary message fails only because
    of primary interference (the clean-channel constraint still holds) is
    buffered for later interference-cancellation recovery.

    The same threshold constants serve the scalar per-slot path and the
    vectorized Monte Carlo path, so every consumer classifies identically.
    Boundary ties follow the non-strict inequalities of the defining
    regions; under continuous fading they have measure zero.
    """

    def __init__(self, rate_su: float, rate_p: float):
        if rate_su < 0 or rate_p < 0:
            raise ValueError("rates must be nonnegative")
        self.rate_su = rate_su
        self.rate_p = rate_p
        self.thr_su = 2.0 ** rate_su - 1.0          # rate_su <= C(x) iff x >= thr_su
        self.thr_p = 2.0 ** rate_p - 1.0
        self.thr_sum = 2.0 ** (rate_su + rate_p) - 1.0

    def masks(self, snr_s: np.ndarray, snr_ps: np.ndarray):
        """Vectorized membership masks (pu_decodable, su_decodable, buffered)."""
        mac = ((snr_s >= self.thr_su) & (snr_ps >= self.thr_p)
               & (snr_s + snr_ps >= self.thr_sum))
        pu_alone = (snr_s < self.thr_su) & (snr_ps >= self.thr_p * (1.0 + snr_s))
        su_alone = (snr_ps < self.thr_p) & (snr_s >= self.thr_su * (1.0 + snr_ps))
        in_gp = mac | pu_alone
        in_gs = mac | su_alone
        buffered = ~in_gp & ~in_gs & (snr_s >= self.thr_su)
        return in_gp, in_gs, buffered

    def label(self, snr_s: float, snr_ps: float) -> str:
        """Scalar five-way classification of one (snr_s, snr_ps) draw."""
        mac = (snr_s >= self.thr_su and snr_ps >= self.thr_p
               and snr_s + snr_ps >= self.thr_sum)
        in_gp = mac or (snr_s < self.thr_su
                        and snr_ps >= self.thr_p * (1.0 + snr_s))
        in_gs = mac or (snr_ps < self.thr_p
                        and snr_s >= self.thr_su * (1.0 + snr_ps))
        if in_gp and in_gs:
            return BOTH_DECODED
        if in_gp:
            return PU_ONLY
        if in_gs:
            return SU_ONLY
        if snr_s >= self.thr_su:
            return BUFFERED
        return LOST


def region_membership(snr_s: float, snr_ps: float, rate_su: float,
                      rate_p: float) -> str:
    """Classify one instantaneous SNR pair at the secondary receiver."""
    if snr_s < 0 or snr_ps < 0:
        raise ValueError("SNRs must be nonnegative")
    return RegionClassifier(rate_su, rate_p).label(snr_s, snr_ps)


def outage_pp(params: SystemParams, su_active: bool) -> float:
    """Primary-link outage probability, with or without secondary interference.

    Idle secondary: 1 - exp(-thr/mean_snr_p) with thr = 2**rate_p - 1.
    Active secondary: the interference term integrates out to the factor
    1 / (1 + thr * mean_snr_sp / mean_snr_p).
    """
    thr = 2.0 ** params.rate_p - 1.0
    if params.mean_snr_p == 0.0:
        return 1.0
    clear = math.exp(-thr / params.mean_snr_p)
    if su_active:
        clear /= 1.0 + thr * params.mean_snr_sp / params.mean_snr_p
    return 1.0 - clear


def _pu_outage_at_su_idle(params: SystemParams) -> float:
    thr = 2.0 ** params.rate_p - 1.0
    if params.mean_snr_ps == 0.0:
        return 1.0
    return 1.0 - math.exp(-thr / params.mean_snr_ps)


def _mc_region_probs(params: SystemParams, rate_su: float, mc_samples: int,
                     seed: int):
    """Monte Carlo estimates (Pr decode PU, Pr decode SU, Pr buffer).

    Chunks are drawn sequentially from one seeded generator; per chunk the
    draw order is (gamma_s, gamma_ps).
    """
    cls = RegionClassifier(rate_su, params.rate_p)
    rng = np.random.default_rng(seed)
    n_gp = n_gs = n_buf = 0
    remaining = mc_samples
    while remaining > 0:
        m = min(_MC_CHUNK, remaining)
        gs = rng.exponential(params.mean_snr_s, m)
        gps = rng.exponential(params.mean_snr_ps, m)
        in_gp, in_gs, buf = cls.masks(gs, gps)
        n_gp += int(in_gp.sum())
        n_gs += int(in_gs.sum())
        n_buf += int(buf.sum())
        remaining -= m
    n = float(mc_samples)
    return n_gp / n, n_gs / n, n_buf / n


def _binomial_se(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


def link_stats(params: SystemParams, mc_samples: int = 10_000_000,
               seed: int = 1234) -> LinkStats:
    """Compute all fading-averaged link statistics for one scenario.

    Single-variable exponential outages use closed forms; the joint
    decoding probabilities at the secondary receiver (two-dimensional
    piecewise region) use Monte Carlo with the given sample count and
    seed. Deterministic for fixed (params, mc_samples, seed).
    """
    if mc_samples < 10 ** 5:
        raise ValueError("mc_samples must be at least 1e5")
    q_pp_i = outage_pp(params, su_active=False)
    q_pp_a = outage_pp(params, su_active=True)
    q_ps_i = _pu_outage_at_su_idle(params)

    pr_gp, pr_gs, p_buf = _mc_region_probs(params, params.rate_su,
                                           mc_samples, seed)
    q_ps_a = 1.0 - pr_gp
    t_su = params.rate_su * pr_gs

    thr_sk = 2.0 ** params.rate_sk - 1.0
    t_sk = (params.rate_sk * math.exp(-thr_sk / params.mean_snr_s)
            if params.mean_snr_s > 0 else 0.0)

    return LinkStats(
        q_pp_idle=q_pp_i,
        q_pp_active=q_pp_a,
        q_ps_idle=q_ps_i,
        q_ps_active=q_ps_a,
        p_buf=p_buf,
        t_su=t_su,
        t_sk=t_sk,
        t_p_idle=params.rate_p * (1.0 - q_pp_i),
        t_p_active=params.rate_p * (1.0 - q_pp_a),
        rate_p=params.rate_p,
        rate_su=params.rate_su,
        rate_sk=params.rate_sk,
        stderr_q_ps_active=_binomial_se(q_ps_a, mc_samples),
        stderr_p_buf=_binomial_se(p_buf, mc_samples),
        stderr_t_su=params.rate_su * _binomial_se(pr_gs, mc_samples),
    )


def _golden_max(f, lo: float, hi: float, tol: float, n_grid: int = 65) -> float:
    """Maximize a unimodal-after-bracketing scalar function.

    A coarse grid first brackets the maximum (robust against flat tails
    where the objective is exactly zero), then golden-section refines to
    absolute tolerance ``tol`` on the argument. Ties prefer the left
    subinterval, so plateaus cannot push the bracket off the peak.
    """
    grid = np.linspace(lo, hi, n_grid)
    vals = [f(float(x)) for x in grid]
    i = int(np.argmax(vals))
    a = float(grid[max(i - 1, 0)])
    b = float(grid[min(i + 1, n_grid - 1)])
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def optimize_rate(objective: str, params: SystemParams,
                  mc_samples: int = 10 ** 6, seed: int = 1234) -> float:
    """Find the rate maximizing one of the three per-slot throughputs.

    The interfered secondary objective is evaluated against one fixed set
    of Monte Carlo draws (common random numbers across evaluations), which
    is equivalent to re-running `link_stats` with the same seed for every
    candidate rate.
    """
    lo, hi = RATE_BRACKET
    if objective == PU_IDLE_THROUGHPUT:
        if params.mean_snr_p <= 0:
            raise ValueError("mean_snr_p must be positive")
        snr = params.mean_snr_p
        return _golden_max(lambda r: r * math.exp(-(2.0 ** r - 1.0) / snr),
                           lo, hi, RATE_TOL)
    if objective == SU_CLEAN_THROUGHPUT:
        if params.mean_snr_s <= 0:
            raise ValueError("mean_snr_s must be positive")
        snr = params.mean_snr_s
        return _golden_max(lambda r: r * math.exp(-(2.0 ** r - 1.0) / snr),
                           lo, hi, RATE_TOL)
    if objective == SU_INTERFERED_THROUGHPUT:
        if params.mean_snr_s <= 0:
            raise ValueError("mean_snr_s must be positive")
        rng = np.random.default_rng(seed)
        gs_chunks, gps_chunks = [], []
        remaining = mc_samples
        while remaining > 0:       # same chunked draw order as link_stats
            m = min(_MC_CHUNK, remaining)
            gs_chunks.append(rng.exponential(params.mean_snr_s, m))
            gps_chunks.append(rng.exponential(params.mean_snr_ps, m))
            remaining -= m
        gs = np.concatenate(gs_chunks)
        gps = np.concatenate(gps_chunks)

        def t_su_of(r: float) -> float:
            _, in_gs, _ = RegionClassifier(r, params.rate_p).masks(gs, gps)
            return r * float(in_gs.mean())

        return _golden_max(t_su_of, lo, hi, RATE_TOL)
    raise ValueError(f"unknown objective {objective!r}")
