"""Optimal secondary channel-access policies for spectrum sharing with a
retransmitting primary user, with interference cancellation at the
secondary receiver."""

from .channel import (BOTH_DECODED, BUFFERED, LOST, PU_IDLE_THROUGHPUT,
                      PU_ONLY, SU_CLEAN_THROUGHPUT, SU_INTERFERED_THROUGHPUT,
                      SU_ONLY, LinkStats, RegionClassifier, SystemParams,
                      link_stats, optimize_rate, outage_pp, region_membership)
from .degenerate import (DegenerateParams, a0_a1, b_max, degenerate_params,
                         delta_s, hp_condition, unconstrained_optimal)
from .experiments import (DEADLINE, EXPLICIT, FIC_BIC, FIC_ONLY, GPS_RATIO,
                          GSP_RATIO, NO_IC, PM_KNOWN, RSU_EQ_RSK, RSU_RATIO,
                          RSU_STAR, SCHEMES, TS_VS_TP, Scenario, derive_rates,
                          evaluate_scheme, sweep, write_csv)
from .mdp import (ACCESS, ACTIVE, DURATION, IDLE, PHI_K, PHI_U, ROOT,
                  THROUGHPUT, CycleValues, NetState, Policy, PolicyMetrics,
                  cycle_values, enumerate_states, idle_policy,
                  k_active_policy, long_term_metrics, policy_from_json_obj,
                  policy_to_json_obj, state_reward, stationary_distribution,
                  transition_row)
from .optimizer import (EfficiencyReport, PolicyPath, access_rate_budget,
                        blend_policies, cycle_derivatives, efficiency,
                        efficiency_report, greedy_policy_path,
                        low_regime_policy, optimal_policy)
from .oracle import FrontierPoint, enumerate_frontier, oracle_optimum
from .simulator import (SimConfig, SimResult, empirical_transition_check,
                        run)

__version__ = "0.1.0"
