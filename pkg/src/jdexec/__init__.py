"""Optimal trade execution under a jump-diffusion midprice.

The package connects three layers:

1. :mod:`jdexec.microstructure` -- tick-level models (two-state mark
   chains, renewal and self-exciting arrivals) and exact path samplers.
2. :mod:`jdexec.coefficients` -- closed-form diffusion-approximation
   coefficients turning those primitives into effective dynamics.
3. :mod:`jdexec.hjb` and :mod:`jdexec.strategy_sim` -- the trading-speed
   PDE solver and the seeded strategy simulator with full accounting.

:mod:`jdexec.cli` ties the layers into a deterministic file pipeline
(``jdexec coeffs|solve|simulate|report``).
"""

from .coefficients import (
    CoefficientReport,
    EffectiveDynamics,
    a_star,
    effective_dynamics_direct,
    effective_dynamics_hp,
    effective_dynamics_sm,
    eta_hp,
    eta_sm,
    pi_star,
    s_star,
    sigma_bar_hp,
    sigma_bar_sm,
    sigma_star_hp,
    sigma_star_sm,
    varsigma_hp,
    varsigma_sm,
)
from .hjb import (
    Grid,
    HSurface,
    ProblemConfig,
    ProblemKind,
    backward_step,
    build_grid,
    load_surface_csv,
    lookup_h,
    save_surface_csv,
    solve_surface,
)
from .microstructure import (
    EventStream,
    HawkesParams,
    JumpDiffusionModel,
    ScalingStats,
    SemiMarkovParams,
    TickChainParams,
    empirical_scaling_stats,
    sample_hawkes_events,
    sample_renewal_events,
    simulate_jump_diffusion_path,
    step_tick_chain,
)
from .strategy_sim import (
    SimulationRecord,
    StopReason,
    SummaryStats,
    ac_benchmark_curves,
    ac_speed,
    aggregate,
    execution_price,
    optimal_speed,
    run_batch,
    run_strategy_path,
    simulate_price_step,
)

__version__ = "0.1.0"

__all__ = [
    "CoefficientReport",
    "EffectiveDynamics",
    "EventStream",
    "Grid",
    "HSurface",
    "HawkesParams",
    "JumpDiffusionModel",
    "ProblemConfig",
    "ProblemKind",
    "ScalingStats",
    "SemiMarkovParams",
    "SimulationRecord",
    "StopReason",
    "SummaryStats",
    "TickChainParams",
    "a_star",
    "ac_benchmark_curves",
    "ac_speed",
    "aggregate",
    "backward_step",
    "build_grid",
    "effective_dynamics_direct",
    "effective_dynamics_hp",
    "effective_dynamics_sm",
    "empirical_scaling_stats",
    "eta_hp",
    "eta_sm",
    "execution_price",
    "load_surface_csv",
    "lookup_h",
    "optimal_speed",
    "pi_star",
    "run_batch",
    "run_strategy_path",
    "s_star",
    "sample_hawkes_events",
    "sample_renewal_events",
    "save_surface_csv",
    "sigma_bar_hp",
    "sigma_bar_sm",
    "sigma_star_hp",
    "sigma_star_sm",
    "simulate_jump_diffusion_path",
    "simulate_price_step",
    "solve_surface",
    "step_tick_chain",
    "varsigma_hp",
    "varsigma_sm",
    "__version__",
]
