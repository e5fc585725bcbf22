"""
Solving the trading-speed surface
=================================

Solves the dynamic-programming equation for the optimal acquisition speed
h(t, S) on a time/price grid, inspects a few slices, and checks the quiet
(zero-volatility, zero-penalty) limit against its closed form.
"""

import numpy as np

from jdexec.coefficients import effective_dynamics_direct
from jdexec.hjb import ProblemConfig, build_grid, lookup_h, solve_surface

# The calibrated problem: acquire 1 unit over T = 1 day, price band
# [29.0, 31.1], terminal penalty slope alpha, temporary impact kappa,
# running inventory penalty phi.
dynamics = effective_dynamics_direct(sigma=0.1041, sigma_bar=0.01598, varsigma=0.1323)
config = ProblemConfig(
    kind="acquisition",
    dynamics=dynamics,
    s0=30.97,
    horizon=1.0,
    s_min=29.0,
    s_max=31.1,
    alpha=0.01,
    kappa=1e-4,
    phi=1e-5,
    spread=0.01,
    target_inventory=1.0,
)

# 390 time steps by 1000 price steps. The grid builder enforces the
# stability bound dt * alpha / kappa < 1 and will suggest a larger N if
# the requested one is too coarse.
grid = build_grid(config, 390, 1000)
surface = solve_surface(config, grid)
print("surface shape (time x price):", surface.values.shape)

# At maturity the speed equals the terminal penalty slope everywhere, and
# on the active barrier (S_max for acquisition) at every time.
print("terminal row unique values:", np.unique(surface.values[-1]))
print("barrier column unique values:", np.unique(surface.values[:, -1]))

# Earlier in the day the optimal speed is lower: there is still time to
# wait for favourable prices.
for t in (0.0, 0.5, 0.9, 1.0):
    print(f"h(t={t:.1f}, S0) = {lookup_h(surface, t, config.s0):.6f}")

# The speed increases toward the barrier: the closer the price is to
# forcing an early stop, the more urgently the remaining inventory trades.
row = surface.values[0]
print("h(0, S) rises across the band:", row[0] < row[len(row) // 2] < row[-2])

# Quiet limit: with sigma_total = 0 and phi = 0 the equation loses its
# diffusion and penalty terms and h solves a Riccati equation with the
# closed form 1 / (1/alpha + (T - t)/kappa), independent of S.
quiet_cfg = ProblemConfig(
    kind="acquisition",
    dynamics=effective_dynamics_direct(0.0, 0.0, 0.0),
    s0=30.97,
    horizon=1.0,
    s_min=29.0,
    s_max=31.1,
    alpha=0.01,
    kappa=1e-4,
    phi=0.0,
    spread=0.01,
    target_inventory=1.0,
)
quiet_grid = build_grid(quiet_cfg, 3900, 10)
quiet = solve_surface(quiet_cfg, quiet_grid)
closed = 1.0 / (1.0 / 0.01 + (1.0 - quiet_grid.times) / 1e-4)
err = np.max(np.abs(quiet.values[:, :-1] - closed[:, None]))
print("max quiet-limit error vs closed form (N=3900):", err)
