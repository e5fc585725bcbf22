"""Strategy simulation: seeded price paths, policy execution, accounting.

Each path walks the solver's time grid.  At every step the current price
is looked up in the h-surface, the per-unit rate ``h/kappa`` is scaled by
the outstanding inventory to get the trading speed, a slice ``nu*dt`` is
executed at the impacted price, and the midprice then diffuses with
volatility ``sigma_total``.  A path stops at the first of: inventory
complete, price barrier touched or crossed, maturity.  On a barrier or
maturity stop the remainder trades immediately at the stop price plus the
terminal penalty ``alpha`` per unit.

Paths are reproducible: path ``i`` of a batch draws its normals from a
generator seeded with ``(base_seed, i)``, and the vectorised batch engine
produces bit-identical records to the scalar single-path engine.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Sequence
from dataclasses import dataclass, replace

import numpy as np

from .coefficients import EffectiveDynamics
from .hjb import Grid, HSurface, ProblemConfig, ProblemKind

__all__ = [
    "SimulationRecord",
    "StopReason",
    "SummaryStats",
    "ac_benchmark_curves",
    "ac_speed",
    "aggregate",
    "execution_price",
    "optimal_speed",
    "run_batch",
    "run_strategy_path",
    "simulate_price_step",
]

_N_VALUE_BINS = 100
_N_PRICE_BINS = 50
_N_SAMPLE_RECORDS = 5


class StopReason(enum.Enum):
    MATURITY = "Maturity"
    PRICE_BARRIER = "PriceBarrier"
    INVENTORY_COMPLETE = "InventoryComplete"


_REASON_CODES = (StopReason.MATURITY, StopReason.PRICE_BARRIER, StopReason.INVENTORY_COMPLETE)


@dataclass(frozen=True)
class SimulationRecord:
    """Full accounting of one simulated path.

    All series share one length and are indexed by grid step up to the stop
    step inclusive.  ``prices`` and ``inventories`` are pre-trade states;
    ``speeds``, ``exec_prices`` and ``cash`` reflect the trade at that step
    (cumulative for ``cash``).  At the stop step the speed is zero and, if
    units remain, ``exec_prices`` holds the per-unit penalty price and
    ``cash`` includes the penalty trade.
    """

    path_id: int
    times: np.ndarray
    prices: np.ndarray
    inventories: np.ndarray
    speeds: np.ndarray
    cash: np.ndarray
    exec_prices: np.ndarray
    stop_time: float
    stop_reason: StopReason
    terminal_units: float
    average_execution_price: float


@dataclass(frozen=True)
class SummaryStats:
    """Batch aggregates over all simulated paths.

    Heat maps and mean curves live on the solver time grid (``times``) with
    stopped paths contributing their completed terminal state from the stop
    step onward.  The AC benchmark curves are NaN until attached by
    :func:`run_batch` (they need the problem config and ``phi > 0``).
    Per-path arrays (``stop_times`` through ``terminal_units``) are indexed
    by ``path_id``.
    """

    n_paths: int
    times: np.ndarray
    avg_exec_price_edges: np.ndarray
    avg_exec_price_counts: np.ndarray
    inventory_bin_edges: np.ndarray
    inventory_heatmap: np.ndarray
    speed_bin_edges: np.ndarray
    speed_heatmap: np.ndarray
    mean_inventory_curve: np.ndarray
    mean_speed_curve: np.ndarray
    ac_mean_inventory_curve: np.ndarray
    ac_mean_speed_curve: np.ndarray
    stop_reason_counts: dict
    stop_times: np.ndarray
    stop_reasons: np.ndarray
    avg_exec_prices: np.ndarray
    final_prices: np.ndarray
    terminal_units: np.ndarray


def simulate_price_step(
    s: float, dt: float, dynamics: EffectiveDynamics, rng: np.random.Generator
) -> float:
    """One Euler step of the midprice: ``S + sigma_total*sqrt(dt)*z``."""
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    z = rng.standard_normal()
    return s + dynamics.sigma_total * math.sqrt(dt) * z


def optimal_speed(h_value: float, remaining: float, kappa: float) -> float:
    """Trading speed ``remaining * h / kappa`` for the outstanding inventory."""
    if remaining < 0.0:
        raise ValueError(f"remaining must be nonnegative, got {remaining}")
    if kappa <= 0.0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    return remaining * h_value / kappa


def execution_price(s: float, nu: float, config: ProblemConfig) -> float:
    """Per-unit price of trading at speed ``nu``: half spread plus temporary
    impact ``kappa*nu``, paid above the midprice when acquiring and below
    when liquidating."""
    if nu < 0.0:
        raise ValueError(f"nu must be nonnegative, got {nu}")
    if config.kind is ProblemKind.ACQUISITION:
        return s + 0.5 * config.spread + config.kappa * nu
    return s - 0.5 * config.spread - config.kappa * nu


def ac_speed(t: float, config: ProblemConfig) -> float:
    """Benchmark per-unit trading rate without barriers or price feedback.

    With ``gamma = sqrt(phi/kappa)``, ``xi = (alpha + sqrt(kappa*phi)) /
    (alpha - sqrt(kappa*phi))`` and ``E = xi*exp(2*gamma*(T - t))``, the
    acquisition rate is ``sqrt(kappa*phi)*(E + 1)/(E - 1)``; the
    liquidation expression is its negative and the magnitude is returned.
    At ``t = T`` both reduce algebraically to ``alpha``.
    """
    if config.phi <= 0.0:
        raise ValueError("benchmark rate requires phi > 0")
    root_kp = math.sqrt(config.kappa * config.phi)
    if config.alpha == root_kp:
        raise ValueError("alpha equal to sqrt(kappa*phi) makes the benchmark singular")
    gamma = math.sqrt(config.phi / config.kappa)
    xi = (config.alpha + root_kp) / (config.alpha - root_kp)
    e_val = xi * math.exp(2.0 * gamma * (config.horizon - t))
    if config.kind is ProblemKind.ACQUISITION:
        return root_kp * (e_val + 1.0) / (e_val - 1.0)
    return abs(root_kp * (1.0 + e_val) / (1.0 - e_val))


def ac_benchmark_curves(
    config: ProblemConfig, times: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic benchmark inventory and speed on the given time grid.

    The benchmark rate is applied per unit outstanding (``nu = y *
    ac_speed/kappa``) and integrated by the same forward Euler rule as the
    simulator, capped so the inventory never overshoots.  Returns
    ``(inventory_curve, speed_curve)`` where the inventory is expressed as
    units acquired (acquisition) or units still held (liquidation).
    """
    acquiring = config.kind is ProblemKind.ACQUISITION
    target = config.target_inventory
    y = target
    inventory = np.empty(len(times), dtype=np.float64)
    speed = np.empty(len(times), dtype=np.float64)
    for j, t in enumerate(times):
        nu = y * ac_speed(float(t), config) / config.kappa
        inventory[j] = target - y if acquiring else y
        speed[j] = nu
        if j + 1 < len(times):
            step = float(times[j + 1] - times[j])
            y -= min(nu * step, y)
    return inventory, speed


def _col_values_nearest(values_row: np.ndarray, s, grid: Grid):
    s_min = grid.prices[0]
    s_max = grid.prices[-1]
    x = (np.clip(s, s_min, s_max) - s_min) / grid.ds
    col = np.clip(np.rint(x).astype(np.int64), 0, grid.m_steps)
    return values_row[col]


def _col_values_interp(values_row: np.ndarray, s, grid: Grid):
    s_min = grid.prices[0]
    s_max = grid.prices[-1]
    x = (np.clip(s, s_min, s_max) - s_min) / grid.ds
    i0 = np.clip(np.floor(x).astype(np.int64), 0, grid.m_steps - 1)
    w = x - i0
    return (1.0 - w) * values_row[i0] + w * values_row[i0 + 1]


def _path_normals(base_seed: int, path_id: int, n: int) -> np.ndarray:
    gen = np.random.default_rng(np.random.SeedSequence([base_seed, path_id]))
    return gen.standard_normal(n)


def run_strategy_path(
    surface: HSurface,
    config: ProblemConfig,
    path_id: int,
    base_seed: int,
    interp: bool = False,
) -> SimulationRecord:
    """Simulate a single path; see the module docstring for the step rules.

    The per-step stop checks run in the order: inventory complete, barrier
    touched or crossed, maturity.
    """
    grid = surface.grid
    n_steps = grid.n_steps
    acquiring = config.kind is ProblemKind.ACQUISITION
    target = config.target_inventory
    dt = grid.dt
    vol_step = config.dynamics.sigma_total * math.sqrt(dt)
    z = _path_normals(base_seed, path_id, n_steps)
    lookup = _col_values_interp if interp else _col_values_nearest

    s = config.s0
    rem = target
    cash = 0.0

    times: list[float] = []
    prices: list[float] = []
    inventories: list[float] = []
    speeds: list[float] = []
    cash_series: list[float] = []
    exec_prices: list[float] = []
    stop_reason = None
    terminal_units = 0.0

    for n in range(n_steps + 1):
        t = float(grid.times[n])
        q = target - rem if acquiring else rem
        times.append(t)
        prices.append(s)
        inventories.append(q)

        if rem <= 0.0:
            stop_reason = StopReason.INVENTORY_COMPLETE
        elif (s >= config.s_max) if acquiring else (s <= config.s_min):
            stop_reason = StopReason.PRICE_BARRIER
        elif n == n_steps:
            stop_reason = StopReason.MATURITY

        if stop_reason is not None:
            speeds.append(0.0)
            if rem > 0.0:
                unit_price = s + config.alpha * rem if acquiring else s - config.alpha * rem
                cash = cash + unit_price * rem
                terminal_units = rem
                exec_prices.append(unit_price)
            else:
                exec_prices.append(s)
            cash_series.append(cash)
            break

        h = float(lookup(surface.values[n], s, grid))
        nu = rem * h / config.kappa
        qty = nu * dt
        if qty >= rem:
            qty = rem
            nu = rem / dt
        shat = execution_price(s, nu, config)
        cash = cash + shat * qty
        rem = rem - qty
        speeds.append(nu)
        exec_prices.append(shat)
        cash_series.append(cash)

        s = s + vol_step * z[n]

    return SimulationRecord(
        path_id=path_id,
        times=np.array(times, dtype=np.float64),
        prices=np.array(prices, dtype=np.float64),
        inventories=np.array(inventories, dtype=np.float64),
        speeds=np.array(speeds, dtype=np.float64),
        cash=np.array(cash_series, dtype=np.float64),
        exec_prices=np.array(exec_prices, dtype=np.float64),
        stop_time=times[-1],
        stop_reason=stop_reason,
        terminal_units=terminal_units,
        average_execution_price=cash / target,
    )


def _run_batch_paths(
    surface: HSurface,
    config: ProblemConfig,
    n_paths: int,
    base_seed: int,
    interp: bool,
) -> list[SimulationRecord]:
    """Vectorised lockstep engine; bit-identical to run_strategy_path."""
    grid = surface.grid
    n_steps = grid.n_steps
    acquiring = config.kind is ProblemKind.ACQUISITION
    target = config.target_inventory
    dt = grid.dt
    vol_step = config.dynamics.sigma_total * math.sqrt(dt)
    lookup = _col_values_interp if interp else _col_values_nearest

    z_matrix = np.empty((n_paths, n_steps), dtype=np.float64)
    for i in range(n_paths):
        z_matrix[i] = _path_normals(base_seed, i, n_steps)

    s_vec = np.full(n_paths, config.s0, dtype=np.float64)
    rem = np.full(n_paths, target, dtype=np.float64)
    cash = np.zeros(n_paths, dtype=np.float64)
    stop_idx = np.full(n_paths, -1, dtype=np.int64)
    reason_code = np.zeros(n_paths, dtype=np.int64)
    terminal_units = np.zeros(n_paths, dtype=np.float64)

    shape = (n_paths, n_steps + 1)
    prices_m = np.zeros(shape, dtype=np.float64)
    inv_m = np.zeros(shape, dtype=np.float64)
    speed_m = np.zeros(shape, dtype=np.float64)
    cash_m = np.zeros(shape, dtype=np.float64)
    exec_m = np.zeros(shape, dtype=np.float64)

    active = np.ones(n_paths, dtype=bool)
    for n in range(n_steps + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        s_a = s_vec[idx]
        rem_a = rem[idx]
        prices_m[idx, n] = s_a
        inv_m[idx, n] = target - rem_a if acquiring else rem_a

        done = rem_a <= 0.0
        barrier = ~done & ((s_a >= config.s_max) if acquiring else (s_a <= config.s_min))
        mature = np.zeros(idx.size, dtype=bool)
        if n == n_steps:
            mature = ~done & ~barrier
        stopping = done | barrier | mature

        if stopping.any():
            sidx = idx[stopping]
            rem_s = rem[sidx]
            penalised = rem_s > 0.0
            pidx = sidx[penalised]
            if pidx.size:
                rem_p = rem[pidx]
                unit_price = (
                    s_vec[pidx] + config.alpha * rem_p
                    if acquiring
                    else s_vec[pidx] - config.alpha * rem_p
                )
                cash[pidx] = cash[pidx] + unit_price * rem_p
                terminal_units[pidx] = rem_p
                exec_m[pidx, n] = unit_price
            zidx = sidx[~penalised]
            exec_m[zidx, n] = s_vec[zidx]
            speed_m[sidx, n] = 0.0
            cash_m[sidx, n] = cash[sidx]
            stop_idx[sidx] = n
            reason_code[sidx[done[stopping]]] = _REASON_CODES.index(
                StopReason.INVENTORY_COMPLETE
            )
            reason_code[sidx[barrier[stopping]]] = _REASON_CODES.index(
                StopReason.PRICE_BARRIER
            )
            reason_code[sidx[mature[stopping]]] = _REASON_CODES.index(StopReason.MATURITY)
            active[sidx] = False

        trading = ~stopping
        tid = idx[trading]
        if tid.size == 0:
            continue
        s_t = s_vec[tid]
        rem_t = rem[tid]
        h = lookup(surface.values[n], s_t, grid)
        nu = rem_t * h / config.kappa
        qty = nu * dt
        cap = qty >= rem_t
        if cap.any():
            qty = np.where(cap, rem_t, qty)
            nu = np.where(cap, rem_t / dt, nu)
        if acquiring:
            shat = s_t + 0.5 * config.spread + config.kappa * nu
        else:
            shat = s_t - 0.5 * config.spread - config.kappa * nu
        cash[tid] = cash[tid] + shat * qty
        rem[tid] = rem_t - qty
        speed_m[tid, n] = nu
        exec_m[tid, n] = shat
        cash_m[tid, n] = cash[tid]
        s_vec[tid] = s_t + vol_step * z_matrix[tid, n]

    records = []
    for i in range(n_paths):
        k = int(stop_idx[i])
        end = k + 1
        records.append(
            SimulationRecord(
                path_id=i,
                times=grid.times[:end].copy(),
                prices=prices_m[i, :end].copy(),
                inventories=inv_m[i, :end].copy(),
                speeds=speed_m[i, :end].copy(),
                cash=cash_m[i, :end].copy(),
                exec_prices=exec_m[i, :end].copy(),
                stop_time=float(grid.times[k]),
                stop_reason=_REASON_CODES[reason_code[i]],
                terminal_units=float(terminal_units[i]),
                average_execution_price=float(cash[i] / target),
            )
        )
    return records


def _bin_indices(matrix: np.ndarray, lo: float, hi: float, n_bins: int) -> np.ndarray:
    if hi > lo:
        width = (hi - lo) / n_bins
        return np.clip(
            np.floor((matrix - lo) / width).astype(np.int64), 0, n_bins - 1
        )
    return np.zeros(matrix.shape, dtype=np.int64)


def _value_heatmap(matrix: np.ndarray, n_bins: int) -> tuple[np.ndarray, np.ndarray]:
    lo = float(matrix.min())
    hi = float(matrix.max())
    edges = np.linspace(lo, hi if hi > lo else lo + 1.0, n_bins + 1)
    codes = _bin_indices(matrix, lo, hi, n_bins)
    n_times = matrix.shape[1]
    heat = np.empty((n_times, n_bins), dtype=np.int64)
    for j in range(n_times):
        heat[j] = np.bincount(codes[:, j], minlength=n_bins)
    return edges, heat


def aggregate(records: Sequence[SimulationRecord]) -> SummaryStats:
    """Aggregate a batch of records into histograms, heat maps and curves.

    The time axis is the longest record's grid (all records are prefixes of
    one solver grid).  From its stop step onward each path contributes its
    completed terminal state: inventory at the target (acquisition) or zero
    (liquidation), speed zero.  The direction and target are reconstructed
    from the records (acquisition paths start at inventory exactly 0).
    """
    if not records:
        raise ValueError("aggregate needs at least one record")
    n_paths = len(records)
    longest = max(records, key=lambda r: r.times.size)
    times = longest.times
    n_times = times.size
    acquiring = records[0].inventories[0] == 0.0

    inv_matrix = np.empty((n_paths, n_times), dtype=np.float64)
    speed_matrix = np.zeros((n_paths, n_times), dtype=np.float64)
    for i, rec in enumerate(records):
        k = rec.times.size
        completed = (
            rec.inventories[-1] + rec.terminal_units
            if acquiring
            else rec.inventories[-1] - rec.terminal_units
        )
        inv_matrix[i, : k - 1] = rec.inventories[:-1]
        inv_matrix[i, k - 1 :] = completed
        speed_matrix[i, :k] = rec.speeds

    avg_prices = np.array([r.average_execution_price for r in records])
    counts, edges = np.histogram(avg_prices, bins=_N_PRICE_BINS)

    inv_edges, inv_heat = _value_heatmap(inv_matrix, _N_VALUE_BINS)
    speed_edges, speed_heat = _value_heatmap(speed_matrix, _N_VALUE_BINS)

    reason_counts = {reason.value: 0 for reason in _REASON_CODES}
    for rec in records:
        reason_counts[rec.stop_reason.value] += 1

    nan_curve = np.full(n_times, np.nan)
    return SummaryStats(
        n_paths=n_paths,
        times=times.copy(),
        avg_exec_price_edges=edges,
        avg_exec_price_counts=counts,
        inventory_bin_edges=inv_edges,
        inventory_heatmap=inv_heat,
        speed_bin_edges=speed_edges,
        speed_heatmap=speed_heat,
        mean_inventory_curve=inv_matrix.mean(axis=0),
        mean_speed_curve=speed_matrix.mean(axis=0),
        ac_mean_inventory_curve=nan_curve,
        ac_mean_speed_curve=nan_curve.copy(),
        stop_reason_counts=reason_counts,
        stop_times=np.array([r.stop_time for r in records]),
        stop_reasons=np.array([r.stop_reason.value for r in records]),
        avg_exec_prices=avg_prices,
        final_prices=np.array([r.prices[-1] for r in records]),
        terminal_units=np.array([r.terminal_units for r in records]),
    )


def run_batch(
    surface: HSurface,
    config: ProblemConfig,
    n_paths: int,
    base_seed: int,
    interp: bool = False,
) -> tuple[list[SimulationRecord], SummaryStats]:
    """Run ``n_paths`` seeded paths; returns the first five full records and
    the batch aggregates.

    Path ``i`` draws from a stream seeded with ``(base_seed, i)``, so the
    output is a pure function of ``(surface, config, n_paths, base_seed)``.
    The benchmark mean curves are attached when ``phi > 0`` (the benchmark
    rate is undefined otherwise); being deterministic, their mean over the
    batch equals the single benchmark trajectory.
    """
    if n_paths < 1:
        raise ValueError(f"n_paths must be at least 1, got {n_paths}")
    records = _run_batch_paths(surface, config, n_paths, base_seed, interp)
    stats = aggregate(records)
    if config.phi > 0.0 and config.alpha != math.sqrt(config.kappa * config.phi):
        ac_inv, ac_spd = ac_benchmark_curves(config, stats.times)
        stats = replace(
            stats, ac_mean_inventory_curve=ac_inv, ac_mean_speed_curve=ac_spd
        )
    return records[:_N_SAMPLE_RECORDS], stats
