"""Command-line pipeline: validated configs in, deterministic files out.

Subcommands:

* ``coeffs``   -- print the derived coefficient report as JSON.
* ``solve``    -- solve the trading-speed surface; write ``surface.csv``
  plus ``surface_meta.json`` (config echo, checksum, wall time) to ``--out``.
* ``simulate`` -- verify the surface in ``--out`` against the config, run
  the path batch, write sample paths and summary CSVs alongside.
* ``report``   -- print a human-readable summary of a finished run.

Every emitted data byte is a pure function of (config, seed): reruns of
``solve`` give a byte-identical surface and reruns of ``simulate`` give
byte-identical outputs.  Exit codes: 2 config/validation errors, 3 solver
errors, 4 surface/config mismatch, 5 missing report inputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .coefficients import (
    EffectiveDynamics,
    effective_dynamics_direct,
    effective_dynamics_hp,
    effective_dynamics_sm,
)
from .hjb import (
    HSurface,
    ProblemConfig,
    build_grid,
    load_surface_csv,
    save_surface_csv,
    solve_surface,
)
from .microstructure import HawkesParams, SemiMarkovParams, TickChainParams
from .strategy_sim import SummaryStats, run_batch

__all__ = ["ConfigError", "RunConfig", "load_config", "main"]

EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_MISMATCH = 4
EXIT_MISSING = 5

SURFACE_FILE = "surface.csv"
META_FILE = "surface_meta.json"
PATHS_FILE = "paths.csv"
HIST_FILE = "histogram.csv"
INV_HEAT_FILE = "inventory_heatmap.csv"
SPEED_HEAT_FILE = "speed_heatmap.csv"
CURVES_FILE = "mean_curves.csv"
REASONS_FILE = "stop_reasons.csv"
PATH_STATS_FILE = "path_stats.csv"

_REASON_ORDER = ("Maturity", "PriceBarrier", "InventoryComplete")


class ConfigError(ValueError):
    """Configuration file is malformed or violates a model constraint."""


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration.

    ``raw`` preserves the parsed JSON for byte-faithful echoing into the
    surface metadata; ``problem`` carries the built dynamics.
    """

    problem: ProblemConfig
    n_steps: int
    m_steps: int
    n_paths: int
    base_seed: int
    dynamics_mode: str
    raw: dict


def _check_keys(block: dict, path: str, required: tuple, optional: tuple = ()) -> None:
    if not isinstance(block, dict):
        raise ConfigError(f"{path}: expected an object")
    missing = [k for k in required if k not in block]
    if missing:
        raise ConfigError(f"{path}: missing keys {missing}")
    unknown = sorted(set(block) - set(required) - set(optional))
    if unknown:
        raise ConfigError(f"{path}: unknown keys {unknown}")


def _number(block: dict, path: str, key: str) -> float:
    value = block[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {value!r}")
    return float(value)


def _integer(block: dict, path: str, key: str) -> int:
    value = block[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}.{key}: expected an integer, got {value!r}")
    return value


def _build_dynamics(block: Any) -> tuple[str, EffectiveDynamics]:
    if not isinstance(block, dict):
        raise ConfigError("dynamics: expected an object")
    modes = [k for k in ("sm", "hp", "direct") if k in block]
    unknown = sorted(set(block) - {"sm", "hp", "direct"})
    if unknown:
        raise ConfigError(f"dynamics: unknown keys {unknown}")
    if len(modes) == 0:
        raise ConfigError("dynamics: one of 'sm', 'hp' or 'direct' is required")
    if len(modes) > 1:
        raise ConfigError(f"dynamics: conflicting modes {modes}; provide exactly one")
    mode = modes[0]
    sub = block[mode]
    path = f"dynamics.{mode}"
    try:
        if mode == "sm":
            _check_keys(
                sub,
                path,
                ("delta", "p_cont", "p_cont_prime", "family", "family_params", "sigma"),
                ("pi_weight", "sigma_bar"),
            )
            tick = TickChainParams(
                delta=_number(sub, path, "delta"),
                p_cont=_number(sub, path, "p_cont"),
                p_cont_prime=_number(sub, path, "p_cont_prime"),
            )
            family = sub["family"]
            params = sub["family_params"]
            if not isinstance(params, list) or not all(
                isinstance(p, (int, float)) and not isinstance(p, bool) for p in params
            ):
                raise ConfigError(f"{path}.family_params: expected a list of numbers")
            if family == "exponential":
                if len(params) != 1:
                    raise ConfigError(f"{path}.family_params: exponential takes [mean]")
                arrivals = SemiMarkovParams.exponential(float(params[0]))
            elif family == "gamma":
                if len(params) != 2:
                    raise ConfigError(f"{path}.family_params: gamma takes [shape, scale]")
                arrivals = SemiMarkovParams.gamma(float(params[0]), float(params[1]))
            elif family == "lognormal":
                if len(params) != 2:
                    raise ConfigError(f"{path}.family_params: lognormal takes [mu, sigma]")
                arrivals = SemiMarkovParams.lognormal(float(params[0]), float(params[1]))
            else:
                raise ConfigError(
                    f"{path}.family: expected exponential, gamma or lognormal, got {family!r}"
                )
            pi_weight = _number(sub, path, "pi_weight") if "pi_weight" in sub else None
            sigma_bar = _number(sub, path, "sigma_bar") if "sigma_bar" in sub else None
            dynamics = effective_dynamics_sm(
                tick,
                arrivals,
                sigma=_number(sub, path, "sigma"),
                pi_weight=pi_weight,
                sigma_bar=sigma_bar,
            )
        elif mode == "hp":
            _check_keys(
                sub,
                path,
                (
                    "delta",
                    "p_cont",
                    "p_cont_prime",
                    "lambda_base",
                    "kernel_scale",
                    "kernel_decay",
                    "sigma",
                ),
                ("sigma_bar",),
            )
            tick = TickChainParams(
                delta=_number(sub, path, "delta"),
                p_cont=_number(sub, path, "p_cont"),
                p_cont_prime=_number(sub, path, "p_cont_prime"),
            )
            arrivals = HawkesParams(
                lambda_base=_number(sub, path, "lambda_base"),
                kernel_scale=_number(sub, path, "kernel_scale"),
                kernel_decay=_number(sub, path, "kernel_decay"),
            )
            sigma_bar = _number(sub, path, "sigma_bar") if "sigma_bar" in sub else None
            dynamics = effective_dynamics_hp(
                tick, arrivals, sigma=_number(sub, path, "sigma"), sigma_bar=sigma_bar
            )
        else:
            _check_keys(sub, path, ("sigma", "sigma_bar", "varsigma"), ("eta",))
            dynamics = effective_dynamics_direct(
                sigma=_number(sub, path, "sigma"),
                sigma_bar=_number(sub, path, "sigma_bar"),
                varsigma=_number(sub, path, "varsigma"),
                eta=_number(sub, path, "eta") if "eta" in sub else 0.0,
            )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return mode, dynamics


def _build_runconfig(data: Any) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("top level: expected an object")
    _check_keys(data, "top level", ("dynamics", "problem", "grid", "sim"))
    mode, dynamics = _build_dynamics(data["dynamics"])

    problem_block = data["problem"]
    _check_keys(
        problem_block,
        "problem",
        ("kind", "S0", "T", "S_min", "S_max", "alpha", "kappa", "phi"),
        ("spread", "target_inventory"),
    )
    if problem_block["kind"] not in ("acquisition", "liquidation"):
        raise ConfigError(
            f"problem.kind: expected 'acquisition' or 'liquidation', "
            f"got {problem_block['kind']!r}"
        )
    try:
        problem = ProblemConfig(
            kind=problem_block["kind"],
            dynamics=dynamics,
            s0=_number(problem_block, "problem", "S0"),
            horizon=_number(problem_block, "problem", "T"),
            s_min=_number(problem_block, "problem", "S_min"),
            s_max=_number(problem_block, "problem", "S_max"),
            alpha=_number(problem_block, "problem", "alpha"),
            kappa=_number(problem_block, "problem", "kappa"),
            phi=_number(problem_block, "problem", "phi"),
            spread=_number(problem_block, "problem", "spread")
            if "spread" in problem_block
            else 0.01,
            target_inventory=_number(problem_block, "problem", "target_inventory")
            if "target_inventory" in problem_block
            else 1.0,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"problem: {exc}") from exc

    grid_block = data["grid"]
    _check_keys(grid_block, "grid", ("N", "M"))
    n_steps = _integer(grid_block, "grid", "N")
    m_steps = _integer(grid_block, "grid", "M")

    sim_block = data["sim"]
    _check_keys(sim_block, "sim", ("n_paths", "base_seed"))
    n_paths = _integer(sim_block, "sim", "n_paths")
    base_seed = _integer(sim_block, "sim", "base_seed")
    if n_paths < 1:
        raise ConfigError(f"sim.n_paths: must be at least 1, got {n_paths}")
    if base_seed < 0:
        raise ConfigError(f"sim.base_seed: must be nonnegative, got {base_seed}")

    return RunConfig(
        problem=problem,
        n_steps=n_steps,
        m_steps=m_steps,
        n_paths=n_paths,
        base_seed=base_seed,
        dynamics_mode=mode,
        raw=data,
    )


def load_config(path) -> RunConfig:
    """Load and validate a JSON run configuration."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse error in {path}: {exc}") from exc
    return _build_runconfig(data)


def _fmt(value: float) -> str:
    return format(value, ".17g")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def cmd_coeffs(config: RunConfig, out_dir: Path | None = None) -> int:
    """Print the coefficient report as JSON (optionally also to a file)."""
    report = config.problem.dynamics.report
    payload = json.dumps(report.as_dict(), indent=2)
    print(payload)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "coefficients.json").write_text(payload + "\n", encoding="utf-8")
    return 0


def cmd_solve(config: RunConfig, out_dir: Path) -> int:
    """Solve the surface and write ``surface.csv`` plus metadata."""
    start = time.perf_counter()
    grid = build_grid(config.problem, config.n_steps, config.m_steps)
    surface = solve_surface(config.problem, grid)
    out_dir.mkdir(parents=True, exist_ok=True)
    surface_path = out_dir / SURFACE_FILE
    save_surface_csv(surface, surface_path)
    meta = {
        "config": config.raw,
        "surface_checksum_sha256": _sha256(surface_path),
        "wall_time_s": time.perf_counter() - start,
    }
    (out_dir / META_FILE).write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    print(f"surface written to {surface_path} "
          f"({grid.n_steps + 1}x{grid.m_steps + 1} nodes)")
    return 0


class _MismatchError(Exception):
    pass


def _load_surface_checked(config: RunConfig, out_dir: Path) -> HSurface:
    surface_path = out_dir / SURFACE_FILE
    meta_path = out_dir / META_FILE
    if not surface_path.exists() or not meta_path.exists():
        raise _MismatchError(
            f"surface artifacts not found in {out_dir}; run `solve --out {out_dir}` first"
        )
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    checksum = _sha256(surface_path)
    if checksum != meta.get("surface_checksum_sha256"):
        raise _MismatchError("surface checksum does not match its metadata")
    echoed = meta.get("config", {})
    for key in ("dynamics", "problem", "grid"):
        if echoed.get(key) != config.raw.get(key):
            raise _MismatchError(
                f"config block {key!r} does not match the one the surface was solved with"
            )
    times, prices, values = load_surface_csv(surface_path)
    grid = build_grid(config.problem, config.n_steps, config.m_steps)
    if values.shape != (grid.n_steps + 1, grid.m_steps + 1):
        raise _MismatchError("surface dimensions do not match the config grid")
    if not (np.array_equal(times, grid.times) and np.array_equal(prices, grid.prices)):
        raise _MismatchError("surface axes do not match the config grid")
    return HSurface(kind=config.problem.kind, grid=grid, values=values, config=config.problem)


def _write_paths_csv(path: Path, records) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write("path_id,step,t,S,Q,nu,cash,exec_price,stopped\n")
        for rec in records:
            last = rec.times.size - 1
            for j in range(rec.times.size):
                f.write(
                    f"{rec.path_id},{j},{_fmt(rec.times[j])},{_fmt(rec.prices[j])},"
                    f"{_fmt(rec.inventories[j])},{_fmt(rec.speeds[j])},"
                    f"{_fmt(rec.cash[j])},{_fmt(rec.exec_prices[j])},"
                    f"{int(j == last)}\n"
                )


def _write_histogram_csv(path: Path, stats: SummaryStats) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write("bin_lo,bin_hi,count\n")
        edges = stats.avg_exec_price_edges
        for b, count in enumerate(stats.avg_exec_price_counts):
            f.write(f"{_fmt(edges[b])},{_fmt(edges[b + 1])},{int(count)}\n")


def _write_heatmap_csv(path: Path, times, edges, heat) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write("t,bin_lo,bin_hi,count\n")
        for j, t in enumerate(times):
            t_str = _fmt(t)
            row = heat[j]
            for b in range(row.size):
                f.write(f"{t_str},{_fmt(edges[b])},{_fmt(edges[b + 1])},{int(row[b])}\n")


def _write_curves_csv(path: Path, stats: SummaryStats) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write("t,mean_Q,mean_nu,ac_Q,ac_nu\n")
        for j, t in enumerate(stats.times):
            f.write(
                f"{_fmt(t)},{_fmt(stats.mean_inventory_curve[j])},"
                f"{_fmt(stats.mean_speed_curve[j])},"
                f"{_fmt(stats.ac_mean_inventory_curve[j])},"
                f"{_fmt(stats.ac_mean_speed_curve[j])}\n"
            )


def _write_reasons_csv(path: Path, stats: SummaryStats) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write("reason,count\n")
        for reason in _REASON_ORDER:
            f.write(f"{reason},{stats.stop_reason_counts.get(reason, 0)}\n")


def _write_path_stats_csv(path: Path, stats: SummaryStats) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write("path_id,stop_time,stop_reason,avg_exec_price,terminal_units,final_price\n")
        for i in range(stats.n_paths):
            f.write(
                f"{i},{_fmt(stats.stop_times[i])},{stats.stop_reasons[i]},"
                f"{_fmt(stats.avg_exec_prices[i])},{_fmt(stats.terminal_units[i])},"
                f"{_fmt(stats.final_prices[i])}\n"
            )


def cmd_simulate(
    config: RunConfig,
    out_dir: Path,
    n_paths: int | None = None,
    base_seed: int | None = None,
    interp: bool = False,
) -> int:
    """Verify the solved surface against the config, run the batch, write CSVs."""
    surface = _load_surface_checked(config, out_dir)
    paths = config.n_paths if n_paths is None else n_paths
    seed = config.base_seed if base_seed is None else base_seed
    if paths < 1:
        raise ConfigError(f"--paths must be at least 1, got {paths}")
    if seed < 0:
        raise ConfigError(f"--seed must be nonnegative, got {seed}")
    records, stats = run_batch(surface, config.problem, paths, seed, interp=interp)
    _write_paths_csv(out_dir / PATHS_FILE, records)
    _write_histogram_csv(out_dir / HIST_FILE, stats)
    _write_heatmap_csv(
        out_dir / INV_HEAT_FILE, stats.times, stats.inventory_bin_edges, stats.inventory_heatmap
    )
    _write_heatmap_csv(
        out_dir / SPEED_HEAT_FILE, stats.times, stats.speed_bin_edges, stats.speed_heatmap
    )
    _write_curves_csv(out_dir / CURVES_FILE, stats)
    _write_reasons_csv(out_dir / REASONS_FILE, stats)
    _write_path_stats_csv(out_dir / PATH_STATS_FILE, stats)
    print(f"simulated {paths} paths (seed {seed}); outputs in {out_dir}")
    return 0


def cmd_report(out_dir: Path) -> int:
    """Print totals, execution-price moments, stop reasons and stop-time quantiles."""
    stats_path = out_dir / PATH_STATS_FILE
    reasons_path = out_dir / REASONS_FILE
    missing = [str(p) for p in (stats_path, reasons_path) if not p.exists()]
    if missing:
        raise FileNotFoundError(f"missing report inputs: {', '.join(missing)}")

    stop_times = []
    avg_prices = []
    with open(stats_path, "r", encoding="ascii") as f:
        header = f.readline().strip().split(",")
        idx_stop = header.index("stop_time")
        idx_price = header.index("avg_exec_price")
        for line in f:
            cells = line.strip().split(",")
            if len(cells) < len(header):
                continue
            stop_times.append(float(cells[idx_stop]))
            avg_prices.append(float(cells[idx_price]))
    if not stop_times:
        raise FileNotFoundError(f"no path rows in {stats_path}")

    reasons = {}
    with open(reasons_path, "r", encoding="ascii") as f:
        f.readline()
        for line in f:
            cells = line.strip().split(",")
            if len(cells) == 2:
                reasons[cells[0]] = int(cells[1])

    stop_times_arr = np.array(stop_times)
    avg_prices_arr = np.array(avg_prices)
    quantiles = np.quantile(stop_times_arr, [0.25, 0.5, 0.75, 0.9])
    print(f"total paths: {len(stop_times)}")
    print(
        f"average execution price: mean={avg_prices_arr.mean():.6f} "
        f"std={avg_prices_arr.std(ddof=0):.6f}"
    )
    print(
        "stop reasons: "
        + " ".join(f"{r}={reasons.get(r, 0)}" for r in _REASON_ORDER)
    )
    print(
        "completion time quantiles: "
        + " ".join(
            f"p{int(q * 100)}={v:.6f}"
            for q, v in zip([0.25, 0.5, 0.75, 0.9], quantiles)
        )
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jdexec",
        description="Trading-speed surfaces and strategy simulation for optimal execution",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_coeffs = sub.add_parser("coeffs", help="print the derived coefficient report as JSON")
    p_coeffs.add_argument("--config", required=True, help="path to a JSON run configuration")
    p_coeffs.add_argument("--out", help="directory to also write coefficients.json to")

    p_solve = sub.add_parser("solve", help="solve the trading-speed surface")
    p_solve.add_argument("--config", required=True, help="path to a JSON run configuration")
    p_solve.add_argument("--out", required=True, help="artifact directory for surface outputs")

    p_sim = sub.add_parser("simulate", help="run the path batch against a solved surface")
    p_sim.add_argument("--config", required=True, help="path to a JSON run configuration")
    p_sim.add_argument("--out", required=True, help="artifact directory holding the surface")
    p_sim.add_argument("--paths", type=int, help="override sim.n_paths")
    p_sim.add_argument("--seed", type=int, help="override sim.base_seed")
    p_sim.add_argument(
        "--interp", action="store_true", help="interpolate the surface linearly in price"
    )

    p_report = sub.add_parser("report", help="summarise a finished simulation directory")
    p_report.add_argument("--out", required=True, help="artifact directory to summarise")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "report":
        try:
            return cmd_report(Path(args.out))
        except FileNotFoundError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_MISSING

    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "coeffs":
        out_dir = Path(args.out) if args.out else None
        return cmd_coeffs(config, out_dir)

    if args.command == "solve":
        try:
            return cmd_solve(config, Path(args.out))
        except (ValueError, NotImplementedError, FloatingPointError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_SOLVER

    if args.command == "simulate":
        try:
            return cmd_simulate(
                config,
                Path(args.out),
                n_paths=args.paths,
                base_seed=args.seed,
                interp=args.interp,
            )
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except (_MismatchError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_MISMATCH

    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    raise SystemExit(main())
