"""Trading-speed surfaces h(t, S) for optimal acquisition and liquidation.

The value function of the barrier-constrained execution problem reduces to
a scalar field ``h(t, S)`` satisfying a backward semilinear PDE: diffusion
in price, a quadratic self-interaction ``±h^2/kappa`` and a running
inventory penalty ``phi``.  ``h/kappa`` is the trading speed per unit of
outstanding inventory, so surfaces from this module drive the strategy
simulator directly.

The time stepper treats diffusion implicitly (tridiagonal solve) and the
quadratic term explicitly at the known later-time row.  Boundary
conditions: ``h = alpha`` (terminal penalty slope) at the active price
barrier -- the cap ``S_max`` when acquiring, the floor ``S_min`` when
liquidating -- and zero second derivative at the passive boundary.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TextIO

import numpy as np
from scipy.linalg import solve_banded

from .coefficients import EffectiveDynamics

__all__ = [
    "Grid",
    "HSurface",
    "ProblemConfig",
    "ProblemKind",
    "backward_step",
    "build_grid",
    "load_surface_csv",
    "lookup_h",
    "save_surface_csv",
    "solve_surface",
]


class ProblemKind(enum.Enum):
    """Trade direction: build a position up to the target, or unwind it."""

    ACQUISITION = "acquisition"
    LIQUIDATION = "liquidation"


def _as_kind(kind: "ProblemKind | str") -> ProblemKind:
    if isinstance(kind, ProblemKind):
        return kind
    try:
        return ProblemKind(str(kind).strip().lower())
    except ValueError:
        raise ValueError(
            f"kind must be 'acquisition' or 'liquidation', got {kind!r}"
        ) from None


@dataclass(frozen=True)
class ProblemConfig:
    """Execution problem: horizon, barriers, penalties and price dynamics.

    ``alpha`` is the terminal penalty slope per unit (also the barrier value
    of ``h``), ``kappa`` the temporary-impact slope, ``phi`` the running
    inventory penalty, ``spread`` the full bid-ask spread, and
    ``target_inventory`` the number of units to acquire or liquidate.
    ``b_perm`` (permanent impact) is carried for completeness; only
    ``b_perm = 0`` is supported by the solver.
    """

    kind: ProblemKind
    dynamics: EffectiveDynamics
    s0: float
    horizon: float
    s_min: float
    s_max: float
    alpha: float
    kappa: float
    phi: float
    b_perm: float = 0.0
    spread: float = 0.01
    target_inventory: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", _as_kind(self.kind))
        if not self.s_min < self.s0 < self.s_max:
            raise ValueError(
                f"need s_min < s0 < s_max, got {self.s_min}, {self.s0}, {self.s_max}"
            )
        if self.horizon <= 0.0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if self.alpha <= 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.kappa <= 0.0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.phi < 0.0:
            raise ValueError(f"phi must be nonnegative, got {self.phi}")
        if self.b_perm < 0.0:
            raise ValueError(f"b_perm must be nonnegative, got {self.b_perm}")
        if self.spread < 0.0:
            raise ValueError(f"spread must be nonnegative, got {self.spread}")
        if self.target_inventory <= 0.0:
            raise ValueError(
                f"target_inventory must be positive, got {self.target_inventory}"
            )

    @property
    def active_barrier(self) -> float:
        """Price level whose touch stops trading (cap or floor)."""
        return self.s_max if self.kind is ProblemKind.ACQUISITION else self.s_min


@dataclass(frozen=True)
class Grid:
    """Uniform space-time grid; node ``(n, i)`` is ``(n*dt, s_min + i*ds)``."""

    n_steps: int
    m_steps: int
    dt: float
    ds: float
    times: np.ndarray
    prices: np.ndarray


def build_grid(config: ProblemConfig, n_steps: int, m_steps: int) -> Grid:
    """Build the solver grid with ``dt = horizon/n_steps`` and
    ``ds = (s_max - s_min)/m_steps``.

    The explicit quadratic term contracts only while ``dt*alpha/kappa < 1``;
    grids violating that bound are rejected with the minimal admissible
    ``n_steps``.
    """
    n_steps = int(n_steps)
    m_steps = int(m_steps)
    if n_steps < 2:
        raise ValueError(f"n_steps must be at least 2, got {n_steps}")
    if m_steps < 3:
        raise ValueError(f"m_steps must be at least 3, got {m_steps}")
    dt = config.horizon / n_steps
    ds = (config.s_max - config.s_min) / m_steps
    if not dt * config.alpha / config.kappa < 1.0:
        suggested = math.floor(config.horizon * config.alpha / config.kappa) + 1
        raise ValueError(
            f"dt*alpha/kappa = {dt * config.alpha / config.kappa:.6g} >= 1; "
            f"increase n_steps to at least {suggested}"
        )
    times = np.linspace(0.0, config.horizon, n_steps + 1)
    prices = np.linspace(config.s_min, config.s_max, m_steps + 1)
    return Grid(
        n_steps=n_steps, m_steps=m_steps, dt=dt, ds=ds, times=times, prices=prices
    )


@dataclass(frozen=True)
class HSurface:
    """Solved field ``h(t, S)`` on the grid; ``values[n, i]`` at ``(t_n, S_i)``."""

    kind: ProblemKind
    grid: Grid
    values: np.ndarray
    config: ProblemConfig

    def __post_init__(self) -> None:
        expected = (self.grid.n_steps + 1, self.grid.m_steps + 1)
        if self.values.shape != expected:
            raise ValueError(
                f"values shape {self.values.shape} does not match grid {expected}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("surface contains non-finite values")


def backward_step(h_next: np.ndarray, config: ProblemConfig, grid: Grid) -> np.ndarray:
    """One backward time step: from the row at ``t_{n+1}`` to the row at ``t_n``.

    Interior nodes solve ``M1 @ h_interior = h_next - (dt/kappa)*h_next^2
    + dt*phi`` (acquisition; the penalty enters with a minus sign when
    liquidating), where ``M1`` is tridiagonal with diagonal ``1 + beta`` and
    off-diagonals ``-beta/2``, ``beta = sigma_total^2 dt/ds^2``.  The
    quadratic term uses the known later-time row.  ``h = alpha`` is imposed
    at the active barrier; the zero-second-derivative condition at the
    passive boundary is eliminated into the adjacent row and the boundary
    node is recovered as ``2*h_adjacent - h_next_inner``.
    """
    h_next = np.asarray(h_next, dtype=np.float64)
    m = grid.m_steps
    if h_next.shape != (m + 1,):
        raise ValueError(f"expected row of length {m + 1}, got {h_next.shape}")

    dt = grid.dt
    sig2 = config.dynamics.sigma_total**2
    off = sig2 * dt / (2.0 * grid.ds * grid.ds)
    diag = 2.0 * off
    acquiring = config.kind is ProblemKind.ACQUISITION
    penalty = dt * config.phi if acquiring else -dt * config.phi
    rhs_row = h_next - (dt / config.kappa) * h_next**2 + penalty

    ab = np.zeros((3, m - 1))
    ab[1] = 1.0 + diag
    ab[0][1:] = -off
    ab[2][:-1] = -off
    rhs = rhs_row[1:m].copy()

    if acquiring:
        # passive boundary at i=0: row for i=1 reduces to the identity
        ab[1][0] = 1.0
        ab[0][1] = 0.0
        rhs[-1] += off * config.alpha
    else:
        # passive boundary at i=m: row for i=m-1 reduces to the identity
        ab[1][-1] = 1.0
        ab[2][-2] = 0.0
        rhs[0] += off * config.alpha

    interior = solve_banded((1, 1), ab, rhs)

    out = np.empty(m + 1, dtype=np.float64)
    out[1:m] = interior
    if acquiring:
        out[m] = config.alpha
        out[0] = 2.0 * interior[0] - interior[1]
    else:
        out[0] = config.alpha
        out[m] = 2.0 * interior[-1] - interior[-2]
    return out


def solve_surface(config: ProblemConfig, grid: Grid) -> HSurface:
    """Backward sweep from the terminal row ``h(T, .) = alpha`` to ``t = 0``."""
    if config.b_perm != 0.0:
        raise NotImplementedError("permanent-impact terms (b_perm != 0) are not supported")
    values = np.empty((grid.n_steps + 1, grid.m_steps + 1), dtype=np.float64)
    values[grid.n_steps] = config.alpha
    for n in range(grid.n_steps - 1, -1, -1):
        values[n] = backward_step(values[n + 1], config, grid)
    return HSurface(kind=config.kind, grid=grid, values=values, config=config)


def _row_index(grid: Grid, t: float) -> int:
    row = int(round(t / grid.dt))
    return min(max(row, 0), grid.n_steps)


def lookup_h(surface: HSurface, t: float, s: float, interp: bool = False) -> float:
    """Value of ``h`` at ``(t, s)``.

    Time maps to the nearest grid row; ``s`` is clamped to the barrier
    interval and maps to the nearest column, or, with ``interp=True``, to
    the linear interpolant between the two neighbouring columns.
    """
    grid = surface.grid
    row = _row_index(grid, t)
    s_min = float(grid.prices[0])
    s_max = float(grid.prices[-1])
    x = (min(max(s, s_min), s_max) - s_min) / grid.ds
    if interp:
        i0 = min(max(int(math.floor(x)), 0), grid.m_steps - 1)
        w = x - i0
        return float(
            (1.0 - w) * surface.values[row, i0] + w * surface.values[row, i0 + 1]
        )
    col = min(max(int(round(x)), 0), grid.m_steps)
    return float(surface.values[row, col])


def _format(value: float) -> str:
    return format(value, ".17e")


def save_surface_csv(surface: HSurface, path) -> None:
    """Write the surface as CSV: first row the price grid, first column the
    time grid, body the ``h`` values.  Full-precision scientific notation;
    reloading reproduces every float bit-exactly."""
    grid = surface.grid
    with open(path, "w", encoding="ascii", newline="\n") as f:
        _write_surface(f, grid, surface.values)


def _write_surface(f: TextIO, grid: Grid, values: np.ndarray) -> None:
    f.write("," + ",".join(_format(s) for s in grid.prices) + "\n")
    for n in range(grid.n_steps + 1):
        f.write(
            _format(grid.times[n])
            + ","
            + ",".join(_format(v) for v in values[n])
            + "\n"
        )


def load_surface_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read back a surface CSV; returns ``(times, prices, values)``."""
    with open(path, "r", encoding="ascii") as f:
        header = f.readline().strip().split(",")
        if header[0] != "":
            raise ValueError("malformed surface CSV: missing corner cell")
        prices = np.array([float(x) for x in header[1:]], dtype=np.float64)
        times = []
        rows = []
        for line in f:
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            times.append(float(cells[0]))
            row = np.array([float(x) for x in cells[1:]], dtype=np.float64)
            if row.size != prices.size:
                raise ValueError("malformed surface CSV: ragged row")
            rows.append(row)
    return np.array(times, dtype=np.float64), prices, np.vstack(rows)
