"""Tick-level midprice models: mark chains, event arrivals, path simulation.

The midprice is a Brownian motion plus a compound jump process: jump times
come either from a renewal (semi-Markov) process or from a self-exciting
(Hawkes) process with exponential kernel, and jump marks ``±delta`` follow
a two-state chain with continuation probabilities ``p_cont`` (up stays up)
and ``p_cont_prime`` (down stays down).

Alongside exact samplers, :func:`empirical_scaling_stats` measures the
space-time scaled drift and variance of the compound process, the
quantities the closed forms in :mod:`jdexec.coefficients` predict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from . import _kernels, coefficients

__all__ = [
    "EventStream",
    "HawkesParams",
    "JumpDiffusionModel",
    "ScalingStats",
    "SemiMarkovParams",
    "TickChainParams",
    "empirical_scaling_stats",
    "sample_hawkes_events",
    "sample_renewal_events",
    "simulate_jump_diffusion_path",
    "step_tick_chain",
]

_FAMILY_IDS = {
    "exponential": _kernels.FAMILY_EXPONENTIAL,
    "gamma": _kernels.FAMILY_GAMMA,
    "lognormal": _kernels.FAMILY_LOGNORMAL,
}

_REL_TOL = 1e-12

RngLike = Union[np.random.Generator, int, np.random.SeedSequence]


def _as_generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True)
class TickChainParams:
    """Two-state ``±delta`` mark chain.

    ``p_cont`` is the probability an up-tick is followed by another up-tick;
    ``p_cont_prime`` the probability a down-tick is followed by another
    down-tick.
    """

    delta: float
    p_cont: float
    p_cont_prime: float

    def __post_init__(self) -> None:
        if self.delta <= 0.0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if not 0.0 < self.p_cont < 1.0:
            raise ValueError(f"p_cont must lie in (0, 1), got {self.p_cont}")
        if not 0.0 < self.p_cont_prime < 1.0:
            raise ValueError(
                f"p_cont_prime must lie in (0, 1), got {self.p_cont_prime}"
            )
        if self.p_cont + self.p_cont_prime == 2.0:
            raise ValueError("p_cont + p_cont_prime must differ from 2")


@dataclass(frozen=True)
class HawkesParams:
    """Self-exciting arrival model with kernel ``kernel_scale*exp(-kernel_decay*t)``."""

    lambda_base: float
    kernel_scale: float
    kernel_decay: float

    def __post_init__(self) -> None:
        if self.lambda_base <= 0.0:
            raise ValueError(f"lambda_base must be positive, got {self.lambda_base}")
        if self.kernel_scale < 0.0:
            raise ValueError(f"kernel_scale must be nonnegative, got {self.kernel_scale}")
        if self.kernel_decay <= 0.0:
            raise ValueError(f"kernel_decay must be positive, got {self.kernel_decay}")
        if not self.branching_ratio < 1.0:
            raise ValueError(
                f"branching ratio must lie in [0, 1), got {self.branching_ratio}"
            )

    @property
    def branching_ratio(self) -> float:
        """Mean offspring count per event, ``kernel_scale/kernel_decay``."""
        return self.kernel_scale / self.kernel_decay


@dataclass(frozen=True)
class SemiMarkovParams:
    """Renewal arrival model with i.i.d. waiting times.

    ``family`` is one of ``"exponential"`` (params: mean), ``"gamma"``
    (params: shape, scale) or ``"lognormal"`` (params: mu, sigma of the
    underlying normal).  ``m_tau`` must equal the analytic mean waiting
    time of the family; the classmethod constructors fill it in.
    """

    family: str
    params: tuple[float, ...]
    m_tau: float

    def __post_init__(self) -> None:
        if self.family not in _FAMILY_IDS:
            raise ValueError(
                f"family must be one of {sorted(_FAMILY_IDS)}, got {self.family!r}"
            )
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        expected_len = 1 if self.family == "exponential" else 2
        if len(self.params) != expected_len:
            raise ValueError(
                f"{self.family} waiting times take {expected_len} parameter(s), "
                f"got {len(self.params)}"
            )
        if self.family == "exponential" and self.params[0] <= 0.0:
            raise ValueError(f"exponential mean must be positive, got {self.params[0]}")
        if self.family == "gamma" and (self.params[0] <= 0.0 or self.params[1] <= 0.0):
            raise ValueError(f"gamma shape and scale must be positive, got {self.params}")
        if self.family == "lognormal" and self.params[1] < 0.0:
            raise ValueError(f"lognormal sigma must be nonnegative, got {self.params[1]}")
        mean = self.analytic_mean()
        if not math.isclose(self.m_tau, mean, rel_tol=_REL_TOL, abs_tol=0.0):
            raise ValueError(
                f"m_tau {self.m_tau} does not match the analytic mean {mean} "
                f"of the {self.family} family"
            )

    def analytic_mean(self) -> float:
        """Mean waiting time implied by the family parameters."""
        if self.family == "exponential":
            return self.params[0]
        if self.family == "gamma":
            return self.params[0] * self.params[1]
        return math.exp(self.params[0] + 0.5 * self.params[1] ** 2)

    @classmethod
    def exponential(cls, mean: float) -> "SemiMarkovParams":
        return cls(family="exponential", params=(mean,), m_tau=mean)

    @classmethod
    def gamma(cls, shape: float, scale: float) -> "SemiMarkovParams":
        return cls(family="gamma", params=(shape, scale), m_tau=shape * scale)

    @classmethod
    def lognormal(cls, mu: float, sigma: float) -> "SemiMarkovParams":
        return cls(
            family="lognormal",
            params=(mu, sigma),
            m_tau=math.exp(mu + 0.5 * sigma**2),
        )


ArrivalParams = Union[HawkesParams, SemiMarkovParams]


@dataclass(frozen=True)
class EventStream:
    """Jump times with their ``±delta`` marks on ``[0, horizon]``."""

    times: np.ndarray
    marks: np.ndarray
    horizon: float

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=np.float64)
        marks = np.asarray(self.marks, dtype=np.float64)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "marks", marks)
        if times.shape != marks.shape or times.ndim != 1:
            raise ValueError("times and marks must be 1-d arrays of equal length")
        if times.size:
            if not np.all(np.diff(times) > 0.0):
                raise ValueError("event times must be strictly increasing")
            if times[0] < 0.0 or times[-1] > self.horizon:
                raise ValueError("event times must lie within [0, horizon]")


@dataclass(frozen=True)
class JumpDiffusionModel:
    """Midprice model: Brownian part plus marked jump process.

    ``dt`` is the simulation grid spacing used by
    :func:`simulate_jump_diffusion_path`.
    """

    tick: TickChainParams
    arrivals: ArrivalParams
    sigma: float
    dt: float
    s0: float = 0.0

    def __post_init__(self) -> None:
        if self.sigma < 0.0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not math.isfinite(self.s0):
            raise ValueError(f"s0 must be finite, got {self.s0}")


class ScalingStats(NamedTuple):
    """Measured space-time scaling of the compound process at scale ``n``."""

    drift: float
    variance: float


def step_tick_chain(sign: int, params: TickChainParams, rng: RngLike) -> int:
    """Advance the mark chain one event; returns the next sign (``+1``/``-1``)."""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    gen = _as_generator(rng)
    u = gen.random()
    if sign > 0:
        return 1 if u < params.p_cont else -1
    return -1 if u < params.p_cont_prime else 1


def sample_hawkes_events(params: HawkesParams, horizon: float, rng: RngLike) -> np.ndarray:
    """Event times of the self-exciting arrival process on ``[0, horizon]``.

    With a common generator state, extending the horizon only appends
    events: the accepted prefix is unchanged.
    """
    if horizon < 0.0:
        raise ValueError(f"horizon must be nonnegative, got {horizon}")
    gen = _as_generator(rng)
    return _kernels.hawkes_event_times(
        params.lambda_base,
        params.kernel_scale,
        params.kernel_decay,
        float(horizon),
        gen,
    )


def sample_renewal_events(
    params: SemiMarkovParams, horizon: float, rng: RngLike
) -> np.ndarray:
    """Event times of the renewal arrival process on ``[0, horizon]``."""
    if horizon < 0.0:
        raise ValueError(f"horizon must be nonnegative, got {horizon}")
    gen = _as_generator(rng)
    par0 = params.params[0]
    par1 = params.params[1] if len(params.params) > 1 else 0.0
    return _kernels.renewal_event_times(
        _FAMILY_IDS[params.family], par0, par1, float(horizon), gen
    )


def _initial_sign(tick: TickChainParams, gen: np.random.Generator) -> int:
    pi = coefficients.pi_star(tick.p_cont, tick.p_cont_prime)
    return 1 if gen.random() < pi else -1


def _sample_events(
    arrivals: ArrivalParams, horizon: float, gen: np.random.Generator
) -> np.ndarray:
    if isinstance(arrivals, HawkesParams):
        return sample_hawkes_events(arrivals, horizon, gen)
    return sample_renewal_events(arrivals, horizon, gen)


def simulate_jump_diffusion_path(
    model: JumpDiffusionModel, horizon: float, rng: RngLike
) -> tuple[np.ndarray, np.ndarray, EventStream]:
    """Simulate the midprice on a uniform grid of spacing ``model.dt``.

    Returns ``(times, values, events)``.  The grid extends to the first
    multiple of ``dt`` at or beyond ``horizon``; each jump is applied at the
    first grid point at or after its event time.  Arrival times, marks and
    the Brownian part consume three disjoint child streams of ``rng``, so
    changing one component (e.g. setting ``sigma`` to zero) leaves the
    others bit-identical.
    """
    if horizon <= 0.0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    gen = _as_generator(rng)
    arrival_gen, mark_gen, diffusion_gen = gen.spawn(3)

    n = max(1, math.ceil(horizon / model.dt))
    while n * model.dt < horizon:
        n += 1
    times = np.arange(n + 1, dtype=np.float64) * model.dt

    event_times = _sample_events(model.arrivals, horizon, arrival_gen)
    sign = _initial_sign(model.tick, mark_gen)
    marks = np.empty(event_times.size, dtype=np.float64)
    for k in range(event_times.size):
        sign = step_tick_chain(sign, model.tick, mark_gen)
        marks[k] = model.tick.delta * sign
    events = EventStream(times=event_times, marks=marks, horizon=float(horizon))

    jump_at = np.zeros(n + 1, dtype=np.float64)
    idx = np.searchsorted(times, event_times, side="left")
    np.add.at(jump_at, idx, marks)

    increments = diffusion_gen.standard_normal(n)
    brownian = np.zeros(n + 1, dtype=np.float64)
    brownian[1:] = model.sigma * math.sqrt(model.dt) * np.cumsum(increments)

    values = model.s0 + np.cumsum(jump_at) + brownian
    return times, values, events


def empirical_scaling_stats(
    model: JumpDiffusionModel,
    t: float,
    n: int,
    n_paths: int,
    rng: RngLike,
) -> ScalingStats:
    """Measure the space-time scaling of the midprice at time ``t*n``.

    Over ``n_paths`` independent paths of the compound process (plus the
    Brownian part), returns the sample mean of ``(S_{tn} - s0)/n`` and the
    sample variance of ``(S_{tn} - s0 - eta*t*n)/sqrt(n)``, where ``eta``
    is the closed-form jump drift for the arrival model.  The former
    estimates ``eta*t``; the latter estimates ``(sigma^2 + varsigma^2)*t``.
    """
    if t <= 0.0:
        raise ValueError(f"t must be positive, got {t}")
    if n < 1 or n_paths < 2:
        raise ValueError("need n >= 1 and n_paths >= 2")
    gen = _as_generator(rng)
    horizon = t * n
    tick = model.tick
    pi = coefficients.pi_star(tick.p_cont, tick.p_cont_prime)

    if isinstance(model.arrivals, HawkesParams):
        eta = coefficients.eta_hp(
            coefficients.a_star(tick.delta, tick.p_cont, tick.p_cont_prime),
            model.arrivals.lambda_base,
            model.arrivals.branching_ratio,
        )
    else:
        eta = coefficients.eta_sm(
            coefficients.s_star(tick.delta, tick.p_cont, tick.p_cont_prime),
            model.arrivals.m_tau,
        )

    samples = np.empty(n_paths, dtype=np.float64)
    sigma_scale = model.sigma * math.sqrt(horizon)
    for i, child in enumerate(gen.spawn(n_paths)):
        init_sign = 1 if child.random() < pi else -1
        if isinstance(model.arrivals, HawkesParams):
            _, mark_sum = _kernels.compound_hawkes_at(
                model.arrivals.lambda_base,
                model.arrivals.kernel_scale,
                model.arrivals.kernel_decay,
                horizon,
                tick.delta,
                tick.p_cont,
                tick.p_cont_prime,
                init_sign,
                child,
            )
        else:
            par0 = model.arrivals.params[0]
            par1 = model.arrivals.params[1] if len(model.arrivals.params) > 1 else 0.0
            _, mark_sum = _kernels.compound_renewal_at(
                _FAMILY_IDS[model.arrivals.family],
                par0,
                par1,
                horizon,
                tick.delta,
                tick.p_cont,
                tick.p_cont_prime,
                init_sign,
                child,
            )
        samples[i] = mark_sum + sigma_scale * child.standard_normal()

    drift = float(np.mean(samples) / n)
    residuals = (samples - eta * horizon) / math.sqrt(n)
    variance = float(np.var(residuals, ddof=1))
    return ScalingStats(drift=drift, variance=variance)
