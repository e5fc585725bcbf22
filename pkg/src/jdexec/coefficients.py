"""Diffusion-approximation coefficients for tick-level jump models.

Maps microstructure primitives (a two-state ``±delta`` tick chain plus an
event-arrival model) to the constants of the continuous approximation used
by the trading-speed PDE and the path simulator:

* ``eta``         -- drift of the jump component per unit time,
* ``sigma``       -- exogenous (Brownian) volatility,
* ``sigma_bar``   -- volatility of the time-averaged jump component,
* ``varsigma``    -- volatility of the rescaled jump fluctuations,
* ``sigma_total`` -- root-sum-square of the three volatilities; the single
  diffusion coefficient seen downstream.

Two closed-form routes are provided -- renewal (semi-Markov) arrivals and
self-exciting (Hawkes) arrivals -- plus a direct passthrough for externally
calibrated values.  All functions are pure and operate on plain floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:  # pragma: no cover - type annotations only
    from .microstructure import HawkesParams, SemiMarkovParams, TickChainParams

__all__ = [
    "CoefficientReport",
    "EffectiveDynamics",
    "a_star",
    "effective_dynamics_direct",
    "effective_dynamics_hp",
    "effective_dynamics_sm",
    "eta_hp",
    "eta_sm",
    "pi_star",
    "s_star",
    "sigma_bar_hp",
    "sigma_bar_sm",
    "sigma_star_hp",
    "sigma_star_sm",
    "varsigma_hp",
    "varsigma_sm",
]

_REL_TOL = 1e-12


def _check_probs(p_cont: float, p_cont_prime: float) -> None:
    if not 0.0 < p_cont < 1.0:
        raise ValueError(f"p_cont must lie in (0, 1), got {p_cont}")
    if not 0.0 < p_cont_prime < 1.0:
        raise ValueError(f"p_cont_prime must lie in (0, 1), got {p_cont_prime}")


def pi_star(p_cont: float, p_cont_prime: float) -> float:
    """Stationary probability of the up-tick state of the mark chain.

    For the two-state chain with continuation probabilities ``p_cont``
    (up stays up) and ``p_cont_prime`` (down stays down), the stationary
    distribution puts weight ``(p_cont_prime - 1)/(p_cont + p_cont_prime - 2)``
    on the up state.
    """
    _check_probs(p_cont, p_cont_prime)
    return (p_cont_prime - 1.0) / (p_cont + p_cont_prime - 2.0)


def s_star(delta: float, p_cont: float, p_cont_prime: float) -> float:
    """Mean jump size ``delta * (2*pi_star - 1)`` under the stationary chain."""
    if delta <= 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    return delta * (2.0 * pi_star(p_cont, p_cont_prime) - 1.0)


def a_star(delta: float, p_cont: float, p_cont_prime: float) -> float:
    """Mean jump size under the stationary chain (self-exciting route).

    Identical value to :func:`s_star`; kept as a separate name because the
    two arrival models develop their coefficients independently.
    """
    return s_star(delta, p_cont, p_cont_prime)


def sigma_star_sm(delta: float, p_cont: float, p_cont_prime: float) -> float:
    """Per-event variance constant of the renewal-route functional CLT.

    Returns ``sqrt(4 delta^2 (1 - p' + pi*(p' - p)) / (p + p' - 2)^2)``.
    """
    if delta <= 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    _check_probs(p_cont, p_cont_prime)
    pi = pi_star(p_cont, p_cont_prime)
    num = 1.0 - p_cont_prime + pi * (p_cont_prime - p_cont)
    den = (p_cont + p_cont_prime - 2.0) ** 2
    radicand = 4.0 * delta * delta * (num / den)
    if radicand < 0.0:
        raise ValueError(f"negative variance radicand {radicand}")
    return math.sqrt(radicand)


def eta_sm(s_star_value: float, m_tau: float) -> float:
    """Jump drift per unit time for renewal arrivals: ``s*/m_tau``."""
    if m_tau <= 0.0:
        raise ValueError(f"m_tau must be positive, got {m_tau}")
    return s_star_value / m_tau


def varsigma_sm(sigma_star: float, m_tau: float) -> float:
    """Rescaled-fluctuation volatility for renewal arrivals: ``sigma*/sqrt(m_tau)``."""
    if m_tau <= 0.0:
        raise ValueError(f"m_tau must be positive, got {m_tau}")
    if sigma_star < 0.0:
        raise ValueError(f"sigma_star must be nonnegative, got {sigma_star}")
    return sigma_star / math.sqrt(m_tau)


def sigma_bar_sm(sigma_star: float, m_tau: float, pi_weight: float, sigma: float) -> float:
    """Time-averaged volatility for renewal arrivals.

    ``sqrt(sigma_star^2 / m_tau + pi_weight * sigma^2 / m_tau)`` where
    ``pi_weight`` is the weight on the exogenous-variance contribution.
    ``pi_weight`` has no default: it must be supplied by the caller.
    """
    if m_tau <= 0.0:
        raise ValueError(f"m_tau must be positive, got {m_tau}")
    if pi_weight < 0.0:
        raise ValueError(f"pi_weight must be nonnegative, got {pi_weight}")
    if sigma < 0.0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    return math.sqrt(sigma_star * sigma_star / m_tau + pi_weight * sigma * sigma / m_tau)


def sigma_star_hp(delta: float, p_cont: float, p_cont_prime: float) -> float:
    """Per-event variance constant of the self-exciting-route functional CLT.

    Returns ``sqrt(4 delta^2 [ (1 - p' + pi*(p' - p)) / (p + p' - 2)^2
    - pi*(1 - pi) ])``.  The radicand equals the two-state Markov-chain CLT
    variance ``4 delta^2 pi*(1 - pi*)(1 + rho)/(1 - rho)`` with
    ``rho = p + p' - 1``, hence it is nonnegative for all valid chains.
    """
    if delta <= 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    _check_probs(p_cont, p_cont_prime)
    pi = pi_star(p_cont, p_cont_prime)
    num = 1.0 - p_cont_prime + pi * (p_cont_prime - p_cont)
    den = (p_cont + p_cont_prime - 2.0) ** 2
    radicand = 4.0 * delta * delta * (num / den - pi * (1.0 - pi))
    if radicand < 0.0:
        raise ValueError(f"negative variance radicand {radicand}")
    return math.sqrt(radicand)


def _check_hawkes_rates(lambda_base: float, mu_hat: float) -> None:
    if lambda_base <= 0.0:
        raise ValueError(f"lambda_base must be positive, got {lambda_base}")
    if not 0.0 <= mu_hat < 1.0:
        raise ValueError(f"branching ratio must lie in [0, 1), got {mu_hat}")


def eta_hp(a_star_value: float, lambda_base: float, mu_hat: float) -> float:
    """Jump drift per unit time for self-exciting arrivals: ``a* lambda/(1-mu_hat)``."""
    _check_hawkes_rates(lambda_base, mu_hat)
    return a_star_value * lambda_base / (1.0 - mu_hat)


def varsigma_hp(sigma_star: float, lambda_base: float, mu_hat: float) -> float:
    """Rescaled-fluctuation volatility for self-exciting arrivals.

    ``sigma* sqrt(lambda/(1-mu_hat))``.
    """
    _check_hawkes_rates(lambda_base, mu_hat)
    if sigma_star < 0.0:
        raise ValueError(f"sigma_star must be nonnegative, got {sigma_star}")
    return sigma_star * math.sqrt(lambda_base / (1.0 - mu_hat))


def sigma_bar_hp(sigma_star: float, a_star_value: float, lambda_base: float, mu_hat: float) -> float:
    """Time-averaged volatility for self-exciting arrivals.

    ``sqrt(sigma*^2 + a*^2 lambda/(1-mu_hat))``.
    """
    _check_hawkes_rates(lambda_base, mu_hat)
    if sigma_star < 0.0:
        raise ValueError(f"sigma_star must be nonnegative, got {sigma_star}")
    return math.sqrt(
        sigma_star * sigma_star + a_star_value * a_star_value * lambda_base / (1.0 - mu_hat)
    )


@dataclass(frozen=True)
class CoefficientReport:
    """Full set of derived coefficients, suitable for JSON emission.

    ``source`` records which route produced the numbers (``"SM"``, ``"HP"``
    or ``"direct"``).  Chain-level entries are ``None`` in direct mode.
    """

    source: str
    pi_star: Optional[float]
    s_star: Optional[float]
    a_star: Optional[float]
    sigma_star: Optional[float]
    sigma_bar: float
    varsigma: float
    eta: float
    sigma_total: float

    def as_dict(self) -> dict:
        return {
            "pi_star": self.pi_star,
            "s_star": self.s_star,
            "a_star": self.a_star,
            "sigma_star": self.sigma_star,
            "sigma_bar": self.sigma_bar,
            "varsigma": self.varsigma,
            "eta": self.eta,
            "sigma_total": self.sigma_total,
            "source": self.source,
        }


@dataclass(frozen=True)
class EffectiveDynamics:
    """Effective midprice dynamics seen by the PDE and the simulator.

    ``sigma_total`` is derived in ``__post_init__`` when not supplied;
    when supplied it is checked against ``sqrt(sigma^2 + sigma_bar^2 +
    varsigma^2)`` at 1e-12 relative tolerance.
    """

    eta: float
    sigma: float
    sigma_bar: float
    varsigma: float
    sigma_total: float = field(default=math.nan)
    report: Optional[CoefficientReport] = None

    def __post_init__(self) -> None:
        for name in ("sigma", "sigma_bar", "varsigma"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0:
                raise ValueError(f"{name} must be finite and nonnegative, got {value}")
        if not math.isfinite(self.eta):
            raise ValueError(f"eta must be finite, got {self.eta}")
        expected = math.sqrt(
            self.sigma * self.sigma
            + self.sigma_bar * self.sigma_bar
            + self.varsigma * self.varsigma
        )
        if math.isnan(self.sigma_total):
            object.__setattr__(self, "sigma_total", expected)
        elif not math.isclose(self.sigma_total, expected, rel_tol=_REL_TOL, abs_tol=_REL_TOL):
            raise ValueError(
                f"sigma_total {self.sigma_total} inconsistent with components "
                f"(expected {expected})"
            )


def effective_dynamics_sm(
    tick: "TickChainParams",
    arrivals: "SemiMarkovParams",
    sigma: float,
    pi_weight: float | None = None,
    sigma_bar: float | None = None,
) -> EffectiveDynamics:
    """Effective dynamics from renewal (semi-Markov) arrival primitives.

    Exactly one of ``pi_weight`` (weight of the exogenous variance in the
    time-averaged volatility) and ``sigma_bar`` (the time-averaged
    volatility itself) must be given.
    """
    if (pi_weight is None) == (sigma_bar is None):
        raise ValueError("provide exactly one of pi_weight or sigma_bar")
    if sigma < 0.0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    pi = pi_star(tick.p_cont, tick.p_cont_prime)
    s_val = s_star(tick.delta, tick.p_cont, tick.p_cont_prime)
    sig_star = sigma_star_sm(tick.delta, tick.p_cont, tick.p_cont_prime)
    eta = eta_sm(s_val, arrivals.m_tau)
    varsigma = varsigma_sm(sig_star, arrivals.m_tau)
    if sigma_bar is None:
        sigma_bar = sigma_bar_sm(sig_star, arrivals.m_tau, pi_weight, sigma)
    elif sigma_bar < 0.0:
        raise ValueError(f"sigma_bar must be nonnegative, got {sigma_bar}")
    dynamics = EffectiveDynamics(eta=eta, sigma=sigma, sigma_bar=sigma_bar, varsigma=varsigma)
    report = CoefficientReport(
        source="SM",
        pi_star=pi,
        s_star=s_val,
        a_star=s_val,
        sigma_star=sig_star,
        sigma_bar=sigma_bar,
        varsigma=varsigma,
        eta=eta,
        sigma_total=dynamics.sigma_total,
    )
    return EffectiveDynamics(
        eta=eta,
        sigma=sigma,
        sigma_bar=sigma_bar,
        varsigma=varsigma,
        sigma_total=dynamics.sigma_total,
        report=report,
    )


def effective_dynamics_hp(
    tick: "TickChainParams",
    arrivals: "HawkesParams",
    sigma: float,
    sigma_bar: float | None = None,
) -> EffectiveDynamics:
    """Effective dynamics from self-exciting (Hawkes) arrival primitives.

    ``sigma_bar`` defaults to its closed form; pass a value to override.
    """
    if sigma < 0.0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    mu_hat = arrivals.branching_ratio
    pi = pi_star(tick.p_cont, tick.p_cont_prime)
    a_val = a_star(tick.delta, tick.p_cont, tick.p_cont_prime)
    sig_star = sigma_star_hp(tick.delta, tick.p_cont, tick.p_cont_prime)
    eta = eta_hp(a_val, arrivals.lambda_base, mu_hat)
    varsigma = varsigma_hp(sig_star, arrivals.lambda_base, mu_hat)
    if sigma_bar is None:
        sigma_bar = sigma_bar_hp(sig_star, a_val, arrivals.lambda_base, mu_hat)
    elif sigma_bar < 0.0:
        raise ValueError(f"sigma_bar must be nonnegative, got {sigma_bar}")
    dynamics = EffectiveDynamics(eta=eta, sigma=sigma, sigma_bar=sigma_bar, varsigma=varsigma)
    report = CoefficientReport(
        source="HP",
        pi_star=pi,
        s_star=a_val,
        a_star=a_val,
        sigma_star=sig_star,
        sigma_bar=sigma_bar,
        varsigma=varsigma,
        eta=eta,
        sigma_total=dynamics.sigma_total,
    )
    return EffectiveDynamics(
        eta=eta,
        sigma=sigma,
        sigma_bar=sigma_bar,
        varsigma=varsigma,
        sigma_total=dynamics.sigma_total,
        report=report,
    )


def effective_dynamics_direct(
    sigma: float,
    sigma_bar: float,
    varsigma: float,
    eta: float = 0.0,
) -> EffectiveDynamics:
    """Effective dynamics from externally calibrated volatility components."""
    dynamics = EffectiveDynamics(eta=eta, sigma=sigma, sigma_bar=sigma_bar, varsigma=varsigma)
    report = CoefficientReport(
        source="direct",
        pi_star=None,
        s_star=None,
        a_star=None,
        sigma_star=None,
        sigma_bar=sigma_bar,
        varsigma=varsigma,
        eta=eta,
        sigma_total=dynamics.sigma_total,
    )
    return EffectiveDynamics(
        eta=eta,
        sigma=sigma,
        sigma_bar=sigma_bar,
        varsigma=varsigma,
        sigma_total=dynamics.sigma_total,
        report=report,
    )
